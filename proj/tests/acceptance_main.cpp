// SPDX-License-Identifier: Apache-2.0
// acceptance — end-to-end checks of the engine's headline numbers, one line of
// output per criterion. Usage: acceptance [CIRCUITS_DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "opcircuits/dsl.hpp"
#include "opcircuits/duotensor.hpp"
#include "opcircuits/gadgets.hpp"
#include "opcircuits/reconstruction.hpp"

using namespace opc;

namespace {

const SystemType qubit{"q", 2};

struct Harness {
    int index = 0;
    int failures = 0;

    void run(const std::string& name, const std::function<bool(std::string&)>& body) {
        ++index;
        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%2d] %s (%.2fs) %s%s%s\n", index, ok ? "PASS" : "FAIL", secs, name.c_str(),
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

Matrix random_gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = cxd(normal(rng), normal(rng));
    return m;
}

// the closed-form 9x9 metric: rows/cols 1,2,3,12x,12y,13x,13y,23x,23y
Eigen::MatrixXd metric_n3() {
    const double h = 0.5, p = 0.25;
    Eigen::MatrixXd g(9, 9);
    g << 1, 0, 0, h, h, h, h, 0, 0,
         0, 1, 0, h, h, 0, 0, h, h,
         0, 0, 1, 0, 0, h, h, h, h,
         h, h, 0, 1, h, p, p, p, p,
         h, h, 0, h, 1, p, p, p, p,
         h, 0, h, p, p, 1, h, p, p,
         h, 0, h, p, p, h, 1, p, p,
         0, h, h, p, p, p, p, 1, h,
         0, h, h, p, p, p, p, h, 1;
    return g;
}

Eigen::VectorXcd ket4(int n) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(n - 1) = 1.0;
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string circuits = argc > 1 ? argv[1] : "circuits";
    Harness h;

    // 1 -------------------------------------------------------------------
    h.run("hopping metric exactness (dim 3)", [&](std::string& detail) {
        FiducialFamily fam = fiducial_family(3);
        const double dev = (fam.g - metric_n3()).cwiseAbs().maxCoeff();
        detail = "max entrywise deviation " + fmt(dev) + " (tol 1e-12)";
        return dev <= 1e-12;
    });

    // 2 -------------------------------------------------------------------
    h.run("fiducial invertibility and round trips (dims 2..5)", [&](std::string& detail) {
        double worst = 0.0;
        for (int n = 2; n <= 5; ++n) {
            const SystemType t{"t", n};
            FamilyMap fams;
            fams.emplace("t", fiducial_family(t));
            const int K = fams.at("t").count();
            if ((fams.at("t").g * fams.at("t").g_inv - Eigen::MatrixXd::Identity(K, K))
                    .cwiseAbs()
                    .maxCoeff() > 1e-9)
                return false;
            for (int trial = 0; trial < 50; ++trial) {
                OperatorFragment f = sample_physical(t, t, 1000 * n + trial);
                std::vector<LegColor> colors{trial % 2 ? LegColor::White : LegColor::Black,
                                             trial % 3 ? LegColor::Black : LegColor::White};
                OperatorFragment back =
                    duotensor_to_operator(operator_to_duotensor(f, fams, colors), fams);
                worst = std::max(worst,
                                 (back.op().matrix() - f.op().matrix()).cwiseAbs().maxCoeff());
            }
        }
        detail = "worst round-trip deviation " + fmt(worst) + " (tol 1e-10)";
        return worst <= 1e-10;
    });

    // 3 -------------------------------------------------------------------
    h.run("teleportation constant 1/8", [&](std::string& detail) {
        TeleportReport rep = teleportation_demo();
        auto [graph, payloads] = teleport_circuit();
        const double value = eval_circuit(graph, payloads);
        detail = "ratio " + fmt(rep.ratio) + ", closed value " + fmt(value) + ", deviation " +
                 fmt(rep.deviation);
        return rep.verdict && std::abs(rep.ratio - 0.125) <= 1e-9 && rep.deviation <= 1e-9 &&
               std::abs(value - 0.125) <= 1e-9;
    });

    // 4 -------------------------------------------------------------------
    h.run("entanglement swapping constant 1/8", [&](std::string& detail) {
        SwapReport rep = entanglement_swap_demo();
        detail = "ratio " + fmt(rep.ratio) + ", deviation " + fmt(rep.deviation);
        return rep.verdict && std::abs(rep.ratio - 0.125) <= 1e-9 && rep.deviation <= 1e-9;
    });

    // 5 -------------------------------------------------------------------
    h.run("maximally entangled correlations delta_mn/2", [&](std::string& detail) {
        OperatorFragment prep = max_entangled(Role::Preparation).with_prefix("p:");
        double worst = 0.0;
        for (int m = 0; m < 2; ++m) {
            for (int n = 0; n < 2; ++n) {
                Matrix em = Matrix::Zero(2, 2), en = Matrix::Zero(2, 2);
                em(m, m) = 1.0;
                en(n, n) = 1.0;
                OperatorFragment rm = OperatorFragment::result(qubit, em).with_prefix("m:");
                OperatorFragment rn = OperatorFragment::result(qubit, en).with_prefix("n:");
                const double v =
                    contract(contract(prep, rm, {{1, 1}}), rn, {{1, 1}}).scalar_value();
                worst = std::max(worst, std::abs(v - (m == n ? 0.5 : 0.0)));
            }
        }
        detail = "worst deviation " + fmt(worst) + " (tol 1e-12)";
        return worst <= 1e-12;
    });

    // 6 -------------------------------------------------------------------
    h.run("Bloch probability formula over 100 random pairs", [&](std::string& detail) {
        std::mt19937_64 rng(6);
        std::normal_distribution<double> normal(0.0, 1.0);
        auto point = [&] {
            double x = normal(rng), y = normal(rng), z = normal(rng);
            const double n = std::sqrt(x * x + y * y + z * z);
            return BlochPoint(x / n, y / n, z / n);
        };
        double worst = 0.0, worst_antipodal = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            BlochPoint u = point(), v = point();
            OperatorFragment pu = bloch_state(u, Role::Preparation).with_prefix("u:");
            OperatorFragment pv = bloch_state(v, Role::Result).with_prefix("v:");
            const double got = contract(pu, pv, {{1, 1}}).scalar_value();
            const double want = 0.5 * (1.0 + u.x * v.x + u.y * v.y + u.z * v.z);
            worst = std::max(worst, std::abs(got - want));

            OperatorFragment pa = bloch_state(BlochPoint(-u.x, -u.y, -u.z), Role::Result)
                                      .with_prefix("a:");
            worst_antipodal =
                std::max(worst_antipodal,
                         std::abs(contract(pu, pa, {{1, 1}}).scalar_value()));
        }
        detail = "formula deviation " + fmt(worst) + ", antipodal residue " + fmt(worst_antipodal);
        return worst <= 1e-12 && worst_antipodal <= 1e-12;
    });

    // 7 -------------------------------------------------------------------
    h.run("physicality equivalence: 200 accepted, 200 perturbed rejected", [&](std::string& detail) {
        int false_neg = 0, false_pos = 0;
        std::mt19937_64 rng(7);
        const double eps = 1e-3;
        for (int trial = 0; trial < 200; ++trial) {
            OperatorFragment f = sample_physical(qubit, qubit, 70000 + trial);
            if (!is_physical(f).verdict) ++false_neg;

            // push the Choi form along a random rank-one direction, away from PSD
            Eigen::VectorXcd dir = random_gaussian(4, 1, rng).col(0);
            dir.normalize();
            ChoiForm c = input_transpose(f);
            Matrix perturbed = c.matrix.matrix() - eps * (dir * dir.adjoint());
            OperatorFragment bad = fragment_of_choi(
                ChoiForm{c.inputs, c.outputs, DenseHermitian(c.matrix.space(), perturbed)});
            if (is_physical(bad).verdict) ++false_pos;
        }
        detail = "false negatives " + std::to_string(false_neg) + ", false positives " +
                 std::to_string(false_pos);
        return false_neg == 0 && false_pos == 0;
    });

    // 8 -------------------------------------------------------------------
    h.run("link product equals input transpose of the contraction", [&](std::string& detail) {
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            OperatorFragment a = sample_physical(qubit, qubit, 80000 + trial).with_prefix("a:");
            OperatorFragment b = sample_physical(qubit, qubit, 81000 + trial).with_prefix("b:");
            ChoiForm direct = input_transpose(contract(a, b, {{1, 1}}));
            ChoiForm ca = input_transpose(a);
            ChoiForm cb = input_transpose(b);
            ChoiForm cb_shared{cb.inputs, cb.outputs,
                               cb.matrix.relabeled({a.outputs()[0].label, cb.outputs[0].label})};
            cb_shared.inputs[0].label = a.outputs()[0].label;
            ChoiForm linked = link_product(ca, cb_shared, {a.outputs()[0].label});
            worst = std::max(worst,
                             (linked.matrix.matrix() - direct.matrix.matrix()).cwiseAbs().maxCoeff());
        }
        detail = "worst deviation " + fmt(worst) + " (tol 1e-9)";
        return worst <= 1e-9;
    });

    // 9 -------------------------------------------------------------------
    h.run("wire-transpose invariance over sampled wire subsets", [&](std::string& detail) {
        std::mt19937_64 rng(9);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            // two-qubit preparation closed by a two-qubit effect: two matched wires
            Matrix g = random_gaussian(4, 4, rng);
            Matrix rho = g * g.adjoint();
            rho /= rho.trace().real();
            Matrix e = random_gaussian(4, 4, rng);
            Matrix eff = (e + e.adjoint()) / 2.0;

            OperatorFragment prep =
                OperatorFragment::make({}, {qubit, qubit}, rho).with_prefix("p:");
            OperatorFragment res = OperatorFragment::make({qubit, qubit}, {}, eff).with_prefix("r:");
            const double plain = contract(prep, res, {{1, 1}, {2, 2}}).scalar_value();

            std::uniform_int_distribution<int> coin(0, 1);
            std::vector<std::string> sub_p, sub_r;
            for (int w = 0; w < 2; ++w) {
                if (coin(rng)) {
                    sub_p.push_back(prep.outputs()[w].label);
                    sub_r.push_back(res.inputs()[w].label);
                }
            }
            OperatorFragment tp(prep.inputs(), prep.outputs(),
                                partial_transpose(prep.op(), sub_p));
            OperatorFragment tr(res.inputs(), res.outputs(), partial_transpose(res.op(), sub_r));
            const double twisted = contract(tp, tr, {{1, 1}, {2, 2}}).scalar_value();
            worst = std::max(worst, std::abs(plain - twisted));
        }
        detail = "worst value shift " + fmt(worst) + " (tol 1e-10)";
        return worst <= 1e-10;
    });

    // 10 ------------------------------------------------------------------
    h.run("flatness analysis of the canonical dim-4 sets", [&](std::string& detail) {
        auto ketx = [&](int m, int n) { return ((ket4(m) + ket4(n)) / std::sqrt(2.0)).eval(); };
        auto kety = [&](int m, int n) {
            return ((ket4(m) + cxd(0, 1) * ket4(n)) / std::sqrt(2.0)).eval();
        };
        auto proj = [](const Eigen::VectorXcd& v) { return Matrix(v * v.adjoint()); };
        std::vector<Matrix> A = {proj(ket4(1)),     proj(ket4(2)),     proj(ket4(4)),
                                 proj(ketx(1, 2)),  proj(kety(1, 2)),  proj(ketx(1, 4)),
                                 proj(kety(1, 4)),  proj(ketx(2, 4)),  proj(kety(2, 4))};
        std::vector<Matrix> B = {proj(ket4(1)),     proj(ket4(2)),    proj(ket4(4)),
                                 proj(ketx(1, 2)),  proj(kety(2, 4)), proj(kety(1, 4))};
        std::vector<Matrix> C = {proj(ket4(1)), proj(ket4(2)), proj(ketx(1, 2)), proj(kety(1, 2))};

        SpanReport ra = span_report(A), rb = span_report(B), rc = span_report(C);
        const SystemType t4{"d", 4};
        auto chkF = filter_nonflatten_check(A, Subspace::computational(t4, {1, 2}));
        Subspace g_sub(t4, {ket4(1), (ket4(2) + ket4(3)) / std::sqrt(2.0)});
        auto chkG = filter_nonflatten_check(C, g_sub);

        detail = "A: support " + std::to_string(ra.support_dim) + " span " +
                 std::to_string(ra.span_dim) + "; B span " + std::to_string(rb.span_dim) +
                 "; C span " + std::to_string(rc.span_dim) + "; A|F span " +
                 std::to_string(chkF.after.span_dim) + "; C|G span " +
                 std::to_string(chkG.after.span_dim);
        return ra.support_dim == 3 && ra.span_dim == 9 && ra.nonflat && rb.span_dim == 6 &&
               !rb.nonflat && rc.span_dim == 4 && rc.nonflat && chkF.after.span_dim == 4 &&
               chkF.after.nonflat && chkG.after.span_dim == 4 && chkG.after.nonflat;
    });

    // 11 ------------------------------------------------------------------
    h.run("randomized non-flattening suite (50x20 per dim 3..5)", [&](std::string& detail) {
        int failures = 0;
        for (int dim : {3, 4, 5}) failures += nonflatten_suite(dim, 50, 20, 11 * dim);
        detail = std::to_string(failures) + " flattening events in 3000 trials";
        return failures == 0;
    });

    // 12 ------------------------------------------------------------------
    h.run("multiplicative-function search keeps only uniform exponents", [&](std::string& detail) {
        KNReport rep = k_multiplicative_search(30, 3);
        bool uniform = true;
        std::set<int> rs;
        for (const auto& a : rep.survivors) {
            const int r0 = a.begin()->second;
            for (const auto& [p, r] : a) uniform &= (r == r0);
            rs.insert(r0);
        }
        detail = std::to_string(rep.survivors.size()) + " survivors";
        return uniform && rep.survivors.size() == 3 && rs == std::set<int>{1, 2, 3};
    });

    // 13 ------------------------------------------------------------------
    h.run("signature vectors for K = N^r, r = 1..4", [&](std::string& detail) {
        const std::vector<std::vector<long long>> want = {
            {1, 0, 0, 0}, {1, 2, 0, 0}, {1, 6, 6, 0}, {1, 14, 36, 24}};
        for (int r = 1; r <= 4; ++r)
            if (signature_vector(r, 4) != want[r - 1]) {
                detail = "mismatch at r = " + std::to_string(r);
                return false;
            }
        detail = "(1,0,0,0) (1,2,0,0) (1,6,6,0) (1,14,36,24)";
        return true;
    });

    // 14 ------------------------------------------------------------------
    h.run("complete-set synthesis on 20 random targets", [&](std::string& detail) {
        double worst_orth = 0.0, worst_rec = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            auto targets = sample_complete_set(qubit, qubit, 1 + trial % 3, 14000 + trial);
            SynthesisReport rep = magic_complete_set(targets, qubit, qubit);
            worst_orth = std::max(worst_orth, rep.orthonormality_deviation);
            worst_rec = std::max(worst_rec, rep.reconstruction_deviation);
        }
        detail = "orthonormality " + fmt(worst_orth) + ", reconstruction " + fmt(worst_rec);
        return worst_orth <= 1e-9 && worst_rec <= 1e-8;
    });

    // 15 ------------------------------------------------------------------
    h.run("shipped teleport document end to end", [&](std::string& detail) {
        std::ifstream in(circuits + "/teleport.qc");
        if (!in) {
            detail = "cannot open " + circuits + "/teleport.qc";
            return false;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        const std::string text = ss.str();
        dsl::ParseResult res = dsl::parse(text);
        if (!res.ok()) {
            detail = "parse failed";
            return false;
        }
        std::ostringstream out;
        if (dsl::run(res.doc, circuits, {}, out) != 0) {
            detail = "run failed";
            return false;
        }
        const double value = std::stod(out.str());
        const bool round_trip = dsl::pretty(res.doc) == text &&
                                dsl::parse(dsl::pretty(res.doc)).doc == res.doc;
        dsl::ResolvedDocument r = dsl::resolve(res.doc, circuits);
        const bool dot_static = dsl::emit_dot(r.graph) == dsl::emit_dot(r.graph);
        detail = "value " + out.str().substr(0, out.str().size() - 1) +
                 (round_trip ? ", round trip ok" : ", ROUND TRIP BROKEN");
        return std::abs(value - 0.125) <= 1e-9 && round_trip && dot_static;
    });

    std::printf("acceptance: %d/%d criteria passed\n", h.index - h.failures, h.index);
    return h.failures == 0 ? 0 : 1;
}
