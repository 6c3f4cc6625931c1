// SPDX-License-Identifier: Apache-2.0
// opc — command-line front end: evaluate circuit documents, check physicality
// directives, compare operators, run the built-in demos, render dot diagrams.

#include <CLI11.hpp>

#include <fstream>
#include <random>
#include <iostream>
#include <sstream>

#include "opcircuits/dsl.hpp"
#include "opcircuits/duotensor.hpp"
#include "opcircuits/gadgets.hpp"
#include "opcircuits/reconstruction.hpp"

namespace {

using namespace opc;

std::string dirname_of(const std::string& path) {
    const auto k = path.find_last_of('/');
    return k == std::string::npos ? std::string(".") : path.substr(0, k);
}

int load_document(const std::string& path, dsl::CircuitDocument& doc) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open '" << path << "'\n";
        return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    dsl::ParseResult res = dsl::parse(ss.str());
    if (!res.ok()) {
        for (const auto& d : res.diagnostics)
            std::cerr << path << ":" << d.line << ":" << d.col << ": " << d.message << "\n";
        return 2;
    }
    doc = std::move(res.doc);
    return 0;
}

ContractionOrder order_of(const std::string& name) {
    if (name == "greedy") return ContractionOrder::Greedy;
    if (name == "optimal") return ContractionOrder::Optimal;
    if (name == "naive") return ContractionOrder::Naive;
    return ContractionOrder::Auto;
}

int cmd_eval(const std::string& file, const dsl::RunOptions& opts) {
    dsl::CircuitDocument doc;
    if (int rc = load_document(file, doc)) return rc;
    dsl::ResolvedDocument r = dsl::resolve(doc, dirname_of(file));
    if (!r.ok()) {
        for (const auto& d : r.diagnostics) std::cerr << "error: " << d.message << "\n";
        return 1;
    }
    try {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12f", eval_circuit(r.graph, r.payloads, opts.order));
        std::cout << buf << "\n";
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_check(const std::string& file, const dsl::RunOptions& opts) {
    dsl::CircuitDocument doc;
    if (int rc = load_document(file, doc)) return rc;
    return dsl::run(doc, dirname_of(file), opts, std::cout);
}

int cmd_ratio(const std::string& file, const std::string& a, const std::string& b,
              const dsl::RunOptions& opts) {
    dsl::CircuitDocument doc;
    if (int rc = load_document(file, doc)) return rc;
    dsl::ResolvedDocument r = dsl::resolve(doc, dirname_of(file));
    if (!r.ok()) {
        for (const auto& d : r.diagnostics) std::cerr << "error: " << d.message << "\n";
        return 1;
    }
    auto ia = r.operators.find(a);
    auto ib = r.operators.find(b);
    if (ia == r.operators.end() || ib == r.operators.end()) {
        std::cerr << "error: unknown operator name\n";
        return 1;
    }
    try {
        RatioVerdict v = probability_ratio(ia->second, ib->second, opts.tol);
        if (v.well_conditioned)
            std::cout << "well-conditioned, k = " << dsl::format_number(*v.ratio) << "\n";
        else
            std::cout << "not well-conditioned\n";
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_render(const std::string& file, const std::string& out_path) {
    dsl::CircuitDocument doc;
    if (int rc = load_document(file, doc)) return rc;
    dsl::ResolvedDocument r = dsl::resolve(doc, dirname_of(file));
    if (!r.ok()) {
        for (const auto& d : r.diagnostics) std::cerr << "error: " << d.message << "\n";
        return 1;
    }
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "error: cannot write '" << out_path << "'\n";
        return 2;
    }
    out << dsl::emit_dot(r.graph);
    std::cout << "rendered " << out_path << "\n";
    return 0;
}

int demo_teleport(std::uint64_t seed) {
    TeleportReport rep = teleportation_demo();
    std::cout << "equatorial resource angle: " << dsl::format_number(rep.equator_angle) << "\n";
    std::cout << "channel / identity ratio:  " << dsl::format_number(rep.ratio) << "\n";
    std::cout << "deviation from (1/8) id:   " << dsl::format_number(rep.deviation) << "\n";
    auto [graph, payloads] = teleport_circuit();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12f", eval_circuit(graph, payloads));
    std::cout << "closed-circuit value:      " << buf << "\n";

    // the constant holds for arbitrary matched input/effect pairs
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    bool sampled_ok = true;
    for (int trial = 0; trial < 5; ++trial) {
        double x = normal(rng), y = normal(rng), z = normal(rng);
        const double n = std::sqrt(x * x + y * y + z * z);
        auto [g, p] = teleport_circuit(BlochPoint(x / n, y / n, z / n));
        sampled_ok &= std::abs(eval_circuit(g, p) - 0.125) <= 1e-9;
    }
    std::cout << "5 sampled inputs at 1/8:   " << (sampled_ok ? "yes" : "NO") << "\n";
    const bool ok = rep.verdict && sampled_ok;
    std::cout << (ok ? "teleportation verdict: PASS" : "teleportation verdict: FAIL") << "\n";
    return ok ? 0 : 1;
}

int demo_swap() {
    SwapReport rep = entanglement_swap_demo();
    std::cout << "equatorial resource angle: " << dsl::format_number(rep.equator_angle) << "\n";
    std::cout << "prep / canonical-M ratio:  " << dsl::format_number(rep.ratio) << "\n";
    std::cout << "deviation from (1/8) M:    " << dsl::format_number(rep.deviation) << "\n";
    std::cout << (rep.verdict ? "swap verdict: PASS" : "swap verdict: FAIL") << "\n";
    return rep.verdict ? 0 : 1;
}

int demo_prelude() {
    // span analysis of three dim-4 state sets and two filters
    const int N = 4;
    auto ket = [&](int n) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(N);
        v(n - 1) = 1.0;
        return v;
    };
    auto ketx = [&](int m, int n) { return ((ket(m) + ket(n)) / std::sqrt(2.0)).eval(); };
    auto kety = [&](int m, int n) { return ((ket(m) + cxd(0, 1) * ket(n)) / std::sqrt(2.0)).eval(); };
    auto proj = [](const Eigen::VectorXcd& v) { return Matrix(v * v.adjoint()); };

    std::vector<Matrix> A = {proj(ket(1)),      proj(ket(2)),      proj(ket(4)),
                             proj(ketx(1, 2)),  proj(kety(1, 2)),  proj(ketx(1, 4)),
                             proj(kety(1, 4)),  proj(ketx(2, 4)),  proj(kety(2, 4))};
    std::vector<Matrix> B = {proj(ket(1)),     proj(ket(2)),     proj(ket(4)),
                             proj(ketx(1, 2)), proj(kety(2, 4)), proj(kety(1, 4))};
    std::vector<Matrix> C = {proj(ket(1)), proj(ket(2)), proj(ketx(1, 2)), proj(kety(1, 2))};

    auto show = [](const char* name, const SpanReport& r) {
        std::cout << name << ": states " << r.input_count << ", support " << r.support_dim
                  << ", span " << r.span_dim << ", " << (r.nonflat ? "non-flat" : "flat") << "\n";
    };
    const SystemType t4{"d4", 4};
    show("set A", span_report(A));
    show("set B", span_report(B));
    show("set C", span_report(C));

    auto chkF = filter_nonflatten_check(A, Subspace::computational(t4, {1, 2}));
    show("A through F (span |1>,|2>)", chkF.after);
    Subspace g_sub(t4, {ket(1), ketx(2, 3)});
    auto chkG = filter_nonflatten_check(C, g_sub);
    show("C through G (span |1>,|23x>)", chkG.after);
    std::cout << ((chkF.verdict && chkG.verdict) ? "non-flattening verdict: PASS"
                                                 : "non-flattening verdict: FAIL")
              << "\n";
    return chkF.verdict && chkG.verdict ? 0 : 1;
}

int demo_kn() {
    KNReport rep = k_multiplicative_search(30, 3);
    std::cout << "K(N) candidates with K(p) = p^r_p, p <= 30, r_p <= 3, strictly increasing on [1,30]:\n";
    for (const auto& a : rep.survivors) {
        bool uniform = true;
        int r0 = a.begin()->second;
        for (const auto& [p, r] : a) uniform &= (r == r0);
        std::cout << "  survivor: r = " << r0 << (uniform ? " (uniform)" : " (mixed!)") << "\n";
    }
    std::cout << rep.survivors.size() << " survivors\n";
    return 0;
}

int demo_signature() {
    for (int r = 1; r <= 4; ++r) {
        auto x = signature_vector(r, 4);
        std::cout << "K = N^" << r << ": signature (";
        for (std::size_t k = 0; k < x.size(); ++k) std::cout << (k ? ", " : "") << x[k];
        std::cout << ")\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"operator-circuit engine for finite-dimensional quantum theory"};
    app.require_subcommand(1);

    std::string file, out_path = "circuit.dot", op_a, op_b, which;
    std::string order = "auto";
    double tol = 1e-8;
    std::uint64_t seed = 0;
    app.add_option("--tol", tol, "proportionality tolerance for ratio checks");
    app.add_option("--seed", seed, "seed for randomized demos");
    app.add_option("--order", order, "contraction order: greedy|optimal|naive")
        ->check(CLI::IsMember({"auto", "greedy", "optimal", "naive"}));

    auto* eval = app.add_subcommand("eval", "evaluate the circuit in FILE");
    eval->add_option("FILE", file)->required();
    auto* check = app.add_subcommand("check", "run all directives in FILE");
    check->add_option("FILE", file)->required();
    auto* ratio = app.add_subcommand("ratio", "proportionality of two named operators");
    ratio->add_option("FILE", file)->required();
    ratio->add_option("A", op_a)->required();
    ratio->add_option("B", op_b)->required();
    auto* demo = app.add_subcommand("demo", "run a built-in demonstration");
    demo->add_option("NAME", which, "teleport|swap|prelude|kn|signature")->required();
    auto* render = app.add_subcommand("render", "write a dot diagram for FILE");
    render->add_option("FILE", file)->required();
    render->add_option("-o,--output", out_path, "output path");

    CLI11_PARSE(app, argc, argv);

    dsl::RunOptions opts;
    opts.order = order_of(order);
    opts.tol = tol;

    try {
        if (eval->parsed()) return cmd_eval(file, opts);
        if (check->parsed()) return cmd_check(file, opts);
        if (ratio->parsed()) return cmd_ratio(file, op_a, op_b, opts);
        if (render->parsed()) return cmd_render(file, out_path);
        if (demo->parsed()) {
            if (which == "teleport") return demo_teleport(seed);
            if (which == "swap") return demo_swap();
            if (which == "prelude") return demo_prelude();
            if (which == "kn") return demo_kn();
            if (which == "signature") return demo_signature();
            std::cerr << "error: unknown demo '" << which << "'\n";
            return 2;
        }
    } catch (const opc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
