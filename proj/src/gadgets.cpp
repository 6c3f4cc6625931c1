// SPDX-License-Identifier: Apache-2.0

#include "opcircuits/gadgets.hpp"

#include <cmath>
#include <numbers>

namespace opc {

SystemType qubit_type() { return SystemType{"q", 2}; }

// ----------------------------------- Subspace -------------------------------

Subspace::Subspace(SystemType parent_type, std::vector<Eigen::VectorXcd> vectors)
    : parent(std::move(parent_type)), basis(std::move(vectors)) {
    if (basis.empty() || basis.size() > static_cast<std::size_t>(parent.dim))
        throw Error("Subspace: need 1 <= k <= N basis vectors");
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (basis[i].size() != parent.dim) throw DimMismatch("Subspace: vector dim mismatch");
        for (std::size_t j = 0; j <= i; ++j) {
            const cxd g = basis[j].adjoint() * basis[i];
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(g - want) > 1e-12)
                throw Error("Subspace: basis is not orthonormal (Gram deviation)");
        }
    }
}

Subspace Subspace::computational(const SystemType& t, const std::vector<int>& indices) {
    std::vector<Eigen::VectorXcd> vs;
    for (int n : indices) {
        if (n < 1 || n > t.dim) throw Error("Subspace: basis index out of range");
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(t.dim);
        v(n - 1) = 1.0;
        vs.push_back(v);
    }
    return Subspace(t, std::move(vs));
}

Matrix Subspace::projector() const {
    Matrix p = Matrix::Zero(parent.dim, parent.dim);
    for (const auto& v : basis) p += v * v.adjoint();
    return p;
}

BlochPoint::BlochPoint(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
    if (std::abs(x * x + y * y + z * z - 1.0) > 1e-12)
        throw NotNormalized("BlochPoint: vector is not unit length");
}

PermutationSpec PermutationSpec::computational(const SystemType& t,
                                               const std::vector<int>& perm_one_based) {
    PermutationSpec spec;
    for (int n = 0; n < t.dim; ++n) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(t.dim);
        v(n) = 1.0;
        spec.domain.push_back(v);
        spec.image.push_back(v);
    }
    for (int p : perm_one_based) spec.perm.push_back(p - 1);
    return spec;
}

// ----------------------------------- factories ------------------------------

OperatorFragment filter_fragment(const Subspace& s) {
    return operator_from_kraus({s.projector()}, s.parent, s.parent);
}

OperatorFragment permutation_fragment(const PermutationSpec& spec) {
    const std::size_t n = spec.domain.size();
    if (spec.image.size() != n || spec.perm.size() != n)
        throw Error("permutation_fragment: domain/image/perm sizes differ");
    std::vector<bool> hit(n, false);
    for (int p : spec.perm) {
        if (p < 0 || static_cast<std::size_t>(p) >= n || hit[p])
            throw Error("permutation_fragment: perm is not a bijection");
        hit[p] = true;
    }
    const int dim = static_cast<int>(spec.domain[0].size());
    Matrix U = Matrix::Zero(dim, dim);
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = spec.phases.empty() ? 0.0 : spec.phases[k];
        U += std::exp(cxd(0.0, theta)) * spec.image[spec.perm[k]] * spec.domain[k].adjoint();
    }
    const SystemType t{"d" + std::to_string(dim), dim};
    return operator_from_kraus({U}, t, t);
}

OperatorFragment cnot_fragment() {
    // 11->11, 12->12, 21->22, 22->21 on the two-qubit computational basis
    const SystemType qq{"qq", 4};
    PermutationSpec spec = PermutationSpec::computational(qq, {1, 2, 4, 3});
    OperatorFragment two = permutation_fragment(spec);
    // reshape the single 4-dim leg into two qubit legs on each side
    const SystemType q = qubit_type();
    return OperatorFragment::make({q, q}, {q, q}, two.op().matrix());
}

OperatorFragment max_entangled(Role role) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(0) = 1.0 / std::sqrt(2.0);  // |11>
    v(3) = 1.0 / std::sqrt(2.0);  // |22>
    Matrix m = v * v.adjoint();
    const SystemType q = qubit_type();
    if (role == Role::Preparation) return OperatorFragment::make({}, {q, q}, m);
    return OperatorFragment::make({q, q}, {}, m);
}

OperatorFragment bloch_state(const BlochPoint& p, Role role) {
    Matrix m(2, 2);
    m(0, 0) = 0.5 * (1.0 + p.z);
    m(1, 1) = 0.5 * (1.0 - p.z);
    m(0, 1) = 0.5 * cxd(p.x, -p.y);
    m(1, 0) = 0.5 * cxd(p.x, p.y);
    const SystemType q = qubit_type();
    return role == Role::Preparation ? OperatorFragment::preparation(q, m)
                                     : OperatorFragment::result(q, m);
}

OperatorFragment identity_channel(const SystemType& t) {
    return operator_from_kraus({Matrix::Identity(t.dim, t.dim)}, t, t);
}

// ------------------------------ teleportation -------------------------------

namespace {

// The one-in/one-out teleportation fragment for a given equatorial resource
// angle: resource pair, inverse cnot, canonical entangled effect closed with
// the equatorial state, and a computational effect on the leftover wire.
OperatorFragment teleport_channel(double angle) {
    OperatorFragment bprep = bloch_state(BlochPoint(std::cos(angle), std::sin(angle), 0.0),
                                         Role::Preparation);
    OperatorFragment meff = max_entangled(Role::Result).with_prefix("me:");
    // close the entangled effect's first input with the equatorial state
    OperatorFragment beff = contract(bprep.with_prefix("b:"), meff, {{1, 1}});

    OperatorFragment cnot = cnot_fragment().with_prefix("cn:");
    OperatorFragment one = bloch_state(BlochPoint(0.0, 0.0, 1.0), Role::Result).with_prefix("one:");
    OperatorFragment resource = max_entangled(Role::Preparation).with_prefix("res:");

    OperatorFragment t1 = contract(cnot, beff, {{1, 1}});  // inputs (x, r1); output p2
    OperatorFragment t2 = contract(t1, one, {{1, 1}});     // inputs (x, r1); no outputs
    // resource output 1 feeds the second input; output 2 is the teleported qubit
    return contract(resource, t2, {{1, 2}});
}

double max_abs_dev(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TeleportReport teleportation_demo() {
    const OperatorFragment id_chan = identity_channel(qubit_type());
    auto mismatch = [&](double angle) {
        OperatorFragment ch = teleport_channel(angle);
        const double scale = std::sqrt(ch.op().matrix().cwiseAbs2().sum());
        RatioVerdict rv = probability_ratio(ch, id_chan, 1e30);  // always returns k
        const double k = rv.ratio.value_or(0.0);
        return std::sqrt((ch.op().matrix() - k * id_chan.op().matrix()).cwiseAbs2().sum()) /
               (scale > 0.0 ? scale : 1.0);
    };

    // coarse grid over the equator
    const double two_pi = 2.0 * std::numbers::pi;
    double best_angle = 0.0, best = std::numeric_limits<double>::max();
    for (int k = 0; k < 360; ++k) {
        const double a = two_pi * k / 360.0;
        const double m = mismatch(a);
        if (m < best) {
            best = m;
            best_angle = a;
        }
    }
    // golden-section refinement around the winning grid cell
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = best_angle - two_pi / 360.0, hi = best_angle + two_pi / 360.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = mismatch(c), fd = mismatch(d);
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = mismatch(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = mismatch(d);
        }
    }
    best_angle = (lo + hi) / 2.0;

    TeleportReport rep{teleport_channel(best_angle)};
    rep.equator_angle = best_angle;
    rep.deviation = max_abs_dev(rep.channel.op().matrix(), 0.125 * id_chan.op().matrix());
    RatioVerdict rv = probability_ratio(rep.channel, id_chan, 1e-8);
    rep.ratio = rv.ratio.value_or(0.0);
    rep.verdict = rv.well_conditioned && rep.deviation <= 1e-9;
    return rep;
}

SwapReport entanglement_swap_demo() {
    const double angle = teleportation_demo().equator_angle;

    OperatorFragment ml = max_entangled(Role::Preparation).with_prefix("ml:");
    OperatorFragment mr = max_entangled(Role::Preparation).with_prefix("mr:");
    OperatorFragment cnot = cnot_fragment().with_prefix("cn:");
    OperatorFragment bprep =
        bloch_state(BlochPoint(std::cos(angle), std::sin(angle), 0.0), Role::Preparation);
    OperatorFragment beff =
        contract(bprep.with_prefix("b:"), max_entangled(Role::Result).with_prefix("me:"), {{1, 1}});
    OperatorFragment one = bloch_state(BlochPoint(0.0, 0.0, 1.0), Role::Result).with_prefix("one:");

    // cnot inputs: (mr out1, ml out2); outputs -> (entangled effect, |1> effect)
    OperatorFragment t1 = contract(cnot, beff, {{1, 1}});
    OperatorFragment t2 = contract(t1, one, {{1, 1}});
    OperatorFragment t3 = contract(mr, t2, {{1, 1}});   // leaves mr out2 open
    OperatorFragment prep = contract(ml, t3, {{2, 1}});  // leaves ml out1, mr out2 open

    SwapReport rep{prep};
    rep.equator_angle = angle;
    const OperatorFragment target = max_entangled(Role::Preparation);
    rep.deviation = max_abs_dev(prep.op().matrix(), 0.125 * target.op().matrix());
    RatioVerdict rv = probability_ratio(prep, target, 1e-8);
    rep.ratio = rv.ratio.value_or(0.0);
    rep.verdict = rv.well_conditioned && rep.deviation <= 1e-9;
    return rep;
}

std::pair<WireGraph, std::map<std::string, OperatorFragment>> teleport_circuit(const BlochPoint& input) {
    const double angle = 0.0;  // the canonical equatorial resource state
    const SystemType q = qubit_type();

    WireGraph g;
    g.add_node({"in", {}, {q}, "psi"});
    g.add_node({"res", {}, {q, q}, "maxent"});
    g.add_node({"cn", {q, q}, {q, q}, "cnot"});
    g.add_node({"b", {}, {q}, "equator"});
    g.add_node({"meas", {q, q}, {}, "maxent_effect"});
    g.add_node({"one", {q}, {}, "one_effect"});
    g.add_node({"out", {q}, {}, "psi_effect"});
    g.add_wire({"in", 1, "cn", 1});
    g.add_wire({"res", 1, "cn", 2});
    g.add_wire({"res", 2, "out", 1});
    g.add_wire({"b", 1, "meas", 1});
    g.add_wire({"cn", 1, "meas", 2});
    g.add_wire({"cn", 2, "one", 1});

    std::map<std::string, OperatorFragment> payloads;
    payloads.emplace("in", bloch_state(input, Role::Preparation));
    payloads.emplace("res", max_entangled(Role::Preparation));
    payloads.emplace("cn", cnot_fragment());
    payloads.emplace("b", bloch_state(BlochPoint(std::cos(angle), std::sin(angle), 0.0),
                                      Role::Preparation));
    payloads.emplace("meas", max_entangled(Role::Result));
    payloads.emplace("one", bloch_state(BlochPoint(0.0, 0.0, 1.0), Role::Result));
    payloads.emplace("out", bloch_state(input, Role::Result));
    return {std::move(g), std::move(payloads)};
}

// ------------------------------ complete-set synthesis ----------------------

SynthesisReport magic_complete_set(const std::vector<OperatorFragment>& targets,
                                   const SystemType& in_type, const SystemType& out_type) {
    if (!is_complete_set(targets)) throw NotComplete("magic_complete_set: targets are not complete");

    std::vector<std::vector<Matrix>> kraus;
    std::size_t max_terms = 0;
    for (const auto& t : targets) {
        kraus.push_back(kraus_decompose(t));
        max_terms = std::max(max_terms, kraus.back().size());
    }

    const int L = static_cast<int>(targets.size());
    const int nd = static_cast<int>(std::max<std::size_t>(max_terms, 1));
    const int din = in_type.dim;
    const int dout = out_type.dim;

    // isometry columns |v[n]> = sum_{li} E[l,i] |u[n]> |l> |i>, factor order (b, c, d)
    Matrix V = Matrix::Zero(dout * L * nd, din);
    for (int n = 0; n < din; ++n) {
        for (int l = 0; l < L; ++l) {
            for (std::size_t i = 0; i < kraus[l].size(); ++i) {
                const Eigen::VectorXcd col = kraus[l][i].col(n);
                for (int o = 0; o < dout; ++o)
                    V(o * L * nd + l * nd + static_cast<int>(i), n) += col(o);
            }
        }
    }

    SynthesisReport rep;
    rep.outcome_count = L;
    rep.outcome_ancilla_dim = L;
    rep.kraus_ancilla_dim = nd;
    rep.orthonormality_deviation =
        (V.adjoint() * V - Matrix::Identity(din, din)).cwiseAbs().maxCoeff();
    if (rep.orthonormality_deviation > 1e-9)
        throw OrthonormalityFailure("magic_complete_set: isometry columns deviate by " +
                                    std::to_string(rep.orthonormality_deviation));

    // Condition on ancilla outcome l, trace the Kraus ancilla: the slices
    // <l,i| V are Kraus terms of the reconstructed channel.
    rep.reconstruction_deviation = 0.0;
    for (int l = 0; l < L; ++l) {
        std::vector<Matrix> terms;
        for (int i = 0; i < nd; ++i) {
            Matrix E(dout, din);
            for (int o = 0; o < dout; ++o) E.row(o) = V.row(o * L * nd + l * nd + i);
            terms.push_back(std::move(E));
        }
        OperatorFragment rec = operator_from_kraus(terms, in_type, out_type);
        rep.reconstruction_deviation =
            std::max(rep.reconstruction_deviation,
                     (rec.op().matrix() - targets[l].op().matrix()).cwiseAbs().maxCoeff());
        rep.reconstructed.push_back(std::move(rec));
    }
    rep.verdict = rep.reconstruction_deviation <= 1e-8;
    return rep;
}

}  // namespace opc
