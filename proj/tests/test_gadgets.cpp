// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numbers>
#include <random>

#include "opcircuits/gadgets.hpp"
#include "test_util.hpp"

using namespace opc;
using testutil::max_abs_diff;

namespace {

const SystemType q{"q", 2};

Matrix basis_proj(int dim, int k) {
    Matrix m = Matrix::Zero(dim, dim);
    m(k, k) = 1.0;
    return m;
}

Matrix plus_state() {
    Matrix m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    return m;
}

DenseHermitian on_space(const Matrix& m) {
    return DenseHermitian(LabeledSpace({{"s", static_cast<int>(m.rows())}}), m);
}

Eigen::VectorXcd ket4(int n) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(n - 1) = 1.0;
    return v;
}

}  // namespace

TEST_CASE("filters: identity on the full space, projection arithmetic") {
    const SystemType t4{"d", 4};
    OperatorFragment full = filter_fragment(Subspace::computational(t4, {1, 2, 3, 4}));
    CHECK(max_abs_diff(full.op().matrix(), identity_channel(t4).op().matrix()) < 1e-13);

    // qubit filter onto the first basis state sends |+><+| to half that state
    OperatorFragment f = filter_fragment(Subspace::computational(q, {1}));
    DenseHermitian out = apply_channel(f, on_space(plus_state()));
    CHECK(max_abs_diff(out.matrix(), 0.5 * basis_proj(2, 0)) < 1e-13);

    PhysicalityReport rep = is_physical(f);
    CHECK(rep.verdict);
    CHECK(rep.trace_condition_slack >= -1e-12);

    // filter after the same filter changes nothing
    OperatorFragment ff = contract(f.with_prefix("a:"), f.with_prefix("b:"), {{1, 1}});
    CHECK(max_abs_diff(ff.op().matrix(), f.op().matrix()) < 1e-11);
}

TEST_CASE("a dim-4 rank-two filter maps the nine-state set as expected") {
    const SystemType t4{"d", 4};
    auto ketx = [&](int m, int n) { return ((ket4(m) + ket4(n)) / std::sqrt(2.0)).eval(); };
    auto kety = [&](int m, int n) {
        return ((ket4(m) + cxd(0, 1) * ket4(n)) / std::sqrt(2.0)).eval();
    };
    auto proj = [](const Eigen::VectorXcd& v) { return Matrix(v * v.adjoint()); };

    std::vector<Matrix> setA = {proj(ket4(1)),     proj(ket4(2)),     proj(ket4(4)),
                                proj(ketx(1, 2)),  proj(kety(1, 2)),  proj(ketx(1, 4)),
                                proj(kety(1, 4)),  proj(ketx(2, 4)),  proj(kety(2, 4))};
    // the filtered images: rho1, rho2, 0, rho12x, rho12y, rho1/2 (twice), rho2/2 (twice)
    std::vector<Matrix> want = {proj(ket4(1)),          proj(ket4(2)),          Matrix::Zero(4, 4),
                                proj(ketx(1, 2)),       proj(kety(1, 2)),       0.5 * proj(ket4(1)),
                                0.5 * proj(ket4(1)),    0.5 * proj(ket4(2)),    0.5 * proj(ket4(2))};

    OperatorFragment f = filter_fragment(Subspace::computational(t4, {1, 2}));
    for (std::size_t k = 0; k < setA.size(); ++k) {
        DenseHermitian out = apply_channel(f, DenseHermitian(LabeledSpace({{"s", 4}}), setA[k]));
        CHECK(max_abs_diff(out.matrix(), want[k]) < 1e-13);
    }
}

TEST_CASE("permutation channels: identity, swap, reversibility") {
    PermutationSpec ident = PermutationSpec::computational(q, {1, 2});
    CHECK(max_abs_diff(permutation_fragment(ident).op().matrix(),
                       identity_channel(q).op().matrix()) < 1e-13);

    // the two-element swap is the X gate channel
    PermutationSpec swap = PermutationSpec::computational(q, {2, 1});
    OperatorFragment x = permutation_fragment(swap);
    DenseHermitian out = apply_channel(x, on_space(basis_proj(2, 0)));
    CHECK(max_abs_diff(out.matrix(), basis_proj(2, 1)) < 1e-13);

    // composing with the inverse spec yields the identity channel
    std::mt19937_64 rng(401);
    PermutationSpec spec = PermutationSpec::computational(SystemType{"t", 3}, {2, 3, 1});
    spec.phases = {0.3, -1.1, 2.0};
    PermutationSpec inv = spec;
    inv.perm = {2, 0, 1};            // the inverse bijection
    inv.phases = {-2.0, -0.3, 1.1};  // phi[n] = -theta[perm^-1(n)]
    OperatorFragment fwd = permutation_fragment(spec).with_prefix("f:");
    OperatorFragment bwd = permutation_fragment(inv).with_prefix("b:");
    OperatorFragment round = contract(fwd, bwd, {{1, 1}});
    const SystemType t3{"d3", 3};
    CHECK(max_abs_diff(round.op().matrix(), identity_channel(t3).op().matrix()) < 1e-10);
}

TEST_CASE("cnot: permutation action, self-inverse, canonical state") {
    OperatorFragment cn = cnot_fragment();

    // matches the permutation built on the joint computational basis
    const SystemType qq{"qq", 4};
    OperatorFragment perm = permutation_fragment(PermutationSpec::computational(qq, {1, 2, 4, 3}));
    CHECK(max_abs_diff(cn.op().matrix(), perm.op().matrix()) == 0.0);

    // permutation action on 21 (second basis state of the control)
    Matrix in21 = testutil::naive_kron(basis_proj(2, 1), basis_proj(2, 0));
    DenseHermitian out = apply_channel(OperatorFragment::channel(qq, qq, cn.op().matrix()),
                                       DenseHermitian(LabeledSpace({{"s", 4}}), in21));
    CHECK(max_abs_diff(out.matrix(), testutil::naive_kron(basis_proj(2, 1), basis_proj(2, 1))) <
          1e-13);

    // applying it twice is the identity
    OperatorFragment twice =
        contract(cn.with_prefix("a:"), cnot_fragment().with_prefix("b:"), {{1, 1}, {2, 2}});
    const SystemType q2{"q", 2};
    OperatorFragment id2 = operator_from_kraus({Matrix::Identity(4, 4)}, qq, qq);
    CHECK(max_abs_diff(twice.op().matrix(),
                       OperatorFragment::make({q2, q2}, {q2, q2}, id2.op().matrix()).op().matrix()) <
          1e-12);

    // |+> (x) |1> through the gate is the canonical entangled state
    Matrix in = testutil::naive_kron(plus_state(), basis_proj(2, 0));
    DenseHermitian ent = apply_channel(OperatorFragment::channel(qq, qq, cn.op().matrix()),
                                       DenseHermitian(LabeledSpace({{"s", 4}}), in));
    CHECK(max_abs_diff(ent.matrix(), max_entangled(Role::Preparation).op().matrix()) < 1e-13);
}

TEST_CASE("canonical entangled pair: closure values and correlations") {
    OperatorFragment prep = max_entangled(Role::Preparation).with_prefix("p:");
    OperatorFragment eff = max_entangled(Role::Result).with_prefix("e:");
    CHECK(contract(prep, eff, {{1, 1}, {2, 2}}).scalar_value() ==
          doctest::Approx(1.0).epsilon(1e-12));

    // Prob(M, U[m] x U[n]) = delta_mn / 2
    for (int m = 0; m < 2; ++m) {
        for (int n = 0; n < 2; ++n) {
            OperatorFragment em = OperatorFragment::result(q, basis_proj(2, m)).with_prefix("m:");
            OperatorFragment en = OperatorFragment::result(q, basis_proj(2, n)).with_prefix("n:");
            const double v =
                contract(contract(prep, em, {{1, 1}}), en, {{1, 1}}).scalar_value();
            CHECK(v == doctest::Approx(m == n ? 0.5 : 0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("Bloch states: inner-product formula and antipodal completeness") {
    auto prob = [](const BlochPoint& u, const BlochPoint& v) {
        OperatorFragment pu = bloch_state(u, Role::Preparation).with_prefix("u:");
        OperatorFragment pv = bloch_state(v, Role::Result).with_prefix("v:");
        return contract(pu, pv, {{1, 1}}).scalar_value();
    };
    CHECK(prob({0, 0, 1}, {0, 0, 1}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prob({0, 0, 1}, {0, 0, -1}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(prob({1, 0, 0}, {0, 0, 1}) == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(402);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_point = [&] {
        double x = normal(rng), y = normal(rng), z = normal(rng);
        const double n = std::sqrt(x * x + y * y + z * z);
        return BlochPoint(x / n, y / n, z / n);
    };
    for (int trial = 0; trial < 25; ++trial) {
        BlochPoint u = random_point(), v = random_point();
        const double want = 0.5 * (1.0 + u.x * v.x + u.y * v.y + u.z * v.z);
        CHECK(prob(u, v) == doctest::Approx(want).epsilon(1e-12));
    }

    // antipodal effects form a complete measurement
    BlochPoint w = random_point();
    CHECK(is_complete_set({bloch_state(w, Role::Result),
                           bloch_state(BlochPoint(-w.x, -w.y, -w.z), Role::Result)}));

    CHECK_THROWS_AS(BlochPoint(1.0, 1.0, 0.0), NotNormalized);
}

TEST_CASE("teleportation: the channel is an eighth of the identity") {
    TeleportReport rep = teleportation_demo();
    CHECK(rep.verdict);
    CHECK(rep.ratio == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(rep.deviation <= 1e-9);

    // closing the fragment with a matched state/effect pair gives 1/8
    auto [graph, payloads] = teleport_circuit();
    CHECK(eval_circuit(graph, payloads) == doctest::Approx(0.125).epsilon(1e-9));

    // orthogonal input/effect give zero through an identity-proportional channel
    auto [g0, p0] = teleport_circuit(BlochPoint(0, 0, 1));
    p0.erase("out");
    p0.emplace("out", bloch_state(BlochPoint(0, 0, -1), Role::Result));
    CHECK(eval_circuit(g0, p0) == doctest::Approx(0.0).epsilon(1e-9));

    // the verdict holds over sampled Bloch inputs, not just computational ones
    std::mt19937_64 rng(403);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        double x = normal(rng), y = normal(rng), z = normal(rng);
        const double n = std::sqrt(x * x + y * y + z * z);
        auto [g, p] = teleport_circuit(BlochPoint(x / n, y / n, z / n));
        CHECK(eval_circuit(g, p) == doctest::Approx(0.125).epsilon(1e-9));
    }
}

TEST_CASE("entanglement swapping: an eighth of the canonical pair") {
    SwapReport rep = entanglement_swap_demo();
    CHECK(rep.verdict);
    CHECK(rep.ratio == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(rep.deviation <= 1e-9);

    // closing with the canonical effect gives 1/8
    OperatorFragment eff = max_entangled(Role::Result).with_prefix("e:");
    CHECK(contract(rep.preparation, eff, {{1, 1}, {2, 2}}).scalar_value() ==
          doctest::Approx(0.125).epsilon(1e-9));

    // mismatatched computational effects give zero
    OperatorFragment e1 = OperatorFragment::result(q, basis_proj(2, 0)).with_prefix("x:");
    OperatorFragment e2 = OperatorFragment::result(q, basis_proj(2, 1)).with_prefix("y:");
    CHECK(contract(contract(rep.preparation, e1, {{1, 1}}), e2, {{1, 1}}).scalar_value() ==
          doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("complete-set synthesis: unitary, PVM, random targets") {
    // a single unitary channel
    std::mt19937_64 rng(404);
    Matrix h = testutil::random_hermitian(2, rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    SynthesisReport rep = magic_complete_set({operator_from_kraus({Matrix(es.eigenvectors())}, q, q)},
                                             q, q);
    CHECK(rep.verdict);
    CHECK(rep.orthonormality_deviation <= 1e-10);
    CHECK(rep.reconstruction_deviation <= 1e-10);

    // the computational PVM as two result fragments
    const SystemType triv{"u", 1};
    std::vector<OperatorFragment> pvm{OperatorFragment::result(q, basis_proj(2, 0)),
                                      OperatorFragment::result(q, basis_proj(2, 1))};
    SynthesisReport rep2 = magic_complete_set(pvm, q, triv);
    CHECK(rep2.verdict);
    CHECK(rep2.reconstruction_deviation <= 1e-10);

    // random complete physical sets
    for (int trial = 0; trial < 10; ++trial) {
        auto targets = sample_complete_set(q, q, 3, 900 + trial);
        SynthesisReport r = magic_complete_set(targets, q, q);
        CHECK(r.orthonormality_deviation <= 1e-9);
        CHECK(r.reconstruction_deviation <= 1e-8);
        CHECK(is_complete_set(r.reconstructed));
    }

    // an incomplete set is rejected
    CHECK_THROWS_AS(magic_complete_set({pvm[0]}, q, triv), NotComplete);
}

// Circuit-level cross-check of the synthesis on a qubit register: swap the
// input onto two register qubits, prepare the first isometry column, swap back
// through the register, then condition on the outcome ancilla.
TEST_CASE("complete-set synthesis agrees with its register-level circuit") {
    auto targets = sample_complete_set(q, q, 2, 905);
    const int L = 2;

    std::vector<std::vector<Matrix>> kraus;
    std::size_t max_terms = 0;
    for (const auto& t : targets) {
        kraus.push_back(kraus_decompose(t));
        max_terms = std::max(max_terms, kraus.back().size());
    }
    const int nd = static_cast<int>(max_terms);
    const int D = 2 * L * nd;  // bcd dimension

    // isometry columns |v[n]> with row order (b, c, d)
    Matrix V = Matrix::Zero(D, 2);
    for (int n = 0; n < 2; ++n)
        for (int l = 0; l < L; ++l)
            for (std::size_t i = 0; i < kraus[l].size(); ++i)
                for (int o = 0; o < 2; ++o)
                    V(o * L * nd + l * nd + static_cast<int>(i), n) += kraus[l][i](o, n);

    // complete {v1, v2} into an orthonormal basis of bcd
    std::vector<Eigen::VectorXcd> w{V.col(0), V.col(1)};
    for (int k = 0; k < D && static_cast<int>(w.size()) < D; ++k) {
        Eigen::VectorXcd cand = Eigen::VectorXcd::Zero(D);
        cand(k) = 1.0;
        for (const auto& u : w) cand -= (u.adjoint() * cand) * u;
        if (cand.norm() > 1e-8) w.push_back(cand.normalized());
    }
    REQUIRE(static_cast<int>(w.size()) == D);

    // register of two qubits as one dim-4 system; |m=1> = |10>, |m=2> = |01>
    const SystemType qq{"qq", 4};
    const SystemType b{"b", 2}, c{"c", L}, d{"d", nd};

    // P on a (x) qq: swap (n=1,m=2) <-> (n=2,m=1), i.e. flats 0*4+1 and 1*4+2
    std::vector<int> perm_p(8);
    for (int k = 0; k < 8; ++k) perm_p[k] = k + 1;
    std::swap(perm_p[1], perm_p[6]);
    const SystemType aq{"aq", 8};
    OperatorFragment P = permutation_fragment(PermutationSpec::computational(aq, perm_p));
    OperatorFragment Pf = OperatorFragment::make({q, qq}, {q, qq}, P.op().matrix()).with_prefix("P:");

    // Q on bcd (x) qq in the completed basis: swap (v1,m=2) <-> (v2,m=1)
    PermutationSpec qspec;
    for (int k = 0; k < D; ++k) {
        for (int m = 0; m < 4; ++m) {
            Eigen::VectorXcd e4 = Eigen::VectorXcd::Zero(4);
            e4(m) = 1.0;
            Eigen::VectorXcd prod(D * 4);
            for (int r = 0; r < D; ++r)
                for (int s = 0; s < 4; ++s) prod(r * 4 + s) = w[k](r) * e4(s);
            qspec.domain.push_back(prod);
            qspec.image.push_back(prod);
        }
    }
    qspec.perm.resize(D * 4);
    for (int k = 0; k < D * 4; ++k) qspec.perm[k] = k;
    std::swap(qspec.perm[0 * 4 + 1], qspec.perm[1 * 4 + 2]);
    OperatorFragment Q = permutation_fragment(qspec);
    OperatorFragment Qf =
        OperatorFragment::make({b, c, d, qq}, {b, c, d, qq}, Q.op().matrix()).with_prefix("Q:");

    Matrix reg1 = Matrix::Zero(4, 4);
    reg1(2, 2) = 1.0;  // |10><10|, the m=1 register state
    OperatorFragment qprep = OperatorFragment::preparation(qq, reg1).with_prefix("qp:");
    OperatorFragment qeff = OperatorFragment::result(qq, reg1).with_prefix("qe:");
    OperatorFragment u1eff = OperatorFragment::result(q, basis_proj(2, 0)).with_prefix("u1:");
    OperatorFragment v1prep =
        OperatorFragment::make({}, {b, c, d}, Matrix(V.col(0) * V.col(0).adjoint()))
            .with_prefix("v1:");
    OperatorFragment deff = deterministic_effect(d).with_prefix("de:");

    // chain: (a, qprep) -> P -> (u1 effect, q wire) -> Q with (v1 prep) -> effects
    OperatorFragment s1 = contract(Pf, u1eff, {{1, 1}});          // in (a, qq), out (qq)
    OperatorFragment s2 = contract(qprep, s1, {{1, 2}});          // in (a), out (qq)
    OperatorFragment s3 = contract(v1prep, Qf, {{1, 1}, {2, 2}, {3, 3}});  // in (qq), out (b,c,d,qq)
    OperatorFragment s4 = contract(s2, s3, {{1, 1}});             // in (a), out (b,c,d,qq)
    OperatorFragment s5 = contract(s4, qeff, {{4, 1}});           // in (a), out (b,c,d)
    for (int l = 0; l < L; ++l) {
        Matrix cl = Matrix::Zero(L, L);
        cl(l, l) = 1.0;
        OperatorFragment ceff = OperatorFragment::result(c, cl).with_prefix("ce:");
        OperatorFragment s6 = contract(s5, ceff, {{2, 1}});       // in (a), out (b,d)
        OperatorFragment chan = contract(s6, deff, {{2, 1}});     // in (a), out (b)
        CHECK(max_abs_diff(chan.op().matrix(), targets[l].op().matrix()) < 1e-8);
    }
}
