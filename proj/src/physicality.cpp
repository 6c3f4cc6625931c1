// SPDX-License-Identifier: Apache-2.0

#include "opcircuits/physicality.hpp"

#include <cmath>
#include <random>

namespace opc {

PhysicalityReport is_physical(const OperatorFragment& f) {
    PhysicalityReport rep;
    ChoiForm c = input_transpose(f);
    rep.min_choi_eigenvalue = min_eigenvalue(c.matrix);

    DenseHermitian traced = reverse_apply(f, DenseHermitian::identity(f.output_space()));
    Matrix slack_m = Matrix::Identity(traced.matrix().rows(), traced.matrix().cols()) - traced.matrix();
    DenseHermitian slack(traced.space(), slack_m);
    rep.trace_condition_slack = min_eigenvalue(slack);

    const double tol = 1e-9 * (1.0 + f.op().max_abs());
    rep.verdict = rep.min_choi_eigenvalue >= -tol && rep.trace_condition_slack >= -tol;
    return rep;
}

namespace {

void check_same_structure(const std::vector<OperatorFragment>& fs) {
    for (std::size_t k = 1; k < fs.size(); ++k) {
        if (fs[k].inputs().size() != fs[0].inputs().size() ||
            fs[k].outputs().size() != fs[0].outputs().size())
            throw StructureMismatch("fragments differ in port counts");
        for (std::size_t p = 0; p < fs[0].inputs().size(); ++p)
            if (fs[k].inputs()[p].type.dim != fs[0].inputs()[p].type.dim)
                throw StructureMismatch("fragments differ in input types");
        for (std::size_t p = 0; p < fs[0].outputs().size(); ++p)
            if (fs[k].outputs()[p].type.dim != fs[0].outputs()[p].type.dim)
                throw StructureMismatch("fragments differ in output types");
    }
}

}  // namespace

bool is_complete_set(const std::vector<OperatorFragment>& fs) {
    if (fs.empty()) return false;
    check_same_structure(fs);

    double scale = 0.0;
    for (const auto& f : fs) scale = std::max(scale, f.op().max_abs());
    const double tol = 1e-9 * (1.0 + scale);

    Matrix sum;
    for (const auto& f : fs) {
        ChoiForm c = input_transpose(f);
        if (min_eigenvalue(c.matrix) < -tol) return false;
        DenseHermitian traced = reverse_apply(f, DenseHermitian::identity(f.output_space()));
        if (sum.size() == 0)
            sum = traced.matrix();
        else
            sum += traced.matrix();
    }
    const Matrix dev = sum - Matrix::Identity(sum.rows(), sum.cols());
    return dev.cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + scale);
}

OperatorFragment deterministic_effect(const SystemType& t) {
    return OperatorFragment::result(t, Matrix::Identity(t.dim, t.dim));
}

RatioVerdict probability_ratio(const OperatorFragment& a, const OperatorFragment& b, double rel_tol) {
    check_same_structure({a, b});
    const Matrix& A = a.op().matrix();
    const Matrix& B = b.op().matrix();
    if (A.rows() != B.rows()) throw StructureMismatch("probability_ratio: operator dims differ");

    const double bb = B.cwiseAbs2().sum();
    const double anorm = std::sqrt(A.cwiseAbs2().sum());
    if (bb <= 1e-24 * (1.0 + anorm)) throw ZeroDenominator("probability_ratio: denominator is zero");

    const double k = (B.adjoint() * A).trace().real() / bb;
    RatioVerdict v;
    const double dev = std::sqrt((A - k * B).cwiseAbs2().sum());
    v.well_conditioned = dev <= rel_tol * (anorm > 0.0 ? anorm : 1.0);
    if (v.well_conditioned) v.ratio = k;
    return v;
}

// ----------------------------------- sampling -------------------------------

namespace {

Matrix random_gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = cxd(normal(rng), normal(rng));
    return m;
}

// Kraus terms with sum E^dag E = I, via the inverse square root of the raw sum.
std::vector<Matrix> normalized_kraus(int din, int dout, int terms, std::mt19937_64& rng) {
    std::vector<Matrix> ks;
    Matrix s = Matrix::Zero(din, din);
    for (int t = 0; t < terms; ++t) {
        ks.push_back(random_gaussian(dout, din, rng));
        s += ks.back().adjoint() * ks.back();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    Matrix inv_sqrt = es.eigenvectors() *
                      es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                      es.eigenvectors().adjoint();
    for (auto& k : ks) k = k * inv_sqrt;
    return ks;
}

}  // namespace

Matrix random_hermitian(int dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Matrix g = random_gaussian(dim, dim, rng);
    return (g + g.adjoint()) / 2.0;
}

Matrix random_density(int dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Matrix g = random_gaussian(dim, dim, rng);
    Matrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

Matrix random_rank_one_projector(int dim, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Matrix g = random_gaussian(dim, 1, rng);
    Eigen::VectorXcd v = g.col(0);
    v.normalize();
    return v * v.adjoint();
}

OperatorFragment sample_physical(const SystemType& in_type, const SystemType& out_type, uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 1);
    // few terms: the Choi form stays rank-deficient, which keeps the sampler
    // cheap and exercises the interesting boundary of the physical set
    std::uniform_int_distribution<int> term_count(1, std::max(1, (in_type.dim * out_type.dim) / 2));
    int terms = term_count(rng);
    auto ks = normalized_kraus(in_type.dim, out_type.dim, terms, rng);
    std::uniform_real_distribution<double> shrink(0.5, 1.0);
    const double mu = std::sqrt(shrink(rng));
    for (auto& k : ks) k *= mu;
    return operator_from_kraus(ks, in_type, out_type);
}

std::vector<OperatorFragment> sample_complete_set(const SystemType& in_type, const SystemType& out_type,
                                                  int L, uint64_t seed) {
    if (L < 1) throw Error("sample_complete_set: L must be >= 1");
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 2);
    std::uniform_int_distribution<int> extra(0, 1);
    std::vector<int> counts(L);
    int total = 0;
    for (int l = 0; l < L; ++l) {
        counts[l] = 1 + extra(rng);
        total += counts[l];
    }
    auto ks = normalized_kraus(in_type.dim, out_type.dim, total, rng);
    std::vector<OperatorFragment> out;
    int used = 0;
    for (int l = 0; l < L; ++l) {
        std::vector<Matrix> part(ks.begin() + used, ks.begin() + used + counts[l]);
        used += counts[l];
        out.push_back(operator_from_kraus(part, in_type, out_type));
    }
    return out;
}

}  // namespace opc
