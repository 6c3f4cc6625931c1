// SPDX-License-Identifier: Apache-2.0

#include "opcircuits/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <set>

namespace opc {

namespace {

// Decompose a flat index into per-factor digits (row-major).
std::vector<int> digits_of(int flat, const std::vector<int>& dims) {
    std::vector<int> d(dims.size());
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
        d[k] = flat % dims[k];
        flat /= dims[k];
    }
    return d;
}

int flat_of(const std::vector<int>& digits, const std::vector<int>& strides) {
    int f = 0;
    for (std::size_t k = 0; k < digits.size(); ++k) f += digits[k] * strides[k];
    return f;
}

std::vector<int> dims_of(const LabeledSpace& s) {
    std::vector<int> d;
    d.reserve(s.size());
    for (const auto& f : s.factors()) d.push_back(f.dim);
    return d;
}

}  // namespace

// --------------------------------- LabeledSpace -----------------------------

LabeledSpace::LabeledSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
    std::set<std::string> seen;
    total_dim_ = 1;
    for (const auto& f : factors_) {
        if (f.dim < 1) throw Error("LabeledSpace: factor dim must be positive: " + f.label);
        if (!seen.insert(f.label).second)
            throw LabelCollision("LabeledSpace: duplicate label '" + f.label + "'");
        total_dim_ *= f.dim;
    }
}

bool LabeledSpace::contains(const std::string& label) const {
    for (const auto& f : factors_)
        if (f.label == label) return true;
    return false;
}

int LabeledSpace::position(const std::string& label) const {
    for (std::size_t k = 0; k < factors_.size(); ++k)
        if (factors_[k].label == label) return static_cast<int>(k);
    throw UnknownLabel("no factor labeled '" + label + "'");
}

std::vector<std::string> LabeledSpace::labels() const {
    std::vector<std::string> out;
    out.reserve(factors_.size());
    for (const auto& f : factors_) out.push_back(f.label);
    return out;
}

std::vector<int> LabeledSpace::strides() const {
    std::vector<int> s(factors_.size(), 1);
    for (int k = static_cast<int>(factors_.size()) - 2; k >= 0; --k)
        s[k] = s[k + 1] * factors_[k + 1].dim;
    return s;
}

bool LabeledSpace::operator==(const LabeledSpace& other) const {
    if (factors_.size() != other.factors_.size()) return false;
    for (std::size_t k = 0; k < factors_.size(); ++k)
        if (factors_[k].label != other.factors_[k].label || factors_[k].dim != other.factors_[k].dim)
            return false;
    return true;
}

// -------------------------------- DenseHermitian ----------------------------

DenseHermitian::DenseHermitian(LabeledSpace space, Matrix entries)
    : space_(std::move(space)), mat_(std::move(entries)) {
    const int d = space_.total_dim();
    if (mat_.rows() != d || mat_.cols() != d)
        throw DimMismatch("DenseHermitian: matrix is " + std::to_string(mat_.rows()) + "x" +
                          std::to_string(mat_.cols()) + " but space dim is " + std::to_string(d));
    const double scale = mat_.cwiseAbs().maxCoeff();
    const double dev = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-12 * (1.0 + scale))
        throw HermiticityViolation("matrix is not Hermitian (deviation " + std::to_string(dev) + ")");
    mat_ = ((mat_ + mat_.adjoint()) / 2.0).eval();
}

double DenseHermitian::trace_real() const { return mat_.trace().real(); }

double DenseHermitian::max_abs() const {
    return mat_.size() == 0 ? 0.0 : mat_.cwiseAbs().maxCoeff();
}

DenseHermitian DenseHermitian::identity(LabeledSpace space) {
    const int d = space.total_dim();
    return DenseHermitian(std::move(space), Matrix::Identity(d, d));
}

DenseHermitian DenseHermitian::zero(LabeledSpace space) {
    const int d = space.total_dim();
    return DenseHermitian(std::move(space), Matrix::Zero(d, d));
}

DenseHermitian DenseHermitian::relabeled(const std::vector<std::string>& new_labels) const {
    if (new_labels.size() != space_.size())
        throw LabelMismatch("relabeled: expected " + std::to_string(space_.size()) + " labels");
    std::vector<Factor> fs;
    fs.reserve(new_labels.size());
    for (std::size_t k = 0; k < new_labels.size(); ++k)
        fs.push_back({new_labels[k], space_.factors()[k].dim});
    return DenseHermitian(LabeledSpace(std::move(fs)), mat_);
}

// ---------------------------------- operations ------------------------------

DenseHermitian kron(const DenseHermitian& a, const DenseHermitian& b) {
    std::vector<Factor> fs = a.space().factors();
    for (const auto& f : b.space().factors()) {
        if (a.space().contains(f.label))
            throw LabelCollision("kron: label '" + f.label + "' appears on both sides");
        fs.push_back(f);
    }
    const Matrix& A = a.matrix();
    const Matrix& B = b.matrix();
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return DenseHermitian(LabeledSpace(std::move(fs)), std::move(K));
}

DenseHermitian partial_trace(const DenseHermitian& m, const std::vector<std::string>& labels) {
    const LabeledSpace& s = m.space();
    std::vector<bool> traced(s.size(), false);
    for (const auto& l : labels) traced[s.position(l)] = true;

    std::vector<Factor> kept;
    std::vector<int> kept_pos, tr_pos;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (traced[k]) {
            tr_pos.push_back(static_cast<int>(k));
        } else {
            kept.push_back(s.factors()[k]);
            kept_pos.push_back(static_cast<int>(k));
        }
    }

    LabeledSpace out_space{kept};
    const auto strides = s.strides();
    const auto dims = dims_of(s);
    const auto kept_dims = dims_of(out_space);

    int tr_dim = 1;
    for (int p : tr_pos) tr_dim *= dims[p];

    Matrix out = Matrix::Zero(out_space.total_dim(), out_space.total_dim());
    std::vector<int> full_r(s.size(), 0), full_c(s.size(), 0);
    for (int r = 0; r < out.rows(); ++r) {
        const auto rd = digits_of(r, kept_dims);
        for (int c = 0; c < out.cols(); ++c) {
            const auto cd = digits_of(c, kept_dims);
            cxd acc = 0.0;
            for (int t = 0; t < tr_dim; ++t) {
                std::vector<int> td;
                if (!tr_pos.empty()) {
                    std::vector<int> tdims;
                    for (int p : tr_pos) tdims.push_back(dims[p]);
                    td = digits_of(t, tdims);
                }
                for (std::size_t k = 0; k < kept_pos.size(); ++k) {
                    full_r[kept_pos[k]] = rd[k];
                    full_c[kept_pos[k]] = cd[k];
                }
                for (std::size_t k = 0; k < tr_pos.size(); ++k) {
                    full_r[tr_pos[k]] = td[k];
                    full_c[tr_pos[k]] = td[k];
                }
                acc += m.matrix()(flat_of(full_r, strides), flat_of(full_c, strides));
            }
            out(r, c) = acc;
        }
    }
    return DenseHermitian(std::move(out_space), std::move(out));
}

DenseHermitian partial_transpose(const DenseHermitian& m, const std::vector<std::string>& labels,
                                 const std::map<std::string, Matrix>& bases) {
    const LabeledSpace& s = m.space();
    std::vector<bool> sel(s.size(), false);
    for (const auto& l : labels) sel[s.position(l)] = true;
    for (const auto& [l, U] : bases) {
        const int d = s.factors()[s.position(l)].dim;
        if (U.rows() != d || U.cols() != d)
            throw BasisDimensionMismatch("basis for '" + l + "' is " + std::to_string(U.rows()) + "x" +
                                         std::to_string(U.cols()) + ", factor dim is " + std::to_string(d));
        if ((U.adjoint() * U - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
            throw BasisDimensionMismatch("basis for '" + l + "' is not orthonormal");
    }

    // Rotate the selected factors into the requested basis, transpose them in
    // the computational sense there, rotate back.
    Matrix V = Matrix::Identity(1, 1);
    bool nontrivial = false;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const int d = s.factors()[k].dim;
        Matrix blk = Matrix::Identity(d, d);
        auto it = bases.find(s.factors()[k].label);
        if (sel[k] && it != bases.end()) {
            blk = it->second;
            nontrivial = true;
        }
        Matrix next(V.rows() * d, V.cols() * d);
        for (int i = 0; i < V.rows(); ++i)
            for (int j = 0; j < V.cols(); ++j) next.block(i * d, j * d, d, d) = V(i, j) * blk;
        V = std::move(next);
    }

    Matrix work = nontrivial ? Matrix(V.adjoint() * m.matrix() * V) : m.matrix();

    const auto strides = s.strides();
    const auto dims = dims_of(s);
    const int n = s.total_dim();
    Matrix out(n, n);
    for (int r = 0; r < n; ++r) {
        auto rd = digits_of(r, dims);
        for (int c = 0; c < n; ++c) {
            auto cd = digits_of(c, dims);
            auto rr = rd, cc = cd;
            for (std::size_t k = 0; k < s.size(); ++k) {
                if (sel[k]) std::swap(rr[k], cc[k]);
            }
            out(r, c) = work(flat_of(rr, strides), flat_of(cc, strides));
        }
    }
    if (nontrivial) out = V * out * V.adjoint();
    return DenseHermitian(s, std::move(out));
}

double min_eigenvalue(const DenseHermitian& m) {
    if (m.space().total_dim() == 1) return m.matrix()(0, 0).real();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("eigen solver did not converge");
    return solver.eigenvalues()(0);
}

DenseHermitian permute_factors(const DenseHermitian& m, const std::vector<std::string>& new_order) {
    const LabeledSpace& s = m.space();
    if (new_order.size() != s.size()) throw NotAPermutation("permute_factors: wrong label count");
    std::set<std::string> seen(new_order.begin(), new_order.end());
    if (seen.size() != new_order.size()) throw NotAPermutation("permute_factors: repeated label");
    std::vector<int> src_pos;  // src_pos[k] = position in old order of new factor k
    std::vector<Factor> fs;
    for (const auto& l : new_order) {
        int p = -1;
        try {
            p = s.position(l);
        } catch (const UnknownLabel&) {
            throw NotAPermutation("permute_factors: label '" + l + "' not in space");
        }
        src_pos.push_back(p);
        fs.push_back(s.factors()[p]);
    }

    LabeledSpace out_space{fs};
    const auto old_strides = s.strides();
    const auto new_dims = dims_of(out_space);
    const int n = s.total_dim();

    // Map each new flat index to the old one.
    std::vector<int> old_of(n);
    std::vector<int> perm_strides(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) perm_strides[k] = old_strides[src_pos[k]];
    for (int i = 0; i < n; ++i) old_of[i] = flat_of(digits_of(i, new_dims), perm_strides);

    Matrix out(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) out(r, c) = m.matrix()(old_of[r], old_of[c]);
    return DenseHermitian(std::move(out_space), std::move(out));
}

double psd_tolerance(const DenseHermitian& m) { return 1e-9 * (1.0 + m.max_abs()); }

bool is_psd(const DenseHermitian& m) { return min_eigenvalue(m) >= -psd_tolerance(m); }

}  // namespace opc
