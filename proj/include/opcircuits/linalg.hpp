// SPDX-License-Identifier: Apache-2.0
// linalg.hpp — dense complex Hermitian kernel over labeled tensor factorizations.
//
// A LabeledSpace is an ordered list of (label, dim) factors; a DenseHermitian is a
// Hermitian matrix living on the full product space. All subsystem operations
// (Kronecker product, partial trace, partial transpose, factor permutation) are
// phrased in terms of factor labels, never raw index offsets.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "opcircuits/errors.hpp"

namespace opc {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

struct Factor {
    std::string label;
    int dim = 1;
};

class LabeledSpace {
public:
    LabeledSpace() = default;  // scalar space: no factors, total_dim 1
    explicit LabeledSpace(std::vector<Factor> factors);

    int total_dim() const { return total_dim_; }
    const std::vector<Factor>& factors() const { return factors_; }
    std::size_t size() const { return factors_.size(); }

    bool contains(const std::string& label) const;
    // Position of a factor; throws UnknownLabel.
    int position(const std::string& label) const;
    int dim_of(const std::string& label) const { return factors_[position(label)].dim; }

    std::vector<std::string> labels() const;

    // Row-major strides: flat index = sum_k idx[k] * stride[k].
    std::vector<int> strides() const;

    bool operator==(const LabeledSpace& other) const;

private:
    std::vector<Factor> factors_;
    int total_dim_ = 1;
};

class DenseHermitian {
public:
    // Enforces ||M - M^dag||_max <= 1e-12 * (1 + ||M||_max), then symmetrizes.
    DenseHermitian(LabeledSpace space, Matrix entries);

    const LabeledSpace& space() const { return space_; }
    const Matrix& matrix() const { return mat_; }

    double trace_real() const;
    double max_abs() const;

    static DenseHermitian identity(LabeledSpace space);
    static DenseHermitian zero(LabeledSpace space);

    // Same entries on a renamed factor list (dims must agree position-wise).
    DenseHermitian relabeled(const std::vector<std::string>& new_labels) const;

private:
    LabeledSpace space_;
    Matrix mat_;
};

// ---------------------------------- operations ------------------------------

// Kronecker product; factor lists concatenate. Throws LabelCollision.
DenseHermitian kron(const DenseHermitian& a, const DenseHermitian& b);

// Trace out the given factors; result lives on the remaining ones.
DenseHermitian partial_trace(const DenseHermitian& m, const std::vector<std::string>& labels);

// Partial transpose over the given factors. `bases` optionally supplies an
// orthonormal basis (columns) per label; default is the computational basis.
DenseHermitian partial_transpose(const DenseHermitian& m, const std::vector<std::string>& labels,
                                 const std::map<std::string, Matrix>& bases = {});

// Smallest eigenvalue of a Hermitian matrix. Throws ConvergenceFailure.
double min_eigenvalue(const DenseHermitian& m);

// Reorder factors; spectrum and trace are untouched. Throws NotAPermutation.
DenseHermitian permute_factors(const DenseHermitian& m, const std::vector<std::string>& new_order);

// PSD predicate: all eigenvalues >= -1e-9 * (1 + ||m||_max).
bool is_psd(const DenseHermitian& m);
double psd_tolerance(const DenseHermitian& m);

}  // namespace opc
