// SPDX-License-Identifier: Apache-2.0
// duotensor.hpp — fiducial families, hopping metrics, and duotensor coefficient
// arrays with black/white leg colors.
//
// The canonical fiducial family for dim N is the N^2 rank-one projectors onto
// |n>, (|m>+|n>)/sqrt(2), (|m>+i|n>)/sqrt(2), ordered n ascending then (m,n)
// pairs (m<n) lexicographically, x before y. The hopping metric is the matrix
// of preparation-effect traces.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "opcircuits/fragment.hpp"
#include "opcircuits/linalg.hpp"

namespace opc {

struct FiducialFamily {
    SystemType system;
    std::vector<std::string> names;      // "1", "2", "12x", "12y", ...
    std::vector<Matrix> effects;         // N^2 rank-one projectors
    std::vector<Matrix> preparations;    // same projectors in the canonical family
    Eigen::MatrixXd g;                   // g[i][j] = trace(prep_i * effect_j)
    Eigen::MatrixXd g_inv;
    double condition = 0.0;              // reported, not assumed

    int count() const { return static_cast<int>(effects.size()); }
};

// Throws SingularMetric if the metric's condition number exceeds 1e8.
FiducialFamily fiducial_family(int N);
FiducialFamily fiducial_family(const SystemType& t);

enum class LegDirection { Input, Output };
enum class LegColor { Black, White };

struct Leg {
    SystemType type;
    LegDirection dir = LegDirection::Input;
    LegColor color = LegColor::Black;
};

class Duotensor {
public:
    Duotensor(std::vector<Leg> legs, std::vector<double> coeffs);

    const std::vector<Leg>& legs() const { return legs_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    std::vector<double>& coeffs() { return coeffs_; }

    // N^2 per leg.
    std::vector<int> shape() const;
    std::size_t size() const { return coeffs_.size(); }

    double at(const std::vector<int>& idx) const;

private:
    std::vector<Leg> legs_;
    std::vector<double> coeffs_;
};

using FamilyMap = std::map<std::string, FiducialFamily>;  // keyed by type name

// Coefficients of a fragment in the given color form. All-black entries are the
// fiducial probabilities; all-white entries are the expansion weights.
Duotensor operator_to_duotensor(const OperatorFragment& f, const FamilyMap& families,
                                const std::vector<LegColor>& target_colors);

// Reconstruct the fragment; round trip with operator_to_duotensor is identity.
OperatorFragment duotensor_to_operator(const Duotensor& d, const FamilyMap& families);

// Contract one leg's axis with g (white -> black) or g^-1 (black -> white).
Duotensor recolor(const Duotensor& d, std::size_t leg_index, LegColor new_color,
                  const FamilyMap& families);

struct FiducialTransform {
    Eigen::MatrixXd E;  // effect change: old_effect[a] = sum_b E(a,b) new_effect[b]
    Eigen::MatrixXd P;  // preparation change, same convention
};

// Transformed fiducial operator basis (both lists become general Hermitian
// combinations, no longer projectors).
struct FiducialBasis {
    std::vector<Matrix> effects;
    std::vector<Matrix> preparations;
};

FiducialBasis transformed_basis(const FiducialFamily& family, const FiducialTransform& t);

// Coefficient transformation of Appendix-style fiducial changes; legs keep
// their colors, coefficients move to the new basis. Throws SingularTransform.
Duotensor change_fiducials(const Duotensor& d, const FiducialTransform& t);

// Reconstruction against an explicit (possibly transformed) basis. Legs must be
// all white.
Matrix reconstruct_with_basis(const Duotensor& d, const std::vector<FiducialBasis>& per_leg);

// Independent circuit evaluation through duotensor contraction in standard form
// (inputs white, outputs black; wires sum black-to-white indices directly).
double eval_circuit_duotensor(const WireGraph& graph,
                              const std::map<std::string, OperatorFragment>& payloads,
                              const FamilyMap& families);

}  // namespace opc
