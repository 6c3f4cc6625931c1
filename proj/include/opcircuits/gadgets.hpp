// SPDX-License-Identifier: Apache-2.0
// gadgets.hpp — concrete constructions: filters, permutation channels, cnot,
// the canonical maximally entangled pair, Bloch-sphere states, teleportation
// and entanglement-swapping assemblies, and complete-set synthesis through a
// single isometry.

#pragma once

#include <map>
#include <utility>
#include <vector>

#include "opcircuits/fragment.hpp"
#include "opcircuits/physicality.hpp"

namespace opc {

struct Subspace {
    SystemType parent;
    std::vector<Eigen::VectorXcd> basis;  // orthonormal, 1 <= k <= N

    Subspace(SystemType parent_type, std::vector<Eigen::VectorXcd> vectors);
    // Span of the listed computational basis states (1-based).
    static Subspace computational(const SystemType& t, const std::vector<int>& indices);
    Matrix projector() const;
};

struct BlochPoint {
    double x = 0.0, y = 0.0, z = 1.0;
    BlochPoint(double x_, double y_, double z_);  // throws NotNormalized
};

struct PermutationSpec {
    std::vector<Eigen::VectorXcd> domain;  // orthonormal
    std::vector<Eigen::VectorXcd> image;   // orthonormal, same count
    std::vector<int> perm;                 // 0-based bijection
    std::vector<double> phases;            // theta[n]; empty means all zero

    static PermutationSpec computational(const SystemType& t, const std::vector<int>& perm_one_based);
};

enum class Role { Preparation, Result };

// rho -> P rho P with P the projector onto the subspace; a single Kraus term.
OperatorFragment filter_fragment(const Subspace& s);

// Unitary channel for U = sum_n e^{i theta[n]} |image[perm(n)]><domain[n]|.
OperatorFragment permutation_fragment(const PermutationSpec& spec);

// Two-qubit permutation channel 11->11, 12->12, 21->22, 22->21; self-inverse.
OperatorFragment cnot_fragment();

// Rank-one projector onto (|11> + |22>)/sqrt(2), as a two-output preparation or
// a two-input result.
OperatorFragment max_entangled(Role role);

// Rank-one qubit projector with the given Bloch vector.
OperatorFragment bloch_state(const BlochPoint& p, Role role);

// The identity channel on a type (single Kraus term I).
OperatorFragment identity_channel(const SystemType& t);

SystemType qubit_type();

// ------------------------------ demonstration circuits ----------------------

struct TeleportReport {
    OperatorFragment channel;  // assembled one-qubit-in/one-qubit-out fragment
    bool verdict = false;      // channel == (1/8) * identity channel to 1e-9
    double equator_angle = 0.0;
    double ratio = 0.0;
    double deviation = 0.0;    // max-abs deviation from (1/8) identity
};

// Assembles the probabilistic-teleportation fragment; the equatorial resource
// state is found by a 360-point grid refined by golden-section search.
TeleportReport teleportation_demo();

struct SwapReport {
    OperatorFragment preparation;  // assembled two-qubit preparation fragment
    bool verdict = false;          // preparation == (1/8) * canonical entangled prep
    double equator_angle = 0.0;
    double ratio = 0.0;
    double deviation = 0.0;
};

SwapReport entanglement_swap_demo();

// The closed teleportation circuit as a wire graph (input state and matching
// final effect included), for rendering and graph-level evaluation.
std::pair<WireGraph, std::map<std::string, OperatorFragment>> teleport_circuit(
    const BlochPoint& input = BlochPoint(0.6, 0.0, 0.8));

// ------------------------------ complete-set synthesis ----------------------

struct SynthesisReport {
    int outcome_count = 0;            // L
    int outcome_ancilla_dim = 0;      // N_c
    int kraus_ancilla_dim = 0;        // N_d
    double orthonormality_deviation = 0.0;
    double reconstruction_deviation = 0.0;
    std::vector<OperatorFragment> reconstructed;
    bool verdict = false;
};

// Builds the isometry |v[n]> = sum_{il} E[l,i]|u[n]>|l>|i> from Kraus terms of
// the targets, checks its orthonormality, and reconstructs every target by
// conditioning on the outcome ancilla. Throws NotComplete,
// OrthonormalityFailure.
SynthesisReport magic_complete_set(const std::vector<OperatorFragment>& targets,
                                   const SystemType& in_type, const SystemType& out_type);

}  // namespace opc
