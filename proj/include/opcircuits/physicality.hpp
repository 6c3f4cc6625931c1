// SPDX-License-Identifier: Apache-2.0
// physicality.hpp — physicality predicates: a fragment is physical iff its input
// transpose is PSD and tracing out the outputs leaves an operator below the
// input identity.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "opcircuits/fragment.hpp"

namespace opc {

struct PhysicalityReport {
    double min_choi_eigenvalue = 0.0;
    double trace_condition_slack = 0.0;  // min eigenvalue of I_in - Tr_out f
    bool verdict = false;
};

PhysicalityReport is_physical(const OperatorFragment& f);

// True iff every input transpose is PSD and the output-traced operators sum to
// the input identity (to 1e-9). Throws StructureMismatch.
bool is_complete_set(const std::vector<OperatorFragment>& fs);

// The deterministic effect: a result fragment carrying the identity.
OperatorFragment deterministic_effect(const SystemType& t);

struct RatioVerdict {
    bool well_conditioned = false;
    std::optional<double> ratio;
};

// Proportionality test under the Frobenius pairing k = <b,a>/<b,b>. Throws
// ZeroDenominator, StructureMismatch.
RatioVerdict probability_ratio(const OperatorFragment& a, const OperatorFragment& b,
                               double rel_tol = 1e-8);

// Seeded random physical fragment: random Kraus terms rescaled so that
// sum E^dag E <= I. Deterministic per seed.
OperatorFragment sample_physical(const SystemType& in_type, const SystemType& out_type, uint64_t seed);

// Seeded complete set of L physical fragments (Kraus terms jointly normalized
// to a trace-preserving sum, partitioned into L sub-channels).
std::vector<OperatorFragment> sample_complete_set(const SystemType& in_type, const SystemType& out_type,
                                                  int L, uint64_t seed);

// Seeded random density matrix / rank-one projector helpers (test support).
Matrix random_density(int dim, uint64_t seed);
Matrix random_rank_one_projector(int dim, uint64_t seed);
Matrix random_hermitian(int dim, uint64_t seed);

}  // namespace opc
