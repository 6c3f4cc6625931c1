// SPDX-License-Identifier: Apache-2.0
// reconstruction.hpp — numeric witnesses: span/support analysis of state sets,
// the filter non-flattening suite, the K = N^r multiplicative-function search,
// and signature vectors.

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "opcircuits/gadgets.hpp"
#include "opcircuits/linalg.hpp"

namespace opc {

struct SpanReport {
    int input_count = 0;
    int support_dim = 0;  // smallest subspace dimension supporting the set
    int span_dim = 0;     // linear dimension of the operator span
    bool nonflat = false;  // span_dim == support_dim^2
};

// Throws EmptySet.
SpanReport span_report(const std::vector<Matrix>& states);

struct FilterCheck {
    SpanReport before;
    SpanReport after;
    bool verdict = false;  // before.nonflat implies after.nonflat
    std::vector<Matrix> filtered;  // surviving states (trace >= 1e-12)
};

FilterCheck filter_nonflatten_check(const std::vector<Matrix>& states, const Subspace& s);

// Randomized non-flattening suite: `sets` random non-flat sets x `filters`
// random filters on a dim-`dim` space; returns the number of failures (0 for
// quantum theory).
int nonflatten_suite(int dim, int sets, int filters, uint64_t seed);

struct KNReport {
    int range_N = 0;
    int max_r = 0;
    // surviving exponent assignments, prime -> r
    std::vector<std::map<int, int>> survivors;
};

// Enumerates prime-exponent assignments K(p) = p^{r_p}, extends multiplicatively
// and rejects any violating K(N+1) > K(N) on [1, range_N]. Throws RangeTooSmall.
KNReport k_multiplicative_search(int range_N, int max_r);

// Solves K(N) = N^r = sum_k x_k * binom(N, k) for x_1..x_length.
std::vector<long long> signature_vector(int r, int length);

}  // namespace opc
