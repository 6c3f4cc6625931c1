// SPDX-License-Identifier: Apache-2.0

#include "opcircuits/reconstruction.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace opc {

SpanReport span_report(const std::vector<Matrix>& states) {
    if (states.empty()) throw EmptySet("span_report: no states");
    const int d = static_cast<int>(states[0].rows());
    for (const auto& s : states)
        if (s.rows() != d || s.cols() != d) throw DimMismatch("span_report: mixed dimensions");

    SpanReport rep;
    rep.input_count = static_cast<int>(states.size());

    // support: rank of the summed states, relative eigenvalue cutoff
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& s : states) sum += s;
    Eigen::SelfAdjointEigenSolver<Matrix> es((sum + sum.adjoint()) / 2.0);
    const double tr = std::abs(sum.trace().real());
    const double cut = 1e-10 * (tr > 0.0 ? tr : 1.0);
    for (int k = 0; k < d; ++k)
        if (es.eigenvalues()(k) > cut) rep.support_dim++;

    // span: rank of the Gram matrix of vectorized states
    const int n = rep.input_count;
    Matrix gram(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gram(i, j) = (states[i].adjoint() * states[j]).trace();
    Eigen::SelfAdjointEigenSolver<Matrix> eg((gram + gram.adjoint()) / 2.0);
    const double top = eg.eigenvalues().cwiseAbs().maxCoeff();
    const double gcut = 1e-10 * (top > 0.0 ? top : 1.0);
    for (int k = 0; k < n; ++k)
        if (eg.eigenvalues()(k) > gcut) rep.span_dim++;

    rep.nonflat = rep.span_dim == rep.support_dim * rep.support_dim;
    return rep;
}

FilterCheck filter_nonflatten_check(const std::vector<Matrix>& states, const Subspace& s) {
    FilterCheck chk;
    chk.before = span_report(states);
    const Matrix p = s.projector();
    for (const auto& st : states) {
        Matrix f = p * st * p;
        if (f.trace().real() >= 1e-12) chk.filtered.push_back(std::move(f));
    }
    if (chk.filtered.empty()) {
        chk.verdict = !chk.before.nonflat;  // everything blocked: vacuous unless input was non-flat
        return chk;
    }
    chk.after = span_report(chk.filtered);
    chk.verdict = !chk.before.nonflat || chk.after.nonflat;
    return chk;
}

int nonflatten_suite(int dim, int sets, int filters, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const SystemType t{"d" + std::to_string(dim), dim};

    auto random_ket = [&](int d) {
        Eigen::VectorXcd v(d);
        for (int i = 0; i < d; ++i) v(i) = cxd(normal(rng), normal(rng));
        v.normalize();
        return v;
    };

    int failures = 0;
    for (int s = 0; s < sets; ++s) {
        // a non-flat set: N^2 random pure states (checked, resampled if degenerate)
        std::vector<Matrix> states;
        for (int tries = 0; tries < 50; ++tries) {
            states.clear();
            for (int k = 0; k < dim * dim; ++k) {
                Eigen::VectorXcd v = random_ket(dim);
                states.push_back(v * v.adjoint());
            }
            if (span_report(states).nonflat) break;
        }
        for (int f = 0; f < filters; ++f) {
            std::uniform_int_distribution<int> rank_dist(1, dim);
            const int rank = rank_dist(rng);
            // random orthonormal basis for the filter subspace via Gram-Schmidt
            std::vector<Eigen::VectorXcd> basis;
            while (static_cast<int>(basis.size()) < rank) {
                Eigen::VectorXcd v = random_ket(dim);
                for (const auto& b : basis) v -= (b.adjoint() * v) * b;
                if (v.norm() > 1e-6) {
                    v.normalize();
                    basis.push_back(v);
                }
            }
            auto chk = filter_nonflatten_check(states, Subspace(t, basis));
            if (!chk.verdict) failures++;
        }
    }
    return failures;
}

KNReport k_multiplicative_search(int range_N, int max_r) {
    if (range_N < 4) throw RangeTooSmall("k_multiplicative_search: need range_N >= 4");
    if (range_N > 10000) throw Error("k_multiplicative_search: range_N capped at 10^4");
    if (max_r < 1) throw Error("k_multiplicative_search: max_r must be >= 1");

    std::vector<int> primes;
    for (int n = 2; n <= range_N; ++n) {
        bool prime = true;
        for (int d = 2; d * d <= n; ++d)
            if (n % d == 0) {
                prime = false;
                break;
            }
        if (prime) primes.push_back(n);
    }

    KNReport rep;
    rep.range_N = range_N;
    rep.max_r = max_r;

    const std::size_t np = primes.size();
    std::vector<int> assign(np, 1);
    while (true) {
        // extend multiplicatively over [1, range_N] and test strict monotonicity
        bool ok = true;
        long double prev = 1.0L;  // K(1) = 1
        for (int n = 2; n <= range_N && ok; ++n) {
            long double K = 1.0L;
            int m = n;
            for (std::size_t p = 0; p < np && m > 1; ++p) {
                while (m % primes[p] == 0) {
                    K *= powl(static_cast<long double>(primes[p]), assign[p]);
                    m /= primes[p];
                }
            }
            if (K <= prev) ok = false;
            prev = K;
        }
        if (ok) {
            std::map<int, int> a;
            for (std::size_t p = 0; p < np; ++p) a[primes[p]] = assign[p];
            rep.survivors.push_back(std::move(a));
        }
        // odometer over exponent assignments
        int k = static_cast<int>(np) - 1;
        for (; k >= 0; --k) {
            if (++assign[k] <= max_r) break;
            assign[k] = 1;
        }
        if (k < 0) break;
    }
    return rep;
}

std::vector<long long> signature_vector(int r, int length) {
    if (r < 1) throw Error("signature_vector: r must be >= 1");
    if (length < 1) return {};

    // binomials C(N, k) for N, k <= length
    std::vector<std::vector<long long>> binom(length + 1, std::vector<long long>(length + 1, 0));
    for (int n = 0; n <= length; ++n) {
        binom[n][0] = 1;
        for (int k = 1; k <= n; ++k)
            binom[n][k] = binom[n - 1][k - 1] + (k <= n - 1 ? binom[n - 1][k] : 0);
    }

    auto power = [](int base, int exp) {
        long long v = 1;
        for (int i = 0; i < exp; ++i) v *= base;
        return v;
    };

    // triangular solve: N^r = sum_{k=1..N} x_k C(N,k) evaluated at N = 1..length
    std::vector<long long> x(length + 1, 0);
    for (int n = 1; n <= length; ++n) {
        long long rhs = power(n, r);
        for (int k = 1; k < n; ++k) rhs -= x[k] * binom[n][k];
        x[n] = rhs;  // C(n,n) = 1
    }
    return {x.begin() + 1, x.end()};
}

}  // namespace opc
