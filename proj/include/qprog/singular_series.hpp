// singular_series.hpp
// Truncated Euler products over odd primes:
//   S(k) = prod_{2 < p <= P} (1 - (-k/p)/(p-1))
//   C    = prod_{2 < p <= P} (1 + 1/(p(p-1)))
// Factors are multiplied in ascending p, in double precision, by every
// entry point, so single and batch evaluations agree bit for bit.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "arith.hpp"
#include "parallel.hpp"
#include "sieve.hpp"

namespace qprog {

struct SingularValue {
    u64 k = 0;
    u64 truncation_p = 0;
    double value = 1.0;
    double tail_estimate = 0.0;
    bool stabilized = true;
};

/// 1 - symbol/(p-1) for symbol in {-1, 0, 1}.
inline double singular_factor(int symbol, u64 p) {
    return 1.0 - static_cast<double>(symbol) / (static_cast<double>(p) - 1.0);
}

inline SingularValue truncated_singular_series(u64 k, u64 P, const PrimeTable& table) {
    if (k == 0) throw std::invalid_argument("singular series: k must be >= 1");
    if (P < 3) throw std::invalid_argument("singular series: P must be >= 3");
    if (table.limit < P) throw std::invalid_argument("singular series: prime table shorter than P");
    SingularValue s{k, P, 1.0, 0.0, true};
    const auto neg_k = -static_cast<i64>(k);
    for (u64 p : table.up_to(P)) {
        if (p == 2) continue;
        s.value *= singular_factor(kronecker(neg_k, p), p);
    }
    return s;
}

inline SingularValue truncated_singular_series(u64 k, u64 P) {
    if (P < 3) throw std::invalid_argument("singular series: P must be >= 3");
    return truncated_singular_series(k, P, primes_up_to(P));
}

/// Doubles P from `start_p` until three successive doublings each move the
/// value by less than tol/2; a single small step is not trusted because the
/// product converges only conditionally and its partial values oscillate.
/// tail_estimate is the last step. Hitting `cap` leaves stabilized = false.
inline SingularValue singular_series(u64 k, double tol, u64 cap = 100'000'000, u64 start_p = 1000) {
    if (!(tol > 0)) throw std::invalid_argument("singular_series: tol must be > 0");
    if (k == 0) throw std::invalid_argument("singular series: k must be >= 1");
    SingularValue s = truncated_singular_series(k, start_p);
    const auto neg_k = -static_cast<i64>(k);
    s.tail_estimate = std::numeric_limits<double>::infinity();
    u64 P = start_p;
    int quiet = 0;
    while (true) {
        if (P > cap / 2) {
            s.stabilized = false;
            break;
        }
        const u64 next = 2 * P;
        double value = s.value;
        for_each_prime(P + 1, next + 1, [&](u64 p) { value *= singular_factor(kronecker(neg_k, p), p); });
        s.tail_estimate = std::abs(value - s.value);
        s.value = value;
        s.truncation_p = P = next;
        quiet = s.tail_estimate < tol / 2 ? quiet + 1 : 0;
        if (quiet == 3) break;
    }
    return s;
}

/// S(k) for k = 1..K truncated at P. Parallel over k-blocks; each k sees
/// its factors in ascending p regardless of the split.
inline std::vector<SingularValue> batch_singular_series(u64 K, u64 P, const PrimeTable& table, unsigned threads = 1) {
    if (K == 0) throw std::invalid_argument("batch_singular_series: K must be >= 1");
    if (P < 3) throw std::invalid_argument("batch_singular_series: P must be >= 3");
    if (table.limit < P) throw std::invalid_argument("batch_singular_series: prime table shorter than P");
    std::vector<double> acc(K + 1, 1.0);
    const auto primes = table.up_to(P);
    const unsigned blocks = std::max(1u, threads);
    const u64 block_len = (K + blocks - 1) / blocks;
    std::vector<u64> spf(K + 1, 0);  // smallest prime factor
    for (u64 i = 2; i <= K; ++i)
        if (spf[i] == 0)
            for (u64 j = i; j <= K; j += i)
                if (spf[j] == 0) spf[j] = i;

    parallel_for(blocks, threads, [&](std::size_t b) {
        const u64 k0 = 1 + b * block_len;
        const u64 k1 = std::min(K, k0 + block_len - 1);
        if (k0 > k1) return;
        std::vector<signed char> symbol;
        for (u64 p : primes) {
            if (p == 2) continue;
            const double plus = singular_factor(-1, p), minus = singular_factor(1, p);
            const u64 span = k1 - k0 + 1;
            if (p / 2 <= 16 * span) {
                // Quadratic-residue table: symbol[r] = (r/p).
                symbol.assign(p, -1);
                symbol[0] = 0;
                u64 sq = 0;
                for (u64 x = 1; x <= p / 2; ++x) {
                    sq += 2 * x - 1;
                    if (sq >= p) sq %= p;
                    symbol[sq] = 1;
                }
                u64 r = (p - k0 % p) % p;  // -k0 mod p
                for (u64 k = k0; k <= k1; ++k) {
                    const int s = symbol[r];
                    if (s != 0) acc[k] *= s > 0 ? minus : plus;
                    r = r == 0 ? p - 1 : r - 1;
                }
            } else if (p > k1) {
                // (k/p) is completely multiplicative in k: Kronecker calls only
                // at primes, then (-k/p) = (-1/p)(k/p).
                symbol.assign(k1 + 1, 0);
                symbol[1] = 1;
                for (u64 k = 2; k <= k1; ++k)
                    symbol[k] = spf[k] == k ? static_cast<signed char>(kronecker(static_cast<i64>(k), p))
                                            : static_cast<signed char>(symbol[spf[k]] * symbol[k / spf[k]]);
                const int neg_one = p % 4 == 1 ? 1 : -1;
                for (u64 k = k0; k <= k1; ++k) acc[k] *= neg_one * symbol[k] > 0 ? minus : plus;
            } else {
                for (u64 k = k0; k <= k1; ++k) {
                    const int s = kronecker(-static_cast<i64>(k), p);
                    if (s != 0) acc[k] *= s > 0 ? minus : plus;
                }
            }
        }
    });

    std::vector<SingularValue> out(K);
    for (u64 k = 1; k <= K; ++k) out[k - 1] = {k, P, acc[k], 0.0, true};
    return out;
}

inline std::vector<SingularValue> batch_singular_series(u64 K, u64 P, unsigned threads = 1) {
    if (P < 3) throw std::invalid_argument("batch_singular_series: P must be >= 3");
    return batch_singular_series(K, P, primes_up_to(P), threads);
}

inline double main_term_constant(u64 P, const PrimeTable& table) {
    if (P < 3) throw std::invalid_argument("main_term_constant: P must be >= 3");
    if (table.limit < P) throw std::invalid_argument("main_term_constant: prime table shorter than P");
    double c = 1.0;
    for (u64 p : table.up_to(P)) {
        if (p == 2) continue;
        const double pd = static_cast<double>(p);
        c *= 1.0 + 1.0 / (pd * (pd - 1.0));
    }
    return c;
}

inline double main_term_constant(u64 P) {
    if (P < 3) throw std::invalid_argument("main_term_constant: P must be >= 3");
    return main_term_constant(P, primes_up_to(P));
}

/// min_{k <= K} S(k) log(k + 2).
inline double lower_bound_diagnostic(u64 K, u64 P, unsigned threads = 1) {
    const auto values = batch_singular_series(K, P, threads);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : values) best = std::min(best, s.value * std::log(static_cast<double>(s.k) + 2.0));
    return best;
}

}  // namespace qprog
