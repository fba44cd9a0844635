// sieve.hpp
// Prime tables and segmented von Mangoldt sieving over integer windows.
//
// A SieveWindow covers [lo, hi) and stores Λ(n) (natural log scale) and a
// primality bit for every n in range. Composite marking uses the base
// primes up to sqrt(hi); prime powers p^e with e >= 2 then get log p
// written back over the zero left by marking.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arith.hpp"

namespace qprog {

struct PrimeTable {
    u64 limit = 0;
    std::vector<u64> primes;  // ascending, all primes <= limit

    /// Primes p <= bound, as a prefix view.
    std::span<const u64> up_to(u64 bound) const {
        auto end = std::upper_bound(primes.begin(), primes.end(), bound);
        return {primes.data(), static_cast<std::size_t>(end - primes.begin())};
    }
};

inline PrimeTable primes_up_to(u64 limit) {
    if (limit < 2) throw std::invalid_argument("primes_up_to: limit must be >= 2");
    PrimeTable table;
    table.limit = limit;
    table.primes.push_back(2);
    // Odd-only byte sieve: index i <-> 2i + 3.
    const u64 count = limit >= 3 ? (limit - 3) / 2 + 1 : 0;
    std::vector<std::uint8_t> composite(count, 0);
    for (u64 i = 0; i < count; ++i) {
        if (composite[i]) continue;
        const u64 p = 2 * i + 3;
        table.primes.push_back(p);
        if (p > limit / p) continue;
        for (u64 j = (p * p - 3) / 2; j < count; j += p) composite[j] = 1;
    }
    return table;
}

struct SieveWindow {
    u64 lo = 0;
    u64 hi = 0;
    std::vector<double> lambda;
    std::vector<bool> prime_flags;

    u64 size() const { return hi - lo; }
    bool contains(u64 n) const { return n >= lo && n < hi; }
    double lambda_at(u64 n) const { return lambda.at(n - lo); }
    bool is_prime_at(u64 n) const { return prime_flags.at(n - lo); }
};

/// Reusable sieving kernel for the hot loops. Holds its own scratch so a
/// worker can sieve many short windows without reallocating.
class LambdaSiever {
public:
    explicit LambdaSiever(const PrimeTable& table) : table_(&table) {}

    /// Writes Λ(lo + i) into out[i] for 0 <= i < hi - lo. When `primes` is
    /// non-null, also writes the primality bit of lo + i into (*primes)[i].
    void fill(u64 lo, u64 hi, std::span<double> out, std::vector<bool>* primes = nullptr) {
        if (lo < 2 || hi <= lo) throw std::invalid_argument("sieve: require 2 <= lo < hi");
        if (hi - 1 > kValueCap) throw std::overflow_error("sieve: window exceeds 2^63-1");
        const u64 len = hi - lo;
        if (out.size() < len) throw std::invalid_argument("sieve: output span too short");
        const u64 root = integer_sqrt(hi - 1);
        if (table_->limit < root)
            throw std::invalid_argument("sieve: prime table limit " + std::to_string(table_->limit) +
                                        " below sqrt(hi) = " + std::to_string(root));

        composite_.assign(len, 0);
        const auto base = table_->up_to(root);
        for (u64 p : base) {
            u64 start = (lo + p - 1) / p * p;
            start = std::max(start, p * p);
            for (u64 j = start; j < hi; j += p) composite_[j - lo] = 1;
        }
        for (u64 i = 0; i < len; ++i)
            out[i] = composite_[i] ? 0.0 : std::log(static_cast<double>(lo + i));
        if (primes) {
            primes->assign(len, false);
            for (u64 i = 0; i < len; ++i) (*primes)[i] = !composite_[i];
        }
        for (u64 p : base) {
            const double logp = std::log(static_cast<double>(p));
            for (u64 pe = p * p; pe < hi; pe *= p) {
                if (pe >= lo) out[pe - lo] = logp;
                if (pe > (hi - 1) / p) break;
            }
        }
    }

private:
    const PrimeTable* table_;
    std::vector<std::uint8_t> composite_;
};

/// Λ and primality over [lo, hi). Requires table.limit >= integer_sqrt(hi).
inline SieveWindow sieve_window(u64 lo, u64 hi, const PrimeTable& table) {
    if (lo < 2 || hi <= lo) throw std::invalid_argument("sieve_window: require 2 <= lo < hi");
    if (table.limit < integer_sqrt(hi))
        throw std::invalid_argument("sieve_window: prime table limit below integer_sqrt(hi)");
    SieveWindow w;
    w.lo = lo;
    w.hi = hi;
    w.lambda.resize(hi - lo);
    LambdaSiever siever(table);
    siever.fill(lo, hi, w.lambda, &w.prime_flags);
    return w;
}

/// Calls fn(p) for every prime p in [lo, hi), ascending, using segments of
/// bounded size so hi can be large without a full table.
template <class Fn>
void for_each_prime(u64 lo, u64 hi, Fn&& fn, u64 segment = u64{1} << 20) {
    if (hi <= lo) return;
    lo = std::max<u64>(lo, 2);
    const PrimeTable base = primes_up_to(std::max<u64>(2, integer_sqrt(hi)));
    LambdaSiever siever(base);
    std::vector<double> lambda;
    std::vector<bool> flags;
    for (u64 a = lo; a < hi; a += segment) {
        const u64 b = std::min(hi, a + segment);
        lambda.resize(b - a);
        siever.fill(a, b, lambda, &flags);
        for (u64 i = 0; i < b - a; ++i)
            if (flags[i]) fn(a + i);
    }
}

}  // namespace qprog
