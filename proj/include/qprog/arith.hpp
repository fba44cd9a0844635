// arith.hpp
// Exact 64-bit integer kernel: residue symbols, multiplicative functions,
// integer roots, deterministic primality and the von Mangoldt function.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qprog {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

/// Largest value any scanned quantity may reach.
inline constexpr u64 kValueCap = static_cast<u64>(std::numeric_limits<i64>::max());

// -------------------------------------------------------
// Overflow-checked arithmetic
// -------------------------------------------------------

inline u64 checked_add(u64 a, u64 b) {
    u64 r;
    if (__builtin_add_overflow(a, b, &r) || r > kValueCap)
        throw std::overflow_error("checked_add: result exceeds 2^63-1");
    return r;
}

inline u64 checked_mul(u64 a, u64 b) {
    u64 r;
    if (__builtin_mul_overflow(a, b, &r) || r > kValueCap)
        throw std::overflow_error("checked_mul: result exceeds 2^63-1");
    return r;
}

// -------------------------------------------------------
// Integer roots
// -------------------------------------------------------

/// floor(sqrt(n)), exact over the whole 64-bit range.
constexpr u64 integer_sqrt(u64 n) {
    if (n < 2) return n;
    // Newton from above; converges monotonically for integer iteration.
    u64 x = u64{1} << ((std::bit_width(n) + 1) / 2);
    while (true) {
        u64 y = (x + n / x) / 2;
        if (y >= x) break;
        x = y;
    }
    while (static_cast<u128>(x) * x > n) --x;
    while (static_cast<u128>(x + 1) * (x + 1) <= n) ++x;
    return x;
}

/// base^e, saturating at `limit + 1` once the power exceeds `limit`.
constexpr u128 saturating_pow(u64 base, unsigned e, u64 limit) {
    u128 acc = 1;
    for (unsigned i = 0; i < e; ++i) {
        acc *= base;
        if (acc > limit) return static_cast<u128>(limit) + 1;
    }
    return acc;
}

/// floor(n^(1/e)) for e >= 1, exact.
inline u64 integer_root(u64 n, unsigned e) {
    if (e == 0) throw std::invalid_argument("integer_root: exponent must be >= 1");
    if (e == 1 || n < 2) return n;
    if (e == 2) return integer_sqrt(n);
    if (e >= 64) return 1;
    auto r = static_cast<u64>(std::pow(static_cast<double>(n), 1.0 / e));
    // Correction step: the floating estimate may be off by a few units.
    while (r > 0 && saturating_pow(r, e, n) > n) --r;
    while (saturating_pow(r + 1, e, n) <= n) ++r;
    return r;
}

// -------------------------------------------------------
// Residue symbols
// -------------------------------------------------------

/// Kronecker symbol (a/n) for n >= 0. Agrees with the Jacobi symbol for
/// odd n and with the Legendre symbol for odd prime n.
constexpr int kronecker(i64 a, u64 n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    int result = 1;
    if ((n & 1) == 0) {
        if ((a & 1) == 0) return 0;
        int v = std::countr_zero(n);
        n >>= v;
        if (v & 1) {
            // (a/2) = +1 for a = ±1 mod 8, -1 for a = ±3 mod 8.
            auto r8 = static_cast<int>(((a % 8) + 8) % 8);
            if (r8 == 3 || r8 == 5) result = -result;
        }
    }
    if (n == 1) return result;
    // Jacobi symbol; periodic in a modulo odd n.
    u64 x = a >= 0 ? static_cast<u64>(a) % n : n - 1 - static_cast<u64>(-(a + 1)) % n;
    u64 y = n;
    while (x != 0) {
        int tz = std::countr_zero(x);
        x >>= tz;
        if (tz & 1) {
            u64 y8 = y & 7;
            if (y8 == 3 || y8 == 5) result = -result;
        }
        if ((x & 3) == 3 && (y & 3) == 3) result = -result;
        std::swap(x, y);
        x %= y;
    }
    return y == 1 ? result : 0;
}

// -------------------------------------------------------
// Small factorization and multiplicative functions
// -------------------------------------------------------

struct PrimePower {
    u64 prime;
    unsigned exponent;
};

/// Trial-division factorization; intended for moduli and arguments of
/// multiplicative functions, not for scanned values.
inline std::vector<PrimePower> factorize(u64 n) {
    std::vector<PrimePower> out;
    if (n < 2) return out;
    auto take = [&](u64 p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) out.push_back({p, e});
    };
    take(2);
    take(3);
    for (u64 p = 5; p <= n / p; p += 6) {
        take(p);
        take(p + 2);
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

inline int mobius(u64 n) {
    if (n == 0) throw std::invalid_argument("mobius: n must be >= 1");
    int sign = 1;
    for (const auto& [p, e] : factorize(n)) {
        if (e > 1) return 0;
        sign = -sign;
    }
    return sign;
}

inline u64 euler_phi(u64 n) {
    if (n == 0) throw std::invalid_argument("euler_phi: n must be >= 1");
    u64 phi = n;
    for (const auto& [p, e] : factorize(n)) phi = phi / p * (p - 1);
    return phi;
}

inline bool is_square_free(u64 n) {
    for (const auto& [p, e] : factorize(n))
        if (e > 1) return false;
    return true;
}

// -------------------------------------------------------
// Deterministic Miller-Rabin
// -------------------------------------------------------

constexpr u64 mul_mod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

constexpr u64 pow_mod(u64 base, u64 exp, u64 m) {
    u64 result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    return result;
}

/// Correct for all n < 2^64: the first twelve primes are a witness set
/// up to 3.3e24.
constexpr bool is_prime(u64 n) {
    constexpr u64 kWitnesses[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    if (n < 2) return false;
    for (u64 p : kWitnesses) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    u64 d = n - 1;
    int s = std::countr_zero(d);
    d >>= s;
    for (u64 a : kWitnesses) {
        u64 x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

/// If n = p^e for a prime p and e >= 1, returns p; otherwise 0.
inline u64 prime_power_base(u64 n) {
    if (n < 2) return 0;
    // Largest exponent first, so the root found is not itself a power.
    for (unsigned e = static_cast<unsigned>(std::bit_width(n)) - 1; e >= 2; --e) {
        u64 r = integer_root(n, e);
        if (r >= 2 && saturating_pow(r, e, n) == n) return is_prime(r) ? r : 0;
    }
    return is_prime(n) ? n : 0;
}

/// Λ(n): log p when n = p^e, else 0.
inline double von_mangoldt(u64 n) {
    if (n == 0) throw std::invalid_argument("von_mangoldt: n must be >= 1");
    u64 p = prime_power_base(n);
    return p ? std::log(static_cast<double>(p)) : 0.0;
}

}  // namespace qprog
