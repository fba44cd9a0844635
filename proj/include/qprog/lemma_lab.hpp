// lemma_lab.hpp
// Numerical checks of the auxiliary estimates: exact identities are
// checked exactly, inequalities exhaustively or by seeded sampling, and
// every check reports the extremal ratio it saw.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "characters.hpp"
#include "sieve.hpp"
#include "sieve_cache.hpp"
#include "singular_series.hpp"

namespace qprog {

enum class LemmaId { LS_AVG, LS_SINGLE, POLYA_VINOGRADOV, MEAN_SQ, MEAN_SQ_TWISTED, SHORT_AP, PHI_AVG, LEGENDRE_SUM };

inline const char* to_string(LemmaId id) {
    switch (id) {
        case LemmaId::LS_AVG: return "LS_AVG";
        case LemmaId::LS_SINGLE: return "LS_SINGLE";
        case LemmaId::POLYA_VINOGRADOV: return "POLYA_VINOGRADOV";
        case LemmaId::MEAN_SQ: return "MEAN_SQ";
        case LemmaId::MEAN_SQ_TWISTED: return "MEAN_SQ_TWISTED";
        case LemmaId::SHORT_AP: return "SHORT_AP";
        case LemmaId::PHI_AVG: return "PHI_AVG";
        case LemmaId::LEGENDRE_SUM: return "LEGENDRE_SUM";
    }
    return "?";
}

struct LemmaReport {
    LemmaId lemma_id{};
    std::vector<std::pair<std::string, std::string>> params;
    double observed = 0;
    double reference = 0;
    double ratio = 0;
    bool pass = false;
    std::optional<u64> seed;

    std::string params_string() const {
        std::string s;
        for (const auto& [k, v] : params) {
            if (!s.empty()) s += ';';
            s += k + '=' + v;
        }
        return s;
    }
};

using Coeffs = std::vector<std::complex<double>>;

namespace detail {

// Shortest text that reads back to the same double.
inline std::string num(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}
inline std::string num(u64 x) { return std::to_string(x); }
inline std::string num(i64 x) { return std::to_string(x); }

/// Unit complex numbers with phases drawn from the engine.
inline Coeffs random_unit_coeffs(std::size_t n, std::mt19937_64& rng) {
    Coeffs a(n);
    for (auto& c : a) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        c = std::polar(1.0, 2.0 * std::numbers::pi * u);
    }
    return a;
}

inline double norm_sq(std::span<const std::complex<double>> a) {
    double s = 0;
    for (const auto& c : a) s += std::norm(c);
    return s;
}

/// Σ_{χ primitive mod q} |Σ_{n=M+1}^{M+N} a_n χ(n)|^2, via residue folding.
inline double primitive_energy(const CharacterTable& table, i64 M, std::span<const std::complex<double>> a) {
    const u64 q = table.modulus();
    std::vector<std::complex<double>> folded(q);
    const auto qi = static_cast<i64>(q);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const i64 n = M + 1 + static_cast<i64>(i);
        folded[static_cast<u64>(((n % qi) + qi) % qi)] += a[i];
    }
    double total = 0;
    for (const auto& chi : table.characters()) {
        if (!chi.is_primitive()) continue;
        std::complex<double> s{};
        for (u64 r = 0; r < q; ++r)
            if (folded[r] != std::complex<double>{}) s += folded[r] * chi.at_residue(r);
        total += std::norm(s);
    }
    return total;
}

}  // namespace detail

// -------------------------------------------------------
// Legendre-symbol sum over a square-free modulus
// -------------------------------------------------------

/// Σ_{a mod l, (a,l)=1} Σ_{m mod l} ((m^2 - a)/l) against μ(l)φ(l).
/// The symbol is the Jacobi symbol, so l must be odd and square-free.
inline LemmaReport legendre_sum_check(u64 l) {
    if (l == 0) throw std::invalid_argument("legendre_sum_check: l must be >= 1");
    if (!is_square_free(l)) throw std::invalid_argument("legendre_sum_check: l must be square-free");
    if (l % 2 == 0) throw std::invalid_argument("legendre_sum_check: the Jacobi symbol needs odd l");
    std::vector<int> symbol(l);
    for (u64 r = 0; r < l; ++r) symbol[r] = kronecker(static_cast<i64>(r), l);
    i64 sum = 0;
    for (u64 a = 0; a < l; ++a) {
        if (std::gcd(a, l) != 1) continue;
        for (u64 m = 0; m < l; ++m) {
            const u64 sq = m * m % l;
            sum += symbol[(sq + l - a) % l];
        }
    }
    const i64 expected = static_cast<i64>(mobius(l)) * static_cast<i64>(euler_phi(l));
    LemmaReport r;
    r.lemma_id = LemmaId::LEGENDRE_SUM;
    r.params = {{"l", detail::num(l)}};
    r.observed = static_cast<double>(sum);
    r.reference = static_cast<double>(expected);
    r.ratio = expected != 0 ? r.observed / r.reference : 0.0;
    r.pass = sum == expected;
    return r;
}

// -------------------------------------------------------
// Average of q / φ(4q)
// -------------------------------------------------------

/// Σ_{q<=x} q/φ(4q) against (x/2) C; passes when the deviation is at most c log x.
inline LemmaReport phi_average_check(u64 x, double c = 5.0, double constant = 0.0) {
    if (x < 1) throw std::invalid_argument("phi_average_check: x must be >= 1");
    if (constant <= 0) constant = main_term_constant(1'000'000);
    // Totient sieve up to x; φ(4q) = 2φ(q) for odd q and 4φ(q) for even q.
    std::vector<u64> phi(x + 1);
    for (u64 i = 0; i <= x; ++i) phi[i] = i;
    for (u64 p = 2; p <= x; ++p) {
        if (phi[p] != p) continue;
        for (u64 j = p; j <= x; j += p) phi[j] -= phi[j] / p;
    }
    long double sum = 0;
    for (u64 q = 1; q <= x; ++q) {
        const u64 phi4q = (q % 2 ? 2 : 4) * phi[q];
        sum += static_cast<long double>(q) / static_cast<long double>(phi4q);
    }
    LemmaReport r;
    r.lemma_id = LemmaId::PHI_AVG;
    r.params = {{"x", detail::num(x)}, {"c", detail::num(c)}};
    r.observed = static_cast<double>(sum);
    r.reference = static_cast<double>(x) / 2.0 * constant;
    const double dev = std::abs(r.observed - r.reference);
    const double logx = std::log(static_cast<double>(x));
    r.ratio = logx > 0 ? dev / logx : std::numeric_limits<double>::infinity();
    r.pass = dev <= c * logx;
    return r;
}

// -------------------------------------------------------
// Large sieve inequalities
// -------------------------------------------------------

/// Σ_{Q<=q<=2Q} 1/φ(q) Σ*_χ |Σ a_n χ(n)|^2 against (Q + N/Q) Σ|a_n|^2, over
/// the given coefficients (if any) plus `trials` random unit vectors.
inline LemmaReport large_sieve_avg_check(u64 Q, i64 M, u64 N, const Coeffs& coeffs, u64 trials, u64 seed = 1,
                                         double c0 = 4.0) {
    if (Q < 1) throw std::invalid_argument("large_sieve_avg_check: Q must be >= 1");
    if (N < 1) throw std::invalid_argument("large_sieve_avg_check: N must be >= 1");
    if (!coeffs.empty() && coeffs.size() != N)
        throw std::invalid_argument("large_sieve_avg_check: coefficient count must equal N");
    std::vector<CharacterTable> tables;
    std::vector<double> inv_phi;
    for (u64 q = Q; q <= 2 * Q; ++q) {
        tables.push_back(CharacterTable::build(q, CharacterTable::kDefaultCap, true));
        inv_phi.push_back(1.0 / static_cast<double>(euler_phi(q)));
    }
    const double qd = static_cast<double>(Q), nd = static_cast<double>(N);
    LemmaReport r;
    r.lemma_id = LemmaId::LS_AVG;
    r.params = {{"Q", detail::num(Q)}, {"M", detail::num(M)}, {"N", detail::num(N)},
                {"trials", detail::num(trials)}, {"c0", detail::num(c0)}};
    r.seed = seed;
    r.ratio = -1;
    auto evaluate = [&](const Coeffs& a) {
        double lhs = 0;
        for (std::size_t i = 0; i < tables.size(); ++i) lhs += inv_phi[i] * detail::primitive_energy(tables[i], M, a);
        const double rhs = (qd + nd / qd) * detail::norm_sq(a);
        const double ratio = rhs > 0 ? lhs / rhs : 0.0;
        if (ratio > r.ratio) {
            r.ratio = ratio;
            r.observed = lhs;
            r.reference = rhs;
        }
    };
    if (!coeffs.empty()) evaluate(coeffs);
    std::mt19937_64 rng(seed);
    for (u64 i = 0; i < trials; ++i) evaluate(detail::random_unit_coeffs(N, rng));
    r.ratio = std::max(r.ratio, 0.0);
    r.pass = r.ratio <= c0;
    return r;
}

/// Σ*_{χ mod q} |Σ a_n χ(n)|^2 <= (q + N) Σ|a_n|^2 with constant 1.
inline LemmaReport large_sieve_single_check(const CharacterTable& table, i64 M, const Coeffs& coeffs) {
    const u64 q = table.modulus();
    const u64 N = coeffs.size();
    LemmaReport r;
    r.lemma_id = LemmaId::LS_SINGLE;
    r.params = {{"q", detail::num(q)}, {"M", detail::num(M)}, {"N", detail::num(N)}};
    r.observed = detail::primitive_energy(table, M, coeffs);
    r.reference = static_cast<double>(q + N) * detail::norm_sq(coeffs);
    r.ratio = r.reference > 0 ? r.observed / r.reference : 0.0;
    r.pass = r.observed <= r.reference * (1.0 + 1e-9);
    return r;
}

inline LemmaReport large_sieve_single_check(u64 q, i64 M, u64 N, const Coeffs& coeffs) {
    if (q < 2) throw std::invalid_argument("large_sieve_single_check: q must be >= 2");
    if (coeffs.size() != N) throw std::invalid_argument("large_sieve_single_check: coefficient count must equal N");
    return large_sieve_single_check(CharacterTable::build(q), M, coeffs);
}

// -------------------------------------------------------
// Polya-Vinogradov
// -------------------------------------------------------

/// max over non-principal χ and all windows (M, M+N], N <= q, of
/// |Σ χ(n)| against 6 sqrt(q) log q. Partial sums are q-periodic, so the
/// maximum is the largest gap between two partial sums in one period.
inline LemmaReport polya_vinogradov_check(u64 q) {
    if (q < 3) throw std::invalid_argument("polya_vinogradov_check: q must be >= 3");
    const auto table = CharacterTable::build(q);
    double best = 0;
    std::vector<std::complex<double>> S(q);
    for (const auto& chi : table.characters()) {
        if (chi.is_principal()) continue;
        std::complex<double> acc{};
        for (u64 j = 0; j < q; ++j) {
            S[j] = acc;  // Σ_{1<=n<=j} χ(n)
            acc += chi.at_residue((j + 1) % q);
        }
        double local = 0;
        for (u64 a = 0; a < q; ++a)
            for (u64 b = a + 1; b < q; ++b) local = std::max(local, std::norm(S[b] - S[a]));
        best = std::max(best, std::sqrt(local));
    }
    const double qd = static_cast<double>(q);
    LemmaReport r;
    r.lemma_id = LemmaId::POLYA_VINOGRADOV;
    r.params = {{"q", detail::num(q)}};
    r.observed = best;
    r.reference = 6.0 * std::sqrt(qd) * std::log(qd);
    r.ratio = r.observed / r.reference;
    r.pass = r.observed <= r.reference;
    return r;
}

// -------------------------------------------------------
// Primes in progressions over short intervals
// -------------------------------------------------------

/// Σ_{t<n<=t+δ, n≡a (l)} Λ(n) against δ/φ(l).
inline LemmaReport short_ap_check(u64 t, u64 delta, u64 l, i64 a, double tol = 0.05,
                                  const SieveCache* cache = nullptr, std::vector<std::string>* warnings = nullptr) {
    if (l < 1) throw std::invalid_argument("short_ap_check: l must be >= 1");
    if (delta < 1) throw std::invalid_argument("short_ap_check: delta must be >= 1");
    const auto li = static_cast<i64>(l);
    const u64 ar = static_cast<u64>(((a % li) + li) % li);
    if (std::gcd(ar, l) != 1) throw std::invalid_argument("short_ap_check: gcd(a, l) must be 1");
    const u64 lo = checked_add(t, 1), hi = checked_add(lo, delta);
    const PrimeTable table = primes_up_to(std::max<u64>(2, integer_sqrt(hi)));
    const SieveWindow w = cache ? cache->get_or_compute(lo, hi, table, warnings) : sieve_window(lo, hi, table);
    double sum = 0;
    for (u64 n = lo + (ar + l - lo % l) % l; n < hi; n += l) sum += w.lambda_at(n);
    LemmaReport r;
    r.lemma_id = LemmaId::SHORT_AP;
    r.params = {{"t", detail::num(t)}, {"delta", detail::num(delta)}, {"l", detail::num(l)},
                {"a", detail::num(a)}, {"tol", detail::num(tol)}};
    r.observed = sum;
    r.reference = static_cast<double>(delta) / static_cast<double>(euler_phi(l));
    r.ratio = r.observed / r.reference;
    r.pass = std::abs(r.ratio - 1.0) <= tol;
    return r;
}

// -------------------------------------------------------
// Mean squares of Λ over short intervals
// -------------------------------------------------------

struct MeanSquareOptions {
    double C0 = 2.0;
    bool exact = false;  // average over every integer t in [z, 2z) instead of sampling
};

namespace detail {

/// (1/z) ∫_z^{2z} |Σ_{t<n<=t+M} w(n) Λ(n) - main|^2 dt, by seeded sampling or exactly.
template <class Weight>
double mean_square(u64 z, u64 M, u64 samples, u64 seed, bool exact, double main, Weight&& weight) {
    if (M == 0) return 0.0;
    const u64 top = checked_add(checked_add(2 * z, M), 1);
    const PrimeTable table = primes_up_to(std::max<u64>(2, integer_sqrt(top)));
    LambdaSiever siever(table);
    if (exact) {
        // The integrand is constant on [j, j+1) for integer j.
        std::vector<double> lam(z + M);
        siever.fill(z + 1, 2 * z + M + 1, lam);
        std::complex<double> s{};
        for (u64 n = z + 1; n <= z + M; ++n) s += weight(n) * lam[n - z - 1];
        double acc = 0;
        for (u64 j = z; j < 2 * z; ++j) {
            acc += std::norm(s - main);
            s += weight(j + M + 1) * lam[j + M - z];
            s -= weight(j + 1) * lam[j - z];
        }
        return acc / static_cast<double>(z);
    }
    if (samples < 1) throw std::invalid_argument("mean square: samples must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> lam(M);
    double acc = 0;
    for (u64 i = 0; i < samples; ++i) {
        const u64 t = z + rng() % z;
        siever.fill(t + 1, t + M + 1, lam);
        std::complex<double> s{};
        for (u64 j = 0; j < M; ++j) s += weight(t + 1 + j) * lam[j];
        acc += std::norm(s - main);
    }
    return acc / static_cast<double>(samples);
}

inline u64 round_pow(u64 z, double exponent) {
    return static_cast<u64>(std::llround(std::pow(static_cast<double>(z), exponent)));
}

}  // namespace detail

/// (1/z) ∫ |ψ(t+M) - ψ(t) - M|^2 dt against δ^2 / (log z)^C0, δ = z^delta_exp, M = M_frac δ.
inline LemmaReport mean_square_check(u64 z, double delta_exp, double M_frac, u64 samples, u64 seed,
                                     MeanSquareOptions opt = {}) {
    if (z < 3) throw std::invalid_argument("mean_square_check: z must be >= 3");
    if (!(M_frac >= 0 && M_frac <= 1)) throw std::invalid_argument("mean_square_check: M_frac must lie in [0, 1]");
    const u64 delta = detail::round_pow(z, delta_exp);
    const auto M = static_cast<u64>(std::floor(M_frac * static_cast<double>(delta)));
    LemmaReport r;
    r.lemma_id = LemmaId::MEAN_SQ;
    r.params = {{"z", detail::num(z)}, {"delta_exp", detail::num(delta_exp)}, {"M_frac", detail::num(M_frac)},
                {"delta", detail::num(delta)}, {"M", detail::num(M)}, {"samples", detail::num(samples)},
                {"C0", detail::num(opt.C0)}, {"exact", opt.exact ? "1" : "0"}};
    r.seed = seed;
    r.observed = detail::mean_square(z, M, samples, seed, opt.exact, static_cast<double>(M), [](u64) { return 1.0; });
    const double dd = static_cast<double>(delta);
    r.reference = dd * dd / std::pow(std::log(static_cast<double>(z)), opt.C0);
    r.ratio = r.observed / r.reference;
    r.pass = r.observed <= r.reference;
    return r;
}

/// As mean_square_check with integrand |Σ Λ(n) χ(n)|^2 for a non-principal χ mod q.
inline LemmaReport mean_square_twisted_check(u64 z, double delta_exp, double M_frac, u64 q, std::size_t chi_index,
                                             u64 samples, u64 seed, MeanSquareOptions opt = {}) {
    if (z < 3) throw std::invalid_argument("mean_square_twisted_check: z must be >= 3");
    if (!(M_frac >= 0 && M_frac <= 1))
        throw std::invalid_argument("mean_square_twisted_check: M_frac must lie in [0, 1]");
    const auto table = CharacterTable::build(q);
    if (chi_index >= table.size()) throw std::invalid_argument("mean_square_twisted_check: chi_index out of range");
    const Character& chi = table[chi_index];
    if (chi.is_principal()) throw std::invalid_argument("mean_square_twisted_check: principal character rejected");
    const u64 delta = detail::round_pow(z, delta_exp);
    const auto M = static_cast<u64>(std::floor(M_frac * static_cast<double>(delta)));
    LemmaReport r;
    r.lemma_id = LemmaId::MEAN_SQ_TWISTED;
    r.params = {{"z", detail::num(z)}, {"delta_exp", detail::num(delta_exp)}, {"M_frac", detail::num(M_frac)},
                {"q", detail::num(q)}, {"chi_index", detail::num(static_cast<u64>(chi_index))},
                {"delta", detail::num(delta)}, {"M", detail::num(M)}, {"samples", detail::num(samples)},
                {"C0", detail::num(opt.C0)}, {"exact", opt.exact ? "1" : "0"}};
    r.seed = seed;
    r.observed = detail::mean_square(z, M, samples, seed, opt.exact, 0.0,
                                     [&](u64 n) { return chi.at_residue(n % q); });
    const double dd = static_cast<double>(delta);
    r.reference = dd * dd / std::pow(std::log(static_cast<double>(z)), opt.C0);
    r.ratio = r.observed / r.reference;
    r.pass = r.observed <= r.reference;
    return r;
}

}  // namespace qprog
