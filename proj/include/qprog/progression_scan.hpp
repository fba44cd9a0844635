// progression_scan.hpp
// Sums of Λ(n^2 + k) and counts of n^2 + k over a window (t, t + Δ], for
// every k <= K at once, and the second-moment statistics built on them.
//
// For fixed n the admissible values n^2 + k form one contiguous run of
// length <= K, so each n costs a single segmented sieve call instead of K
// primality tests. Work is split over blocks of k; every per-k sum is
// accumulated in ascending n inside one block, which makes the output
// independent of the thread count bit for bit.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "arith.hpp"
#include "parallel.hpp"
#include "sieve.hpp"
#include "singular_series.hpp"

namespace qprog {

struct ScanConfig {
    u64 z = 0;
    u64 K = 0;
    std::optional<u64> delta;
    double B = 1.0;
};

/// Parameter-range warnings (never errors): K in [z^{1/2}, z/2], Δ in [z^{2/3}, z].
inline std::vector<std::string> range_warnings(const ScanConfig& c) {
    std::vector<std::string> w;
    const double z = static_cast<double>(c.z);
    const double K = static_cast<double>(c.K);
    if (K < std::sqrt(z)) w.push_back("K below z^(1/2): outside the range the moment bound covers");
    if (K > z / 2) w.push_back("K above z/2: outside the range the moment bound covers");
    if (c.delta) {
        const double d = static_cast<double>(*c.delta);
        if (d < std::cbrt(z * z)) w.push_back("delta below z^(2/3): outside the short-segment range");
        if (d > z) w.push_back("delta above z: outside the short-segment range");
    }
    return w;
}

inline void validate(const ScanConfig& c) {
    if (c.z < 3) throw std::invalid_argument("scan config: z must be >= 3");
    if (c.K < 1) throw std::invalid_argument("scan config: K must be >= 1");
    if (!(c.B >= 0)) throw std::invalid_argument("scan config: B must be >= 0");
}

struct ProgressionRow {
    u64 k = 0;
    double lambda_sum = 0;
    u64 count = 0;
    double singular = 0;
    double residual = 0;
};

struct RuntimeStats {
    double seconds = 0;
    u64 cells = 0;       // integers sieved
    u64 sieve_calls = 0;
};

struct MomentReport {
    ScanConfig config;
    u64 P = 0;
    double lhs = 0;
    double bound = 0;
    double ratio = 0;
    std::optional<u64> exceptional_count;
    double hl_ratio_mean = 0;  // mean of A_k / (S(k) c_k) over k with c_k > 0
    std::optional<double> lhs_double_p;
    u64 t_samples = 0;
    std::optional<u64> seed;
    double sampling_stderr = 0;
    std::vector<std::pair<u64, double>> samples;  // (t, inner sum)
    std::vector<std::string> warnings;
    RuntimeStats stats;
};

// -------------------------------------------------------
// Pointwise evaluation
// -------------------------------------------------------

namespace detail {
// #{n >= 1 : n^2 <= x}
inline u64 squares_upto(__int128 x) { return x < 0 ? 0 : integer_sqrt(static_cast<u64>(x)); }
}  // namespace detail

/// #{n >= 1 : t < n^2 + k <= t + delta}.
inline u64 window_count(u64 k, u64 t, u64 delta) {
    const auto top = static_cast<__int128>(t) + delta - k;
    const auto bottom = static_cast<__int128>(t) - k;
    if (top > static_cast<__int128>(kValueCap)) throw std::overflow_error("window_count: t + delta exceeds 2^63-1");
    return detail::squares_upto(top) - detail::squares_upto(bottom);
}

/// Σ Λ(n^2 + k) over t < n^2 + k <= t + delta, by per-term von_mangoldt.
inline double window_lambda_sum(u64 k, u64 t, u64 delta) {
    checked_add(checked_add(t, delta), k);
    const u64 n_lo = detail::squares_upto(static_cast<__int128>(t) - k) + 1;
    const u64 n_hi = detail::squares_upto(static_cast<__int128>(t) + delta - k);
    double sum = 0;
    for (u64 n = n_lo; n <= n_hi; ++n) sum += von_mangoldt(checked_add(checked_mul(n, n), k));
    return sum;
}

// -------------------------------------------------------
// All-k window scan
// -------------------------------------------------------

struct WindowSums {
    u64 t = 0;
    u64 delta = 0;
    std::vector<double> lambda_sum;  // index k - 1
    std::vector<u64> count;
    RuntimeStats stats;
};

class ProgressionScanner {
public:
    static constexpr u64 kBlock = u64{1} << 15;

    /// `max_top` bounds every t + Δ (+K) this scanner will be asked for.
    explicit ProgressionScanner(u64 max_top, unsigned threads = 1)
        : table_(primes_up_to(std::max<u64>(2, integer_sqrt(max_top) + 1))), max_top_(max_top),
          threads_(std::max(1u, threads)) {}

    const PrimeTable& primes() const { return table_; }
    unsigned threads() const { return threads_; }

    WindowSums scan(u64 t, u64 delta, u64 K) const {
        if (K < 1) throw std::invalid_argument("scan: K must be >= 1");
        const u64 top = checked_add(checked_add(t, delta), K);
        if (top > max_top_) throw std::invalid_argument("scan: window top exceeds the scanner's prime table");
        const auto start = std::chrono::steady_clock::now();

        WindowSums out;
        out.t = t;
        out.delta = delta;
        out.lambda_sum.assign(K, 0.0);
        out.count.assign(K, 0);
        const u64 blocks = (K + kBlock - 1) / kBlock;
        std::vector<RuntimeStats> block_stats(blocks);

        parallel_for(blocks, threads_, [&](std::size_t b) {
            const u64 ka = 1 + b * kBlock;
            const u64 kb = std::min(K, ka + kBlock - 1);
            LambdaSiever siever(table_);
            std::vector<double> buf(kb - ka + 1);
            auto& st = block_stats[b];
            // n with some k in [ka, kb] satisfying t < n^2 + k <= t + delta.
            const u64 n_lo = detail::squares_upto(static_cast<__int128>(t) - kb) + 1;
            const u64 n_hi = detail::squares_upto(static_cast<__int128>(t) + delta - ka);
            for (u64 n = n_lo; n <= n_hi; ++n) {
                const u64 sq = n * n;
                const u64 klo = sq > t ? ka : std::max(ka, t + 1 - sq);
                const u64 khi = std::min(kb, t + delta - sq);
                if (klo > khi) continue;
                siever.fill(sq + klo, sq + khi + 1, buf);
                ++st.sieve_calls;
                st.cells += khi - klo + 1;
                double* acc = out.lambda_sum.data() + (klo - 1);
                u64* cnt = out.count.data() + (klo - 1);
                for (u64 i = 0; i <= khi - klo; ++i) {
                    acc[i] += buf[i];
                    ++cnt[i];
                }
            }
        });

        for (const auto& st : block_stats) {
            out.stats.cells += st.cells;
            out.stats.sieve_calls += st.sieve_calls;
        }
        out.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return out;
    }

private:
    PrimeTable table_;
    u64 max_top_;
    unsigned threads_;
};

/// Σ_k (A_k - S(k) c_k)^2.
inline double moment_sum(const WindowSums& w, const std::vector<SingularValue>& singular) {
    if (singular.size() < w.lambda_sum.size()) throw std::invalid_argument("moment_sum: too few singular values");
    double s = 0;
    for (std::size_t i = 0; i < w.lambda_sum.size(); ++i) {
        const double r = w.lambda_sum[i] - singular[i].value * static_cast<double>(w.count[i]);
        s += r * r;
    }
    return s;
}

inline std::vector<ProgressionRow> make_rows(const WindowSums& w, const std::vector<SingularValue>& singular) {
    if (singular.size() < w.lambda_sum.size()) throw std::invalid_argument("make_rows: too few singular values");
    std::vector<ProgressionRow> rows(w.lambda_sum.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& r = rows[i];
        r.k = i + 1;
        r.lambda_sum = w.lambda_sum[i];
        r.count = w.count[i];
        r.singular = singular[i].value;
        r.residual = r.lambda_sum - r.singular * static_cast<double>(r.count);
    }
    return rows;
}

/// Window (z, 2z], or (z, z + Δ] when the config carries a delta.
inline std::vector<ProgressionRow> scan_all_k(const ScanConfig& config, const std::vector<SingularValue>& singular,
                                              unsigned threads = 1, RuntimeStats* stats = nullptr) {
    validate(config);
    const u64 delta = config.delta.value_or(config.z);
    ProgressionScanner scanner(checked_add(checked_add(config.z, delta), config.K), threads);
    auto w = scanner.scan(config.z, delta, config.K);
    if (stats) *stats = w.stats;
    return make_rows(w, singular);
}

inline std::vector<ProgressionRow> scan_all_k(const ScanConfig& config, u64 P = 100'000, unsigned threads = 1) {
    validate(config);
    return scan_all_k(config, batch_singular_series(config.K, P, threads), threads);
}

/// #{k : |A_k - S(k) c_k| > sqrt(z) / (log z)^B}.
inline u64 exceptional_set(const std::vector<ProgressionRow>& rows, u64 z, double B) {
    const double zd = static_cast<double>(z);
    const double threshold = std::sqrt(zd) / std::pow(std::log(zd), B);
    return static_cast<u64>(
        std::count_if(rows.begin(), rows.end(), [&](const ProgressionRow& r) { return std::abs(r.residual) > threshold; }));
}

inline double rows_lhs(const std::vector<ProgressionRow>& rows) {
    double s = 0;
    for (const auto& r : rows) s += r.residual * r.residual;
    return s;
}

inline double hl_ratio_mean(const std::vector<ProgressionRow>& rows) {
    double s = 0;
    u64 n = 0;
    for (const auto& r : rows) {
        if (r.count == 0) continue;
        s += r.lambda_sum / (r.singular * static_cast<double>(r.count));
        ++n;
    }
    return n ? s / static_cast<double>(n) : 0.0;
}

struct Theorem1Result {
    MomentReport report;
    std::vector<ProgressionRow> rows;
};

/// Σ_{k<=K} (A_k - S(k) c_k)^2 over (z, 2z] against K z / (log z)^B.
inline Theorem1Result theorem1_moment(ScanConfig config, u64 P = 100'000, unsigned threads = 1,
                                      bool p_sensitivity = false) {
    validate(config);
    config.delta.reset();
    const auto start = std::chrono::steady_clock::now();
    const u64 table_limit = p_sensitivity ? 2 * P : P;
    const PrimeTable ptable = primes_up_to(table_limit);
    const auto singular = batch_singular_series(config.K, P, ptable, threads);

    Theorem1Result out;
    auto& rep = out.report;
    rep.config = config;
    rep.P = P;
    rep.warnings = range_warnings(config);
    out.rows = scan_all_k(config, singular, threads, &rep.stats);
    const double z = static_cast<double>(config.z);
    rep.lhs = rows_lhs(out.rows);
    rep.bound = static_cast<double>(config.K) * z / std::pow(std::log(z), config.B);
    rep.ratio = rep.lhs / rep.bound;
    rep.exceptional_count = exceptional_set(out.rows, config.z, config.B);
    rep.hl_ratio_mean = hl_ratio_mean(out.rows);
    if (p_sensitivity) {
        const auto doubled = batch_singular_series(config.K, 2 * P, ptable, threads);
        double s = 0;
        for (const auto& r : out.rows) {
            const double res = r.lambda_sum - doubled[r.k - 1].value * static_cast<double>(r.count);
            s += res * res;
        }
        rep.lhs_double_p = s;
    }
    rep.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// Sample points in [z, 2z): evenly spaced from t = z, or uniform draws
/// when a seed is given.
inline std::vector<u64> sample_points(u64 z, u64 count, std::optional<u64> seed) {
    std::vector<u64> ts(count);
    if (seed) {
        std::mt19937_64 rng(*seed);
        for (auto& t : ts) t = z + rng() % z;
    } else {
        for (u64 i = 0; i < count; ++i)
            ts[i] = z + static_cast<u64>(static_cast<unsigned __int128>(i) * z / count);
    }
    return ts;
}

/// ∫_z^{2z} Σ_k |A_k(t,Δ) - S(k) c_k(t,Δ)|^2 dt estimated as z times the
/// sample mean, against Δ^2 K / (log z)^B. The integrand is constant on each
/// [j, j+1), so t_samples = z without a seed is the exact integral.
inline MomentReport theorem2_moment(const ScanConfig& config, u64 P = 100'000, u64 t_samples = 16,
                                    std::optional<u64> seed = std::nullopt, unsigned threads = 1) {
    validate(config);
    if (!config.delta) throw std::invalid_argument("theorem2_moment: config requires delta");
    if (t_samples < 1) throw std::invalid_argument("theorem2_moment: t_samples must be >= 1");
    const auto start = std::chrono::steady_clock::now();
    const u64 delta = *config.delta;
    const auto singular = batch_singular_series(config.K, P, threads);
    ProgressionScanner scanner(checked_add(checked_add(2 * config.z, delta), config.K), threads);

    MomentReport rep;
    rep.config = config;
    rep.P = P;
    rep.t_samples = t_samples;
    rep.seed = seed;
    rep.warnings = range_warnings(config);
    double sum = 0, sum_sq = 0;
    for (u64 t : sample_points(config.z, t_samples, seed)) {
        const auto w = scanner.scan(t, delta, config.K);
        const double inner = moment_sum(w, singular);
        rep.samples.emplace_back(t, inner);
        rep.stats.cells += w.stats.cells;
        rep.stats.sieve_calls += w.stats.sieve_calls;
        sum += inner;
        sum_sq += inner * inner;
    }
    const double n = static_cast<double>(t_samples);
    const double z = static_cast<double>(config.z);
    const double mean = sum / n;
    rep.lhs = z * mean;
    rep.bound = static_cast<double>(delta) * static_cast<double>(delta) * static_cast<double>(config.K) /
                std::pow(std::log(z), config.B);
    rep.ratio = rep.lhs / rep.bound;
    if (t_samples > 1) {
        const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1));
        rep.sampling_stderr = z * std::sqrt(var / n);
    }
    rep.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace qprog
