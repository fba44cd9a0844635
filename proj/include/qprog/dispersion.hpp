// dispersion.hpp
// The expansion
//   Σ_k |A_k - S(k) c_k|^2 = U(t) - 2 V(t) + W(t)
//   U = Σ_k A_k^2,  V = Σ_k S(k) c_k A_k,  W = Σ_k S(k)^2 c_k^2
// evaluated from one all-k window scan, together with the counting main
// term M~(t) and the common prediction (Δ^2 K / 4t) * C.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "arith.hpp"
#include "parallel.hpp"
#include "progression_scan.hpp"
#include "singular_series.hpp"

namespace qprog {

struct DispersionParams {
    u64 z = 0;
    u64 K = 0;
    u64 delta = 0;
    double B = 1.0;
    double C = 2.0;
    // derived
    double L = 1;   // (log z)^C
    double E = 0;   // Δ^2 K / (z (log z)^B)
    double D1 = 0;  // Δ / (8 L sqrt z)
    double D2 = 0;  // Δ / (2 sqrt z)

    static DispersionParams make(u64 z, u64 K, u64 delta, double B = 1.0, double C = 2.0) {
        if (z < 3) throw std::invalid_argument("dispersion: z must be >= 3");
        if (K < 1) throw std::invalid_argument("dispersion: K must be >= 1");
        if (!(C >= 0) || !(B >= 0)) throw std::invalid_argument("dispersion: B and C must be >= 0");
        DispersionParams p{z, K, delta, B, C};
        const double zd = static_cast<double>(z), dd = static_cast<double>(delta);
        const double logz = std::log(zd);
        p.L = std::pow(logz, C);
        p.E = dd * dd * static_cast<double>(K) / (zd * std::pow(logz, B));
        p.D1 = dd / (8.0 * p.L * std::sqrt(zd));
        p.D2 = dd / (2.0 * std::sqrt(zd));
        return p;
    }
};

struct DispersionSample {
    u64 t = 0;
    double U = 0, V = 0, W = 0;
    double combined = 0;       // U - 2V + W
    double direct_square = 0;  // Σ_k |A_k - S(k) c_k|^2
    double main_term = 0;      // Δ^2 K / (4t) * C
    double E = 0;

    double identity_residual() const { return std::abs(combined - direct_square); }
};

/// Integer m2 range [lo, hi] with m - 4q(sqrt m - q) < m2 <= m - 4q(sqrt(m-K) - q),
/// intersected with (t, t + Δ]. Bounds are decided by exact integer
/// comparisons; lo > hi means empty.
struct IntegerRange {
    i64 lo = 1, hi = 0;
    u64 size() const { return hi >= lo ? static_cast<u64>(hi - lo + 1) : 0; }
};

inline IntegerRange tilde_interval(u64 m, u64 q, u64 K, u64 t, u64 delta) {
    if (m < K) throw std::invalid_argument("tilde_interval: m - K < 0");
    using i128 = __int128;
    const i128 base = static_cast<i128>(m) + 4 * static_cast<i128>(q) * q;
    const i128 q16 = 16 * static_cast<i128>(q) * q;
    // lower(m2): 4q sqrt(m) > base - m2
    auto lower_ok = [&](i128 m2) {
        const i128 r = base - m2;
        return r < 0 || r * r < q16 * static_cast<i128>(m);
    };
    // upper(m2): 4q sqrt(m - K) <= base - m2
    auto upper_ok = [&](i128 m2) {
        const i128 r = base - m2;
        return r >= 0 && r * r >= q16 * static_cast<i128>(m - K);
    };
    const double qd = static_cast<double>(q);
    i128 lo = static_cast<i128>(std::floor(static_cast<double>(base) - 4 * qd * std::sqrt(static_cast<double>(m)))) + 1;
    while (lower_ok(lo - 1)) --lo;
    while (!lower_ok(lo)) ++lo;
    i128 hi = static_cast<i128>(std::floor(static_cast<double>(base) - 4 * qd * std::sqrt(static_cast<double>(m - K))));
    while (upper_ok(hi + 1)) ++hi;
    while (!upper_ok(hi)) --hi;
    lo = std::max<i128>(lo, static_cast<i128>(t) + 1);
    hi = std::min<i128>(hi, static_cast<i128>(t) + delta);
    return {static_cast<i64>(lo), static_cast<i64>(std::max<i128>(hi, lo - 1))};
}

struct DispersionProfile {
    std::vector<DispersionSample> samples;
    double integral_U = 0, integral_V = 0, integral_W = 0;
    double integral_combined = 0, integral_main = 0;
    // max over samples of |X - main_term| / E
    double max_dev_U = 0, max_dev_V = 0, max_dev_W = 0;
};

class DispersionLab {
public:
    static constexpr u64 kDefaultP = 100'000;
    static constexpr u64 kConstantP = 1'000'000;

    DispersionLab(const DispersionParams& params, u64 P = kDefaultP, unsigned threads = 1,
                  u64 constant_p = kConstantP)
        : params_(params), P_(P), threads_(std::max(1u, threads)),
          singular_(batch_singular_series(params.K, P, threads)),
          constant_(main_term_constant(constant_p)),
          scanner_(checked_add(checked_add(2 * params.z, params.delta), params.K), 1) {}

    DispersionLab(const DispersionParams& params, std::vector<SingularValue> singular, double constant,
                  unsigned threads = 1)
        : params_(params), P_(singular.empty() ? 0 : singular.front().truncation_p), threads_(std::max(1u, threads)),
          singular_(std::move(singular)), constant_(constant),
          scanner_(checked_add(checked_add(2 * params.z, params.delta), params.K), 1) {
        if (singular_.size() < params.K) throw std::invalid_argument("DispersionLab: too few singular values");
    }

    const DispersionParams& params() const { return params_; }
    const std::vector<SingularValue>& singular() const { return singular_; }
    double constant() const { return constant_; }
    u64 truncation_p() const { return P_; }

    WindowSums window(u64 t) const {
        if (params_.delta == 0) {
            WindowSums w;
            w.t = t;
            w.lambda_sum.assign(params_.K, 0.0);
            w.count.assign(params_.K, 0);
            return w;
        }
        return scanner_.scan(t, params_.delta, params_.K);
    }

    double u_term(u64 t) const { return u_of(window(t)); }
    double v_term(u64 t) const { return v_of(window(t)); }
    double w_term(u64 t) const { return w_of(window(t)); }

    double main_term(u64 t) const {
        const double d = static_cast<double>(params_.delta);
        return d * d * static_cast<double>(params_.K) / (4.0 * static_cast<double>(t)) * constant_;
    }

    DispersionSample identity_check(u64 t) const {
        const auto w = window(t);
        DispersionSample s;
        s.t = t;
        s.U = u_of(w);
        s.V = v_of(w);
        s.W = w_of(w);
        s.combined = s.U - 2 * s.V + s.W;
        s.direct_square = moment_sum(w, singular_);
        s.main_term = main_term(t);
        s.E = params_.E;
        return s;
    }

    /// M~(t) = 2 Σ_{D1 <= q <= D2} 1/φ(4q) Σ_{t < m1 <= t+Δ} #I(t, m1, q).
    double m_tilde(u64 t) const {
        const u64 q_lo = std::max<u64>(1, static_cast<u64>(std::ceil(params_.D1)));
        const u64 q_hi = static_cast<u64>(std::floor(params_.D2));
        if (q_hi < q_lo || params_.delta == 0) return 0.0;
        if (t + 1 < params_.K) throw std::invalid_argument("m_tilde: m - K < 0 for m in the window");
        double total = 0;
        for (u64 q = q_lo; q <= q_hi; ++q) {
            u64 count = 0;
            for (u64 m1 = t + 1; m1 <= t + params_.delta; ++m1)
                count += tilde_interval(m1, q, params_.K, t, params_.delta).size();
            total += static_cast<double>(count) / static_cast<double>(euler_phi(4 * q));
        }
        return 2.0 * total;
    }

    DispersionProfile profile(const std::vector<u64>& grid) const {
        if (grid.empty()) throw std::invalid_argument("dispersion_profile: empty grid");
        DispersionProfile out;
        out.samples.resize(grid.size());
        parallel_for(grid.size(), threads_, [&](std::size_t i) { out.samples[i] = identity_check(grid[i]); });

        const double E = params_.E;
        for (const auto& s : out.samples) {
            if (E > 0) {
                out.max_dev_U = std::max(out.max_dev_U, std::abs(s.U - s.main_term) / E);
                out.max_dev_V = std::max(out.max_dev_V, std::abs(s.V - s.main_term) / E);
                out.max_dev_W = std::max(out.max_dev_W, std::abs(s.W - s.main_term) / E);
            }
        }
        auto integrate = [&](auto field) {
            const double z = static_cast<double>(params_.z);
            if (out.samples.size() == 1) return z * field(out.samples[0]);
            double acc = 0;
            for (std::size_t i = 1; i < out.samples.size(); ++i) {
                const double h = static_cast<double>(out.samples[i].t) - static_cast<double>(out.samples[i - 1].t);
                acc += 0.5 * h * (field(out.samples[i]) + field(out.samples[i - 1]));
            }
            const double span = static_cast<double>(out.samples.back().t) - static_cast<double>(out.samples.front().t);
            return span > 0 ? acc * z / span : z * field(out.samples[0]);
        };
        out.integral_U = integrate([](const DispersionSample& s) { return s.U; });
        out.integral_V = integrate([](const DispersionSample& s) { return s.V; });
        out.integral_W = integrate([](const DispersionSample& s) { return s.W; });
        out.integral_combined = integrate([](const DispersionSample& s) { return s.combined; });
        out.integral_main = integrate([](const DispersionSample& s) { return s.main_term; });
        return out;
    }

private:
    double u_of(const WindowSums& w) const {
        double s = 0;
        for (double a : w.lambda_sum) s += a * a;
        return s;
    }
    double v_of(const WindowSums& w) const {
        double s = 0;
        for (std::size_t i = 0; i < w.lambda_sum.size(); ++i)
            s += singular_[i].value * static_cast<double>(w.count[i]) * w.lambda_sum[i];
        return s;
    }
    double w_of(const WindowSums& w) const {
        double s = 0;
        for (std::size_t i = 0; i < w.count.size(); ++i) {
            const double sc = singular_[i].value * static_cast<double>(w.count[i]);
            s += sc * sc;
        }
        return s;
    }

    DispersionParams params_;
    u64 P_;
    unsigned threads_;
    std::vector<SingularValue> singular_;
    double constant_;
    ProgressionScanner scanner_;
};

/// n points evenly spaced over [z, 2z] (n = 1 gives t = z).
inline std::vector<u64> even_grid(u64 z, u64 n) {
    if (n == 0) throw std::invalid_argument("grid: need at least one point");
    std::vector<u64> g(n);
    for (u64 i = 0; i < n; ++i)
        g[i] = n == 1 ? z : z + static_cast<u64>(static_cast<unsigned __int128>(i) * z / (n - 1));
    return g;
}

/// n seeded uniform points in [z, 2z], sorted.
inline std::vector<u64> random_grid(u64 z, u64 n, u64 seed) {
    std::mt19937_64 rng(seed);
    std::vector<u64> g(n);
    for (auto& t : g) t = z + rng() % (z + 1);
    std::sort(g.begin(), g.end());
    return g;
}

}  // namespace qprog
