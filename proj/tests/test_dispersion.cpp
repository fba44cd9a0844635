#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qprog/dispersion.hpp"

using namespace qprog;

namespace {

DispersionLab small_lab(u64 z, u64 K, u64 delta) {
    return DispersionLab(DispersionParams::make(z, K, delta), batch_singular_series(K, 100'000), main_term_constant(100'000));
}

}  // namespace

TEST(DispersionParams, Derived) {
    const auto p = DispersionParams::make(1'000'000, 3982, 63096, 1.0, 2.0);
    const double logz = std::log(1e6);
    EXPECT_DOUBLE_EQ(p.L, logz * logz);
    EXPECT_DOUBLE_EQ(p.E, 63096.0 * 63096.0 * 3982.0 / (1e6 * logz));
    EXPECT_LT(p.D1, p.D2);
    EXPECT_GT(p.E, 0);
    EXPECT_GE(p.L, 1);
    EXPECT_THROW(DispersionParams::make(2, 1, 1), std::invalid_argument);
    EXPECT_THROW(DispersionParams::make(10, 0, 1), std::invalid_argument);
}

TEST(Dispersion, ZeroDelta) {
    const auto lab = small_lab(1000, 5, 0);
    const auto s = lab.identity_check(1200);
    EXPECT_EQ(s.U, 0.0);
    EXPECT_EQ(s.V, 0.0);
    EXPECT_EQ(s.W, 0.0);
    EXPECT_EQ(s.combined, 0.0);
    EXPECT_EQ(s.direct_square, 0.0);
    EXPECT_EQ(lab.m_tilde(1200), 0.0);
}

TEST(Dispersion, PinnedComponents) {
    const double s1 = truncated_singular_series(1, 100'000).value;
    const double s2 = truncated_singular_series(2, 100'000).value;
    const auto lab1 = small_lab(100, 1, 50);
    EXPECT_NEAR(lab1.u_term(100), std::pow(std::log(101.0), 2), 1e-12);
    EXPECT_NEAR(lab1.v_term(100), s1 * 3 * std::log(101.0), 1e-12);
    const auto lab2 = small_lab(100, 2, 50);
    EXPECT_NEAR(lab2.w_term(100), s1 * s1 * 9 + s2 * s2 * 9, 1e-12);
    // k = 2, n in {10, 11, 12}: 102, 123, 146 are all composite.
    const double expect = std::pow(std::log(101.0) - 3 * s1, 2) + std::pow(3 * s2, 2);
    const auto s = lab2.identity_check(100);
    EXPECT_NEAR(s.direct_square, expect, 1e-12);
    EXPECT_NEAR(s.combined, expect, 1e-9);
}

TEST(Dispersion, FactoredUEqualsDoubleLoop) {
    for (u64 t : {100, 347, 1000})
        for (u64 K : {1, 7, 20}) {
            const u64 delta = 150;
            const auto lab = small_lab(1000, K, delta);
            double literal = 0;
            for (u64 k = 1; k <= K; ++k)
                for (u64 n1 = 1; n1 * n1 + k <= t + delta; ++n1)
                    for (u64 n2 = 1; n2 * n2 + k <= t + delta; ++n2)
                        if (n1 * n1 + k > t && n2 * n2 + k > t)
                            literal += oracle::von_mangoldt(n1 * n1 + k) * oracle::von_mangoldt(n2 * n2 + k);
            EXPECT_NEAR(lab.u_term(t), literal, 1e-9 * std::max(1.0, literal)) << t << ' ' << K;
        }
}

TEST(Dispersion, VLinearInSingularScale) {
    auto singular = batch_singular_series(10, 1000);
    const auto params = DispersionParams::make(1000, 10, 300);
    const DispersionLab a(params, singular, 1.0);
    for (auto& s : singular) s.value *= 2;
    const DispersionLab b(params, singular, 1.0);
    EXPECT_DOUBLE_EQ(b.v_term(1100), 2 * a.v_term(1100));
    EXPECT_DOUBLE_EQ(b.w_term(1100), 4 * a.w_term(1100));
}

TEST(Dispersion, IdentityOnRandomInstances) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 1000; ++i) {
        const u64 z = 3 + rng() % 5000, K = 1 + rng() % 30, delta = rng() % 2000;
        const auto lab = DispersionLab(DispersionParams::make(z, K, delta), batch_singular_series(K, 1000), 1.0);
        const auto s = lab.identity_check(z + rng() % (z + 1));
        ASSERT_LE(s.identity_residual(), 1e-9 * std::max(1.0, s.direct_square));
        ASSERT_GE(s.combined, -1e-9 * std::max(1.0, s.direct_square));
        ASSERT_GE(s.W, 0.0);
    }
}

TEST(Dispersion, MonotoneInDelta) {
    double pu = 0, pv = 0, pw = 0;
    for (u64 delta : {0, 100, 500, 2000, 5000}) {
        const auto s = small_lab(5000, 20, delta).identity_check(6000);
        EXPECT_GE(s.U, pu);
        EXPECT_GE(s.V, pv);
        EXPECT_GE(s.W, pw);
        pu = s.U, pv = s.V, pw = s.W;
    }
}

TEST(TildeInterval, MatchesBruteForce) {
    // m2 is in I(t, m1, q) iff there is a real r with 4qr = m1 - m2 and
    // 0 < m1 - (q + r)^2 <= K; the bounds are checked here in exact
    // integer form: m1 - 4q(sqrt m1 - q) < m2 <= m1 - 4q(sqrt(m1 - K) - q).
    std::mt19937_64 rng(37);
    for (int i = 0; i < 1000; ++i) {
        const u64 K = 1 + rng() % 200, t = K + rng() % 100000, delta = 1 + rng() % 3000;
        const u64 m1 = t + 1 + rng() % delta, q = 1 + rng() % 40;
        const auto got = tilde_interval(m1, q, K, t, delta);
        u64 count = 0;
        for (u64 m2 = t + 1; m2 <= t + delta; ++m2) {
            // r = (m1 - m2) / (4q); test 0 < m1 - (q + r)^2 <= K via
            // 16 q^2 m1 - (4q^2 + m1 - m2)^2 in (0, 16 q^2 K].
            const __int128 a = 4 * static_cast<__int128>(q) * q + m1 - static_cast<__int128>(m2);
            const __int128 lhs = 16 * static_cast<__int128>(q) * q * m1 - a * a;
            const bool in = a >= 0 && lhs > 0 && lhs <= 16 * static_cast<__int128>(q) * q * K;
            if (in) {
                ++count;
                ASSERT_GE(static_cast<i64>(m2), got.lo);
                ASSERT_LE(static_cast<i64>(m2), got.hi);
            }
        }
        ASSERT_EQ(count, got.size()) << m1 << ' ' << q << ' ' << K;
    }
    EXPECT_THROW(tilde_interval(5, 1, 10, 0, 10), std::invalid_argument);
}

TEST(MTilde, EmptyQRange) {
    // D2 = delta / (2 sqrt z) < 1.
    const auto lab = small_lab(10000, 5, 100);
    EXPECT_EQ(lab.m_tilde(12000), 0.0);
}

TEST(MTilde, SmallKMatchesDirectSum) {
    // With K = 1 each interval is shorter than 1 and is usually empty.
    const auto params = DispersionParams::make(1'000'000, 1, 20000, 1.0, 0.0);
    const DispersionLab lab(params, batch_singular_series(1, 1000), 1.0);
    const u64 t = 1'000'000;
    double direct = 0;
    for (u64 q = std::max<u64>(1, static_cast<u64>(std::ceil(params.D1))); q <= static_cast<u64>(params.D2); ++q) {
        u64 c = 0;
        for (u64 m1 = t + 1; m1 <= t + params.delta; ++m1) c += tilde_interval(m1, q, 1, t, params.delta).size();
        direct += static_cast<double>(c) / static_cast<double>(euler_phi(4 * q));
    }
    EXPECT_DOUBLE_EQ(lab.m_tilde(t), 2 * direct);
}

TEST(TildeInterval, HandInstance) {
    // q = 1, K = 1, m = 10^6 + 1: (m - 4(sqrt(m) - 1), m - 4(sqrt(m - 1) - 1)]
    // = (996004.998.., 996005], holding one integer when the window reaches it.
    const auto hit = tilde_interval(1'000'001, 1, 1, 996'000, 10);
    EXPECT_EQ(hit.lo, 996005);
    EXPECT_EQ(hit.hi, 996005);
    EXPECT_EQ(tilde_interval(1'000'001, 1, 1, 1'000'000, 1000).size(), 0u);
}

TEST(Profile, SinglePointReducesToIdentityCheck) {
    const auto lab = small_lab(5000, 10, 1000);
    const auto prof = lab.profile({6000});
    ASSERT_EQ(prof.samples.size(), 1u);
    const auto s = lab.identity_check(6000);
    EXPECT_EQ(prof.samples[0].U, s.U);
    EXPECT_EQ(prof.samples[0].combined, s.combined);
    EXPECT_DOUBLE_EQ(prof.integral_U, 5000 * s.U);
    EXPECT_THROW(lab.profile({}), std::invalid_argument);
}

TEST(Profile, GridsAndThreadIndependence) {
    const auto g = even_grid(1000, 5);
    EXPECT_EQ(g, (std::vector<u64>{1000, 1250, 1500, 1750, 2000}));
    const auto r = random_grid(1000, 20, 3);
    EXPECT_EQ(r, random_grid(1000, 20, 3));
    for (u64 t : r) {
        EXPECT_GE(t, 1000u);
        EXPECT_LE(t, 2000u);
    }
    const auto params = DispersionParams::make(100000, 200, 20000);
    const auto singular = batch_singular_series(200, 10000);
    const auto a = DispersionLab(params, singular, 1.3, 1).profile(even_grid(100000, 9));
    const auto b = DispersionLab(params, singular, 1.3, 4).profile(even_grid(100000, 9));
    EXPECT_EQ(a.integral_combined, b.integral_combined);
}
