#include <gtest/gtest.h>

#include <complex>
#include <random>

#include "oracles.hpp"
#include "qprog/characters.hpp"

using namespace qprog;
using cd = std::complex<double>;

namespace {

bool near(cd a, cd b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

}  // namespace

TEST(CharacterGroup, ModThree) {
    const auto t = build_character_group(3);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_TRUE(t[0].is_principal());
    EXPECT_TRUE(near(t[1](1), 1.0));
    EXPECT_TRUE(near(t[1](2), -1.0));
    EXPECT_TRUE(near(t[1](3), 0.0));
    EXPECT_EQ(primitive_characters(t).size(), 1u);
    EXPECT_EQ(t[0].conductor(), 1u);
}

TEST(CharacterGroup, ModFour) {
    const auto t = build_character_group(4);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_TRUE(near(t[1](3), -1.0));
    EXPECT_EQ(primitive_characters(t).size(), 1u);
}

TEST(CharacterGroup, ModEightAllReal) {
    const auto t = build_character_group(8);
    ASSERT_EQ(t.size(), 4u);
    for (const auto& chi : t.characters())
        for (u64 n = 0; n < 8; ++n) EXPECT_NEAR(chi(static_cast<i64>(n)).imag(), 0.0, 1e-12);
    // Conductors 1, 4, 8, 8.
    std::vector<u64> f;
    for (const auto& chi : t.characters()) f.push_back(chi.conductor());
    std::sort(f.begin(), f.end());
    EXPECT_EQ(f, (std::vector<u64>{1, 4, 8, 8}));
}

TEST(CharacterGroup, PrimitiveCountModNine) { EXPECT_EQ(primitive_characters(build_character_group(9)).size(), 4u); }

TEST(CharacterGroup, Evaluate) {
    const auto t5 = build_character_group(5);
    EXPECT_TRUE(near(evaluate(t5.principal(), 7), 1.0));
    bool found_quadratic = false;
    for (const auto& chi : t5.characters()) {
        if (chi.is_principal()) continue;
        bool real = true;
        for (i64 n = 1; n < 5; ++n) real = real && std::abs(chi(n).imag()) < 1e-12;
        if (!real) continue;
        found_quadratic = true;
        EXPECT_TRUE(near(evaluate(chi, 2), -1.0));
        EXPECT_TRUE(near(evaluate(chi, -3), -1.0));
    }
    EXPECT_TRUE(found_quadratic);
    const auto t6 = build_character_group(6);
    for (const auto& chi : t6.characters()) EXPECT_TRUE(near(evaluate(chi, 3), 0.0));
}

TEST(CharacterGroup, RejectsTrivialAndCap) {
    EXPECT_THROW(CharacterTable::build(0), std::invalid_argument);
    EXPECT_THROW(CharacterTable::build(1), std::invalid_argument);
    const auto one = CharacterTable::build(1, CharacterTable::kDefaultCap, true);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_TRUE(one[0].is_principal());
    EXPECT_THROW(CharacterTable::build(10001), std::invalid_argument);
}

TEST(CharacterGroup, InvariantsUpTo200) {
    for (u64 q = 2; q <= 200; ++q) {
        const auto t = build_character_group(q);
        const u64 phi = euler_phi(q);
        ASSERT_EQ(t.size(), phi) << q;
        u64 order_product = 1;
        for (const auto& g : t.generators()) order_product *= g.order;
        ASSERT_EQ(order_product, phi) << q;
        int principal = 0;
        for (const auto& chi : t.characters()) {
            principal += chi.is_principal();
            ASSERT_EQ(chi.is_primitive(), chi.conductor() == q);
            cd total = 0;
            for (u64 n = 0; n < q; ++n) {
                const cd v = chi.at_residue(n);
                if (std::gcd(n, q) == 1)
                    ASSERT_NEAR(std::abs(v), 1.0, 1e-12) << q;
                else
                    ASSERT_EQ(v, cd(0)) << q;
                total += v;
            }
            ASSERT_TRUE(near(total, chi.is_principal() ? cd(static_cast<double>(phi)) : cd(0))) << q;
        }
        ASSERT_EQ(principal, 1) << q;
    }
}

TEST(CharacterGroup, CompleteMultiplicativity) {
    for (u64 q : {7, 8, 12, 16, 45, 60, 97, 128, 200}) {
        const auto t = build_character_group(q);
        for (const auto& chi : t.characters())
            for (u64 m = 0; m < q; ++m)
                for (u64 n = 0; n < q; ++n)
                    ASSERT_TRUE(near(chi.at_residue(m * n % q), chi.at_residue(m) * chi.at_residue(n))) << q;
    }
}

TEST(CharacterGroup, RowOrthogonalityUpTo200) {
    for (u64 q = 2; q <= 200; ++q) {
        const auto t = build_character_group(q);
        const double phi = static_cast<double>(euler_phi(q));
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = i; j < t.size(); ++j) {
                cd s = 0;
                for (u64 n = 0; n < q; ++n) s += t[i].at_residue(n) * std::conj(t[j].at_residue(n));
                ASSERT_TRUE(near(s, i == j ? cd(phi) : cd(0))) << q << ' ' << i << ' ' << j;
            }
    }
}

TEST(CharacterGroup, PrimitiveCountsUpTo1000) {
    for (u64 q = 2; q <= 1000; ++q)
        ASSERT_EQ(primitive_characters(build_character_group(q)).size(), oracle::primitive_count(q)) << q;
}

TEST(CharacterGroup, ConductorInducesCharacter) {
    // A character of conductor f agrees on units mod q with a character mod f.
    for (u64 q : {12, 36, 40, 63, 100}) {
        const auto t = build_character_group(q);
        for (const auto& chi : t.characters()) {
            const u64 f = chi.conductor();
            ASSERT_EQ(q % f, 0u);
            for (u64 a = 1; a < q; ++a)
                for (u64 b = a + f; b < q; b += f)
                    if (std::gcd(a, q) == 1 && std::gcd(b, q) == 1)
                        ASSERT_TRUE(near(chi.at_residue(a), chi.at_residue(b))) << q;
        }
    }
}

TEST(CharacterGroup, ParsevalOnRandomSets) {
    std::mt19937_64 rng(17);
    for (u64 q : {9, 20, 31, 64, 105}) {
        const auto t = build_character_group(q);
        std::vector<u64> S(300);
        for (auto& n : S) n = rng() % 5000;
        double lhs = 0;
        for (const auto& chi : t.characters()) {
            cd s = 0;
            for (u64 n : S) s += chi(static_cast<i64>(n));
            lhs += std::norm(s);
        }
        std::vector<double> count(q, 0);
        for (u64 n : S) count[n % q] += 1;
        double rhs = 0;
        for (u64 a = 0; a < q; ++a)
            if (std::gcd(a, q) == 1) rhs += count[a] * count[a];
        rhs *= static_cast<double>(euler_phi(q));
        EXPECT_NEAR(lhs, rhs, 1e-9 * rhs) << q;
    }
}

TEST(CharacterGroup, PeriodicAndNegativeArguments) {
    const auto t = build_character_group(11);
    for (const auto& chi : t.characters())
        for (i64 n = -30; n <= 30; ++n) ASSERT_TRUE(near(chi(n), chi(n + 11)));
}
