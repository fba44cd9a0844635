#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "qprog/sieve.hpp"
#include "qprog/sieve_cache.hpp"

using namespace qprog;
namespace fs = std::filesystem;

TEST(PrimesUpTo, Examples) {
    EXPECT_EQ(primes_up_to(10).primes, (std::vector<u64>{2, 3, 5, 7}));
    EXPECT_EQ(primes_up_to(2).primes, (std::vector<u64>{2}));
    EXPECT_EQ(primes_up_to(1'000'000).primes.size(), 78498u);
    EXPECT_THROW(primes_up_to(1), std::invalid_argument);
}

TEST(PrimesUpTo, CompleteAndPrime) {
    const auto t = primes_up_to(30000);
    std::size_t i = 0;
    for (u64 n = 2; n <= 30000; ++n) {
        if (!oracle::is_prime(n)) continue;
        ASSERT_LT(i, t.primes.size());
        ASSERT_EQ(t.primes[i++], n);
    }
    EXPECT_EQ(i, t.primes.size());
    EXPECT_EQ(t.up_to(100).size(), 25u);
}

TEST(SieveWindow, SmallRange) {
    const auto t = primes_up_to(100);
    const auto w = sieve_window(2, 12, t);
    ASSERT_EQ(w.size(), 10u);
    for (u64 n = 2; n < 12; ++n) {
        const bool p = n == 2 || n == 3 || n == 5 || n == 7 || n == 11;
        EXPECT_EQ(w.is_prime_at(n), p) << n;
        const bool pp = p || n == 4 || n == 8 || n == 9;
        EXPECT_EQ(w.lambda_at(n) > 0, pp) << n;
    }
    EXPECT_DOUBLE_EQ(w.lambda_at(8), std::log(2.0));
    EXPECT_DOUBLE_EQ(w.lambda_at(9), std::log(3.0));
}

TEST(SieveWindow, Hundred) {
    const auto w = sieve_window(100, 101, primes_up_to(20));
    EXPECT_FALSE(w.prime_flags[0]);
    EXPECT_EQ(w.lambda[0], 0.0);
}

TEST(SieveWindow, RejectsShortTable) {
    EXPECT_THROW(sieve_window(1000, 2000, primes_up_to(40)), std::invalid_argument);
    EXPECT_THROW(sieve_window(1, 20, primes_up_to(10)), std::invalid_argument);
    EXPECT_THROW(sieve_window(20, 20, primes_up_to(10)), std::invalid_argument);
}

TEST(SieveWindow, SplitLaw) {
    const auto t = primes_up_to(2000);
    const auto whole = sieve_window(1000, 3000000, t);
    const auto a = sieve_window(1000, 1234567, t);
    const auto b = sieve_window(1234567, 3000000, t);
    std::vector<double> joined = a.lambda;
    joined.insert(joined.end(), b.lambda.begin(), b.lambda.end());
    EXPECT_EQ(whole.lambda, joined);
}

TEST(SieveWindow, MatchesPointwiseOnRandomWindows) {
    std::mt19937_64 rng(5);
    const auto t = primes_up_to(100000);
    for (int i = 0; i < 1000; ++i) {
        const u64 lo = 2 + rng() % 1'000'000'000;
        const u64 hi = lo + 1 + rng() % 10000;
        const auto w = sieve_window(lo, hi, t);
        for (u64 n = lo; n < hi; n += 1 + rng() % 7) {
            const double expect = von_mangoldt(n);
            ASSERT_NEAR(w.lambda_at(n), expect, 1e-12 * std::max(1.0, expect)) << n;
            ASSERT_EQ(w.is_prime_at(n), is_prime(n)) << n;
        }
    }
}

TEST(SieveWindow, Invariants) {
    const auto w = sieve_window(2, 200000, primes_up_to(500));
    for (u64 n = w.lo; n < w.hi; ++n) {
        if (w.is_prime_at(n)) {
            ASSERT_NEAR(w.lambda_at(n), std::log(static_cast<double>(n)), 1e-12);
        }
        ASSERT_NEAR(w.lambda_at(n), oracle::von_mangoldt(n), 1e-12);
    }
}

TEST(Chebyshev, PsiRatioNearOne) {
    const auto w = sieve_window(2, 1'000'001, primes_up_to(1000));
    double psi = 0;
    for (double x : w.lambda) psi += x;
    EXPECT_NEAR(psi / 1e6, 1.0, 0.01);
}

TEST(ForEachPrime, SegmentBoundaries) {
    std::vector<u64> got;
    for_each_prime(90, 200, [&](u64 p) { got.push_back(p); }, 7);
    std::vector<u64> want;
    for (u64 n = 90; n < 200; ++n)
        if (oracle::is_prime(n)) want.push_back(n);
    EXPECT_EQ(got, want);
}

class CacheTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("qprog_cache_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

TEST_F(CacheTest, RoundTrip) {
    SieveCache cache(dir);
    const auto t = primes_up_to(2000);
    const auto w = sieve_window(1000, 4000, t);
    cache.store(w);
    const auto back = cache.load(1000, 4000);
    ASSERT_TRUE(back);
    EXPECT_EQ(back->lambda, w.lambda);
    EXPECT_EQ(back->prime_flags, w.prime_flags);
    EXPECT_FALSE(cache.load(1000, 4001));
}

TEST_F(CacheTest, ClearOnEmptyDirectory) {
    EXPECT_EQ(SieveCache(dir).clear().removed, 0u);
    fs::create_directories(dir);
    EXPECT_EQ(SieveCache(dir).clear().removed, 0u);
}

TEST_F(CacheTest, WarmThenStat) {
    SieveCache cache(dir);
    const auto rep = cache.warm(1'000'000, 2'000'000, 300'000);
    EXPECT_EQ(rep.written, 4u);
    const auto st = cache.stat();
    ASSERT_GE(st.segments.size(), 1u);
    EXPECT_EQ(st.segments.front().lo, 1'000'000u);
    EXPECT_EQ(st.segments.back().hi, 2'000'000u);
    EXPECT_EQ(cache.warm(1'000'000, 2'000'000, 300'000).written, 0u);
    EXPECT_EQ(cache.clear().removed, 4u);
}

TEST_F(CacheTest, CorruptHeaderSkippedAndRemoved) {
    SieveCache cache(dir);
    cache.store(sieve_window(100, 200, primes_up_to(20)));
    {
        std::fstream f(cache.path_for(100, 200), std::ios::in | std::ios::out | std::ios::binary);
        f.write("XXXX", 4);
    }
    const auto st = cache.stat();
    EXPECT_TRUE(st.segments.empty());
    ASSERT_EQ(st.warnings.size(), 1u);
    EXPECT_NE(st.warnings[0].find("corrupt"), std::string::npos);

    std::vector<std::string> warnings;
    EXPECT_FALSE(cache.load(100, 200, &warnings));
    EXPECT_EQ(warnings.size(), 1u);
    EXPECT_FALSE(fs::exists(cache.path_for(100, 200)));
}

TEST_F(CacheTest, TruncatedPayloadRejected) {
    SieveCache cache(dir);
    cache.store(sieve_window(100, 200, primes_up_to(20)));
    fs::resize_file(cache.path_for(100, 200), SieveCache::kHeaderBytes + 3);
    std::vector<std::string> warnings;
    EXPECT_FALSE(cache.load(100, 200, &warnings));
    EXPECT_EQ(warnings.size(), 1u);
}

TEST_F(CacheTest, GetOrComputeStores) {
    SieveCache cache(dir);
    const auto t = primes_up_to(100);
    const auto w = cache.get_or_compute(500, 900, t);
    EXPECT_TRUE(fs::exists(cache.path_for(500, 900)));
    EXPECT_EQ(cache.get_or_compute(500, 900, t).lambda, w.lambda);
}
