#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "lmconv/ensemble.hpp"
#include "lmconv/rng.hpp"
#include "lmconv/stats.hpp"

using namespace lmconv;

TEST(Substream, IsAddressedBySeedIndexAndStream) {
    Substream a(7, 3), b(7, 3), c(7, 4), d(8, 3), e(7, 3, StreamId::Dual);
    const auto first = a();
    EXPECT_EQ(first, b());
    EXPECT_NE(first, c());
    EXPECT_NE(first, d());
    EXPECT_NE(first, e());
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a(), b());
}

TEST(Substream, UniformsStayInsideTheOpenInterval) {
    Substream s(1, 0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    // s.e. of the mean is 1/sqrt(12 n) ~ 9e-4.
    EXPECT_NEAR(sum / n, 0.5, 5e-3);
}

TEST(Substream, DyadicEventsHaveProbabilityTwoToTheMinusK) {
    Substream s(2, 0);
    const int n = 200000;
    for (int k : {1, 3, 6}) {
        int hits = 0;
        for (int i = 0; i < n; ++i) hits += s.dyadic(k);
        const double p = std::ldexp(1.0, -k);
        EXPECT_NEAR(static_cast<double>(hits) / n, p, 5.0 * std::sqrt(p * (1 - p) / n)) << "k=" << k;
    }
    // 2^-200 never fires in practice; 0 always does.
    for (int i = 0; i < 1000; ++i) {
        EXPECT_FALSE(s.dyadic(200));
        EXPECT_TRUE(s.dyadic(0));
    }
}

TEST(Substream, ExponentialAndNormalMoments) {
    Substream s(3, 0);
    const int n = 100000;
    double e = 0.0, z = 0.0, z2 = 0.0;
    for (int i = 0; i < n; ++i) {
        e += s.exponential();
        const double g = s.normal();
        z += g;
        z2 += g * g;
    }
    EXPECT_NEAR(e / n, 1.0, 0.02);
    EXPECT_NEAR(z / n, 0.0, 0.02);
    EXPECT_NEAR(z2 / n, 1.0, 0.03);
}

TEST(ParallelMap, ResultDoesNotDependOnTheWorkerCount) {
    auto f = [](std::size_t i) {
        Substream s(5, i);
        return s.uniform();
    };
    const auto one = parallel_map<double>(1000, 1, f);
    for (std::size_t t : {2u, 3u, 8u}) EXPECT_EQ(parallel_map<double>(1000, t, f), one);
}

TEST(ParallelMap, RethrowsTheLowestFailingIndex) {
    try {
        parallel_map<int>(100, 4, [](std::size_t i) -> int {
            if (i == 30 || i == 80) throw std::runtime_error(std::to_string(i));
            return 0;
        });
        FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "30");
    }
}

TEST(Stats, MeanEstimateAndProportion) {
    const Estimate m = mean_estimate({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(m.n, 4u);
    const Estimate p = proportion(std::vector<bool>{true, false, true, true});
    EXPECT_DOUBLE_EQ(p.mean, 0.75);
    EXPECT_NEAR(p.se, std::sqrt(0.75 * 0.25 / 4.0), 1e-15);
    EXPECT_FALSE(std::isfinite(mean_estimate({1.0, INFINITY}).mean));
}

TEST(Stats, ZScore) {
    EXPECT_NEAR(z_score({1.0, 0.3, 10}, {0.0, 0.4, 10}), 2.0, 1e-15);
    EXPECT_TRUE(std::isinf(z_score({1.0, 0.0, 1}, {0.0, 0.0, 1})));
    EXPECT_EQ(z_score({1.0, 0.0, 1}, {1.0, 0.0, 1}), 0.0);
}

TEST(Stats, KolmogorovSmirnovSeparatesShiftedSamples) {
    gen::Rng r(61);
    std::vector<double> a, b, c;
    for (int i = 0; i < 2000; ++i) {
        a.push_back(r.normal());
        b.push_back(r.normal());
        c.push_back(r.normal() + 0.3);
    }
    EXPECT_FALSE(ks_two_sample(a, b).rejected());
    EXPECT_TRUE(ks_two_sample(a, c).rejected());
    // c(1%) = 1.628 sqrt((n + m) / (n m)).
    EXPECT_NEAR(ks_two_sample(a, b).critical_1pct, 1.628 * std::sqrt(2.0 / 2000.0), 1e-3);
}

TEST(Stats, BootstrapErrorTracksTheStandardError) {
    gen::Rng r(62);
    std::vector<double> v;
    for (int i = 0; i < 2000; ++i) v.push_back(r.normal());
    const double se = mean_estimate(v).se;
    EXPECT_NEAR(bootstrap_se(v, 500, 9), se, 0.15 * se);
    EXPECT_EQ(bootstrap_se(v, 500, 9), bootstrap_se(v, 500, 9));
}
