#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "lmconv/error.hpp"
#include "lmconv/functionals.hpp"
#include "lmconv/identities.hpp"
#include "lmconv/models.hpp"
#include "lmconv/stochexp.hpp"

using namespace lmconv;

namespace {

/// exp(X_t - [X^c,X^c]_t / 2) * prod_{s <= t} (1 + dX_s) exp(-dX_s), with
/// the jumps read from the path and the product taken directly.
double product_formula(const CadlagPath& x, double t) {
    long double log_abs = value_at(x, t) - 0.5 * x.continuous_qv(t);
    for (const auto& j : x.jumps()) {
        if (j.time > t) break;
        log_abs += std::log(std::abs(1.0L + j.size)) - j.size;
    }
    return static_cast<double>(std::exp(log_abs));
}

}  // namespace

TEST(StochExp, MatchesTheProductFormula) {
    gen::for_all(200, 21, [](gen::Rng& r) {
        gen::PathShape shape;
        shape.diffusion = r.chance(0.5);
        shape.lo = -0.9;
        const CadlagPath x = gen::path(r, shape);
        const auto z = stoch_exp(x).exponential;
        for (int i = 0; i <= 16; ++i) {
            const double t = x.horizon() * i / 16.0;
            const double expected = product_formula(x, t);
            EXPECT_NEAR(z.value_at(t) / expected, 1.0, 1e-12) << "t=" << t;
        }
    });
}

TEST(StochExp, SatisfiesTheJumpRelation) {
    gen::for_all(100, 22, [](gen::Rng& r) {
        const CadlagPath x = gen::path(r);
        const auto z = stoch_exp(x).exponential;
        for (const auto& j : x.jumps())
            EXPECT_NEAR(z.value_at(j.time), z.left_limit(j.time) * (1.0 + j.size),
                        1e-12 * std::abs(z.value_at(j.time)) + 1e-300);
    });
}

TEST(StochExp, BrownianExponentialIsTheGeometricMotion) {
    DiffusionGrid g;
    g.step = 0.25;
    g.increments = {0.3, -0.1, 0.4, -0.2};
    const CadlagPath w = PathBuilder(1.0).set_continuous_part(1.0, 0.0, g).build();
    const auto z = stoch_exp(w).exponential;
    EXPECT_NEAR(z.value_at(1.0), std::exp(0.4 - 0.5), 1e-14);
    EXPECT_NEAR(z.value_at(0.5), std::exp(0.2 - 0.25), 1e-14);
}

TEST(StochExp, JumpOfMinusOneAbsorbs) {
    const CadlagPath x = PathBuilder(3.0).add_jump(1.0, 0.5).add_jump(2.0, -1.0).add_drift(0.0, 3.0, 1.0).build();
    const auto e = stoch_exp(x);
    ASSERT_TRUE(e.absorption_time.has_value());
    EXPECT_DOUBLE_EQ(*e.absorption_time, 2.0);
    EXPECT_GT(e.exponential.left_limit(2.0), 0.0);
    EXPECT_EQ(e.exponential.value_at(2.0), 0.0);
    EXPECT_EQ(e.exponential.value_at(3.0), 0.0);
}

TEST(StochExp, JumpBelowMinusOneNeedsTheSignedFlag) {
    const CadlagPath x = PathBuilder(2.0).add_jump(1.0, -3.0).build();
    try {
        stoch_exp(x);
        FAIL() << "expected JumpBelowMinusOne";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::JumpBelowMinusOne);
    }
    ExpOptions signed_exp;
    signed_exp.allow_signed = true;
    const auto z = stoch_exp(x, signed_exp).exponential;
    EXPECT_DOUBLE_EQ(z.value_at(2.0), -2.0);
    EXPECT_EQ(z.sign_at(2.0), -1);
}

TEST(Phi, IsAnInvolutionOfTheHalfLine) {
    gen::for_all(1000, 23, [](gen::Rng& r) {
        const double x = r.chance(0.5) ? r.uniform(-0.999, 0.0) : std::exp(r.uniform(-20.0, 20.0));
        // 1 + phi(x) carries a relative error of about eps (1 + x) in plain
        // doubles; that is the conditioning of the map, not of phi.
        const double eps = 4.0 * std::numeric_limits<double>::epsilon();
        const double cond = std::max(1.0 + x, 1.0 / (1.0 + x));
        EXPECT_NEAR(phi(phi(x)), x, eps * cond * std::max(1.0, std::abs(x)));
        EXPECT_NEAR((1.0 + x) * (1.0 + phi(x)), 1.0, eps * cond);
    });
    EXPECT_THROW(phi(-1.0), Error);
}

TEST(Reciprocal, ProductOfExponentialsIsOne) {
    gen::for_all(200, 24, [](gen::Rng& r) {
        gen::PathShape shape;
        shape.diffusion = r.chance(0.5);
        shape.lo = -0.9;
        const CadlagPath m = gen::path(r, shape);
        EXPECT_LE(reciprocal_deviation(m), 1e-10);
    });
}

TEST(Reciprocal, JumpsArePhiOfTheJumps) {
    const CadlagPath m = PathBuilder(2.0).add_jump(0.5, 1.0).add_jump(1.5, -0.5).build();
    const CadlagPath n = reciprocal_log(m);
    ASSERT_EQ(n.jumps().size(), 2u);
    EXPECT_DOUBLE_EQ(n.jumps()[0].size, -0.5);
    EXPECT_DOUBLE_EQ(n.jumps()[1].size, 1.0);
    // N = -M + x^2/(1+x) * mu: at the horizon -0.5 + (1/2 + 1/2).
    EXPECT_NEAR(value_at(n, 2.0), 0.5, 1e-15);
}

TEST(StochLog, InvertsTheExponential) {
    gen::for_all(200, 25, [](gen::Rng& r) {
        gen::PathShape shape;
        shape.lo = -0.9;
        const CadlagPath x = gen::path(r, shape);
        EXPECT_LE(round_trip_deviation(x), 1e-12);
    });
}

TEST(Pushforward, HoldsForTheLogFamily) {
    gen::for_all(200, 26, [](gen::Rng& r) {
        gen::PathShape shape;
        shape.lo = -0.9;
        shape.drift = false;
        EXPECT_LE(pushforward_deviation(gen::path(r, shape)), 1e-12);
    });
}

TEST(LogTransform, JumpOfYIsLogJumpPlusGamma) {
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto c = random_jump_case(5, i);
        EXPECT_LE(atom_log_jump_deviation(c.path, c.comp), 1e-12);
    }
}

TEST(LogTransform, RecoversTheExponentialOfAMartingaleWithAtoms) {
    // exp(Y - V) = E(X) needs X = X^c + x * (mu - nu); mean-zero step laws
    // make x * nu vanish.
    gen::for_all(100, 27, [](gen::Rng& r) {
        ModelSpec m;
        m.kind = ModelKind::DiscreteDensitySteps;
        m.steps.family = "explicit";
        m.horizon = r.integer(1, 12);
        for (int k = 0; k < static_cast<int>(m.horizon); ++k) m.steps.laws.push_back({gen::mean_zero_law(r), 0.0});
        const CompensatorSpec comp = compensator(m);
        for (std::uint64_t i = 0; i < 5; ++i)
            EXPECT_LE(exp_log_transform_deviation(sample_path(m, 3, i).path, comp), 1e-10);
    });
    const ModelSpec geometric = preset("ui-geometric");
    for (std::uint64_t i = 0; i < 100; ++i)
        EXPECT_LE(exp_log_transform_deviation(sample_path(geometric, 3, i).path, compensator(geometric)), 1e-10);
}

TEST(LogTransform, ExponentialCompensatorIsNondecreasing) {
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto c = random_jump_case(6, i);
        const auto lt = log_transform(c.path, c.comp);
        double previous = -1e300;
        for (const auto& k : knot_values(lt.v)) {
            EXPECT_GE(k.left, previous - 1e-14);
            EXPECT_GE(k.value, k.left - 1e-14);
            previous = k.value;
        }
    }
}
