#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "lmconv/error.hpp"
#include "lmconv/path.hpp"

using namespace lmconv;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::ConfigError;
}

}  // namespace

TEST(PathBuilder, NormalisesJumpsAndDrift) {
    const CadlagPath p = PathBuilder(3.0)
                             .set_initial(1.0)
                             .add_jump(0.0, 0.5)   // folded into the initial value
                             .add_jump(1.0, 0.25)
                             .add_jump(1.0, 0.25)  // summed with the previous one
                             .add_jump(2.0, 0.5)
                             .add_jump(2.0, -0.5)  // cancels
                             .add_drift(0.0, 2.0, 1.0)
                             .add_drift(1.0, 3.0, -1.0)
                             .build();
    EXPECT_DOUBLE_EQ(p.initial(), 1.5);
    ASSERT_EQ(p.jumps().size(), 1u);
    EXPECT_DOUBLE_EQ(p.jumps()[0].time, 1.0);
    EXPECT_DOUBLE_EQ(p.jumps()[0].size, 0.5);
    // Drift: +1 on [0,1), 0 on [1,2), -1 on [2,3).
    EXPECT_DOUBLE_EQ(value_at(p, 0.5), 2.0);
    EXPECT_DOUBLE_EQ(left_limit(p, 1.0), 2.5);
    EXPECT_DOUBLE_EQ(value_at(p, 1.0), 3.0);
    EXPECT_DOUBLE_EQ(value_at(p, 2.0), 3.0);
    EXPECT_DOUBLE_EQ(value_at(p, 3.0), 2.0);
}

TEST(CadlagPath, RejectsMalformedData) {
    PathData d;
    d.horizon = 1.0;
    d.jumps = {{0.5, 1.0}, {0.25, 1.0}};
    EXPECT_EQ(code_of([&] { CadlagPath p(d); }), ErrorCode::InvalidPath);
    d.jumps = {{0.5, 0.0}};
    EXPECT_EQ(code_of([&] { CadlagPath p(d); }), ErrorCode::InvalidPath);
    d.jumps = {{1.5, 1.0}};
    EXPECT_EQ(code_of([&] { CadlagPath p(d); }), ErrorCode::InvalidPath);
    d.jumps.clear();
    d.horizon = -1.0;
    EXPECT_EQ(code_of([&] { CadlagPath p(d); }), ErrorCode::InvalidPath);
}

TEST(CadlagPath, QueriesOutsideTheDomainFail) {
    const CadlagPath p = PathBuilder(2.0).add_jump(1.0, 1.0).set_explosion(1.5).build();
    EXPECT_EQ(code_of([&] { value_at(p, 1.6); }), ErrorCode::QueryAfterExplosion);
    const CadlagPath q = PathBuilder(2.0).build();
    EXPECT_EQ(code_of([&] { value_at(q, 2.5); }), ErrorCode::QueryBeyondHorizon);
    EXPECT_EQ(code_of([&] { value_at(q, -0.1); }), ErrorCode::DomainError);
}

TEST(CadlagPath, AbsorptionFreezesThePath) {
    const CadlagPath p =
        PathBuilder(3.0).add_drift(0.0, 1.0, 2.0).add_jump(1.0, -1.0).set_absorption(1.0).build();
    EXPECT_DOUBLE_EQ(value_at(p, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(value_at(p, 3.0), 1.0);
}

TEST(CadlagPath, FirstCrossingInterpolatesDriftAndHitsJumps) {
    const CadlagPath p = PathBuilder(4.0).add_drift(0.0, 2.0, 1.0).add_jump(3.0, 5.0).build();
    ASSERT_TRUE(first_crossing(p, 1.5).has_value());
    EXPECT_NEAR(*first_crossing(p, 1.5), 1.5, 1e-15);
    EXPECT_DOUBLE_EQ(*first_crossing(p, 4.0), 3.0);
    EXPECT_FALSE(first_crossing(p, 10.0).has_value());
}

TEST(CadlagPath, TailOscillationSpansTheWindow) {
    const CadlagPath p = PathBuilder(4.0).add_jump(1.0, 3.0).add_jump(3.0, -1.0).add_jump(3.5, 0.25).build();
    EXPECT_DOUBLE_EQ(tail_oscillation(p, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(tail_oscillation(p, 0.0), 3.0);
}

TEST(CadlagPathProperty, KnotValuesAgreeWithPointQueries) {
    gen::for_all(200, 11, [](gen::Rng& r) {
        gen::PathShape shape;
        shape.diffusion = r.chance(0.5);
        const CadlagPath p = gen::path(r, shape);
        for (const auto& k : knot_values(p)) {
            EXPECT_NEAR(k.value, value_at(p, k.time), 1e-12);
            if (k.time > 0.0) {
                EXPECT_NEAR(k.left, left_limit(p, k.time), 1e-12);
            }
        }
    });
}

TEST(CadlagPathProperty, ValueDecomposesIntoInitialDriftJumpsAndDiffusion) {
    gen::for_all(200, 12, [](gen::Rng& r) {
        gen::PathShape shape;
        shape.diffusion = r.chance(0.5);
        const CadlagPath p = gen::path(r, shape);
        for (int i = 0; i <= 16; ++i) {
            const double t = p.horizon() * i / 16.0;
            EXPECT_NEAR(value_at(p, t), p.initial() + p.drift_integral(t) + p.jump_sum(t) + p.diffusion_value(t),
                        1e-12);
        }
    });
}

TEST(CadlagPathProperty, ScaledSumIsLinear) {
    gen::for_all(100, 13, [](gen::Rng& r) {
        const CadlagPath a = gen::path(r);
        const CadlagPath b = gen::path(r);
        const double c = r.uniform(-2.0, 2.0);
        const CadlagPath s = PathBuilder(a.horizon()).add_scaled(a, 1.0).add_scaled(b, c).build();
        for (int i = 0; i <= 8; ++i) {
            const double t = a.horizon() * i / 8.0;
            EXPECT_NEAR(value_at(s, t), value_at(a, t) + c * value_at(b, t), 1e-11);
        }
    });
}
