#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "lmconv/cox.hpp"
#include "lmconv/error.hpp"
#include "lmconv/functionals.hpp"
#include "lmconv/heavy_tail.hpp"
#include "lmconv/numeric.hpp"
#include "lmconv/stochexp.hpp"
#include "oracles.hpp"

using namespace lmconv;

TEST(TestFunction, EvaluatesTheRegisteredIntegrands) {
    const double x = 0.75;
    EXPECT_DOUBLE_EQ(TestFunction::of(FunctionTag::Identity)(x), x);
    EXPECT_DOUBLE_EQ(TestFunction::of(FunctionTag::Square)(x), x * x);
    EXPECT_DOUBLE_EQ(TestFunction::of(FunctionTag::TruncatedSquare, 0.5)(x), 0.0);
    EXPECT_DOUBLE_EQ(TestFunction::of(FunctionTag::TruncatedAbs)(3.0), 3.0);
    EXPECT_DOUBLE_EQ(TestFunction::of(FunctionTag::TruncatedAbs)(-0.5), 0.25);
    EXPECT_DOUBLE_EQ(TestFunction::of(FunctionTag::PosTail, 0.5)(x), x);
    EXPECT_NEAR(TestFunction::of(FunctionTag::Log1p)(x), std::log1p(x), 1e-16);
    EXPECT_NEAR(TestFunction::of(FunctionTag::XmLog)(x), x - std::log1p(x), 1e-16);
    EXPECT_NEAR(TestFunction::of(FunctionTag::Entropy)(x), (1 + x) * std::log1p(x) - x, 1e-16);
    EXPECT_NEAR(TestFunction::of(FunctionTag::Expm)(x), std::exp(x) - 1 - x, 1e-16);
    EXPECT_DOUBLE_EQ(TestFunction::of(FunctionTag::One)(x), 1.0);
}

TEST(TestFunction, KeepsPrecisionNextToMinusOne) {
    const double gap = 1e-300;
    EXPECT_NEAR(TestFunction::of(FunctionTag::Log1p).eval(-1.0, gap), std::log(gap), 1e-12);
    EXPECT_THROW(TestFunction::of(FunctionTag::Log1p)(-1.5), Error);
}

TEST(TestFunction, ParsesCliNames) {
    for (const char* name :
         {"identity", "square", "truncated_square", "truncated_abs", "pos_tail", "log1p", "xm_log", "entropy", "expm", "one"})
        EXPECT_EQ(TestFunction::parse(name).name().rfind(name, 0), 0u) << name;
    EXPECT_EQ(TestFunction::parse("pos_tail", 2.5).name(), "pos_tail[kappa=2.5]");
    EXPECT_THROW(TestFunction::parse("cube"), Error);
}

TEST(TestFunction, ComposingWithPhiAppliesTheInvolution) {
    gen::for_all(200, 31, [](gen::Rng& r) {
        const double x = r.uniform(-0.9, 5.0);
        for (auto tag : {FunctionTag::Identity, FunctionTag::Square, FunctionTag::Log1p, FunctionTag::XmLog}) {
            const auto f = TestFunction::of(tag);
            EXPECT_NEAR(compose_with_phi(f)(x), f(phi(x)), 1e-12 * std::max(1.0, std::abs(f(phi(x)))));
        }
    });
}

TEST(Atom, IntegratesAgainstItsPoints) {
    Atom a;
    a.time = 1.0;
    a.points = {{0.5, 0.25}, {-0.5, 0.75}};
    const auto v = a.integrate(TestFunction::of(FunctionTag::Square));
    EXPECT_FALSE(v.diverges);
    EXPECT_DOUBLE_EQ(v.value, 0.25);
    EXPECT_DOUBLE_EQ(a.total_mass(), 1.0);
}

TEST(Atom, ScaledPointsKeepSizeTimesMass) {
    // size 2^2000 * 3 with mass 2^-2000 / 4: the product is 3/4 though
    // neither factor is a double.
    AtomPoint p{3.0, 0.25, 2000};
    EXPECT_NEAR(p.contribution(TestFunction::of(FunctionTag::Identity)), 0.75, 1e-15);
    EXPECT_TRUE(std::isinf(p.true_size()));
}

TEST(Compensator, GammaIsMinusTheLogMoment) {
    CompensatorSpec comp;
    comp.atoms.push_back(Atom{1.0, {{1.0, 0.5}, {-0.5, 0.5}}, 0.0});
    const double expected = -(0.5 * std::log(2.0) + 0.5 * std::log(0.5));
    EXPECT_NEAR(gamma_process(comp, 1.0), expected, 1e-16);
    EXPECT_EQ(gamma_process(comp, 0.5), 0.0);
}

TEST(Compensator, QuadraticVariationAddsSquaredJumpsAndTheContinuousPart) {
    DiffusionGrid g;
    g.step = 0.5;
    g.increments = {0.1, -0.2};
    const CadlagPath x = PathBuilder(1.0).add_jump(0.3, 2.0).set_continuous_part(0.5, 0.0, g).build();
    const CadlagPath qv = quadratic_variation(x);
    EXPECT_NEAR(value_at(qv, 1.0), 4.0 + 0.5, 1e-15);
    EXPECT_NEAR(value_at(qv, 0.2), 0.1, 1e-15);
}

TEST(CoxRate, CumulativeIntensityMatchesQuadrature) {
    for (auto family : {CoxFamily::Decay2Linear, CoxFamily::Decay2Reciprocal, CoxFamily::HarmonicShrink,
                        CoxFamily::Decay2ReciprocalTilted}) {
        CoxRate r;
        r.family = family;
        for (double t : {0.5, 3.0, 40.0}) {
            const double q = oracle::simpson([&](double s) { return r.intensity(s); }, 0.0, t);
            EXPECT_NEAR(r.cumulative(t), q, 1e-9 * std::max(1.0, q)) << r.name() << " t=" << t;
            const double m = oracle::simpson([&](double s) { return r.mark(s) * r.intensity(s); }, 0.0, t);
            EXPECT_NEAR(r.mark_integral(t), m, 1e-9 * std::max(1.0, std::abs(m))) << r.name() << " t=" << t;
        }
    }
    const CoxRate e = CoxRate::exp_const(2.0, 0.5, 0.3);
    EXPECT_NEAR(e.total(), 4.0, 1e-14);
}

TEST(CoxRate, DecayingIntensityHasUnitMass) {
    CoxRate r;
    r.family = CoxFamily::Decay2Linear;
    EXPECT_DOUBLE_EQ(r.total(), 1.0);
    EXPECT_TRUE(std::isinf(r.inverse_cumulative(1.0)));
    for (double level : {1e-6, 0.1, 0.5, 0.999})
        EXPECT_NEAR(r.cumulative(r.inverse_cumulative(level)), level, 1e-13);
}

TEST(CoxRate, TiltingMultipliesByOnePlusTheMark) {
    for (auto family : {CoxFamily::Decay2Linear, CoxFamily::Decay2Reciprocal, CoxFamily::HarmonicShrink,
                        CoxFamily::Decay2ReciprocalTilted}) {
        CoxRate r;
        r.family = family;
        const CoxRate t = r.tilted();
        for (double s : {0.0, 0.3, 2.0, 50.0}) {
            // The reference loses digits when the mark is close to -1.
            EXPECT_NEAR(t.intensity(s), (1.0 + r.mark(s)) * r.intensity(s), 1e-9 * t.intensity(s)) << r.name();
            EXPECT_NEAR(t.mark(s), phi(r.mark(s)), 1e-9 * std::max(1.0, std::abs(t.mark(s)))) << r.name();
        }
        EXPECT_EQ(t.tilted().family, family);
    }
}

TEST(CoxIntegral, ClosedFormAndQuadratureAgree) {
    CoxRate r;
    r.family = CoxFamily::HarmonicShrink;
    const auto v = cox_integral(r, TestFunction::of(FunctionTag::Square), 0.0, 5.0);
    const double q = oracle::simpson([&](double s) { return r.mark(s) * r.mark(s) * r.intensity(s); }, 0.0, 5.0);
    EXPECT_FALSE(v.diverges);
    EXPECT_NEAR(v.value, q, 1e-9);
    // (1+s)^-1 has infinite mass on the half-line.
    EXPECT_TRUE(cox_integral(r, TestFunction::of(FunctionTag::One), 0.0, INFINITY).diverges);
}

TEST(HeavyTailLaw, IsANormalisedLawWithFiniteMean) {
    const auto& law = HeavyTailLaw::instance();
    // In s = log(1+y) the density c e^{-s} / log(e - 1 + e^s)^2 decays fast.
    const auto in_s = [&](double s) { return law.density(std::expm1(s)) * std::exp(s); };
    EXPECT_NEAR(oracle::simpson(in_s, 0.0, 60.0, 200000), 1.0, 1e-8);
    EXPECT_NEAR(law.tail(0.0), 1.0, 1e-12);
    for (double y : {0.1, 1.0, 10.0, 1e4}) EXPECT_NEAR(law.quantile_upper(law.tail(y)), y, 1e-8 * (1 + y));
    const auto mean = law.expectation([](double y) { return y; }, TailGrowth::Linear);
    EXPECT_FALSE(mean.diverges);
    EXPECT_NEAR(mean.value, law.mean(), 1e-9);
    const auto entropy = law.expectation([](double y) { return (1 + y) * std::log1p(y) - y; }, TailGrowth::Superlinear);
    EXPECT_TRUE(entropy.diverges);
}

TEST(Quadrature, DetectsDivergentHalfLineIntegrals) {
    EXPECT_NEAR(integrate_to_infinity([](double s) { return std::exp(-s); }, 0.0).value, 1.0, 1e-10);
    EXPECT_TRUE(integrate_to_infinity([](double s) { return 1.0 / (1.0 + s); }, 0.0).diverges);
    EXPECT_NEAR(integrate_finite([](double s) { return s * s; }, 0.0, 3.0), 9.0, 1e-12);
}
