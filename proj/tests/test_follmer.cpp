#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "lmconv/error.hpp"
#include "lmconv/follmer.hpp"
#include "lmconv/stochexp.hpp"
#include "oracles.hpp"

using namespace lmconv;

namespace {

double mass_of(const std::vector<AtomPoint>& pts) {
    double s = 0.0;
    for (const auto& p : pts) s += p.true_mass();
    return s;
}

double mean_of(const std::vector<AtomPoint>& pts) {
    double s = 0.0;
    for (const auto& p : pts) s += p.contribution(TestFunction::of(FunctionTag::Identity));
    return s;
}

// E_P[Z_T 1{max Z < 1024}] for the two-point steps, frozen from the oracles.
struct Frozen {
    int horizon;
    double value;
};
constexpr Frozen kTwoPoint[] = {
    {1, 1.0},
    {9, 1.0},
    {10, 0.50787305173145514},
    {11, 0.50787305173145514},
    {12, 0.015746103462910215},
    {13, 0.015746103462910215},
    {16, 0.015746103462910215},
    {20, 0.00012302574009926477},
    {24, 6.2944315576185178e-05},
    {32, 1.6885685724342937e-08},
};

}  // namespace

TEST(Tilt, MovesEachPointToPhiWithWeightOnePlusSize) {
    gen::for_all(500, 41, [](gen::Rng& r) {
        const AtomPoint p{r.uniform(-0.99, 50.0), r.uniform(0.0, 1.0)};
        const AtomPoint q = tilt_point(p);
        EXPECT_NEAR(q.true_size(), phi(p.size), 1e-12 * std::max(1.0, std::abs(phi(p.size))));
        EXPECT_NEAR(q.true_mass(), (1.0 + p.size) * p.mass, 1e-12 * (1.0 + p.size));
    });
}

TEST(Tilt, ConservesMassAndMeanOfMeanZeroLaws) {
    gen::for_all(500, 42, [](gen::Rng& r) {
        const auto p = gen::mean_zero_law(r);
        const auto q = tilt_law(p);
        EXPECT_NEAR(mass_of(q), 1.0, 1e-12);
        EXPECT_NEAR(mean_of(q), 0.0, 1e-12);
    });
}

TEST(Tilt, IsAnInvolution) {
    gen::for_all(300, 43, [](gen::Rng& r) {
        const auto p = gen::mean_zero_law(r);
        const auto back = tilt_law(tilt_law(p));
        ASSERT_EQ(back.size(), p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_NEAR(back[i].true_size(), p[i].size, 1e-12 * std::max(1.0, std::abs(p[i].size)));
            EXPECT_NEAR(back[i].true_mass(), p[i].mass, 1e-12);
        }
    });
}

TEST(Tilt, KeepsHugeSizesInScaledForm) {
    // A jump of 2^-60 - 1 has mass 1/2 and tilts to size about 2^60.
    AtomPoint p{std::ldexp(1.0, -60) - 1.0, 0.5};
    p.one_plus = std::ldexp(1.0, -60);
    const AtomPoint q = tilt_point(p);
    EXPECT_NEAR(q.true_size() / std::ldexp(1.0, 60), 1.0, 1e-12);
    EXPECT_NEAR(q.true_mass() / std::ldexp(0.5, -60), 1.0, 1e-12);
}

TEST(TiltModel, CertificateRowsHaveUnitMass) {
    ModelSpec m = preset("ex-6.3-1");
    m.horizon = 12;
    const DualModelPair pair = tilt_model(m);
    ASSERT_EQ(pair.tilt_certificate.size(), 12u);
    for (const auto& row : pair.tilt_certificate) EXPECT_NEAR(row.q_mass, 1.0, 1e-12) << "t=" << row.time;
    EXPECT_THROW(tilt_model(preset("ex-6.7")), Error);
}

TEST(Statistic, ParsesEveryForm) {
    EXPECT_EQ(Statistic::parse("one").kind, Statistic::Kind::One);
    EXPECT_EQ(Statistic::parse("indicator:X<=0.5").describe(), "indicator:X<=0.5");
    EXPECT_EQ(Statistic::parse("indicator:X>=-1").describe(), "indicator:X>=-1");
    EXPECT_EQ(Statistic::parse("box:-1,2").describe(), "box:-1,2");
    EXPECT_EQ(Statistic::parse("logistic:0.25").describe(), "logistic:0.25");
    EXPECT_EQ(Statistic::parse("cos:3").describe(), "cos:3");
    for (const char* bad : {"two", "indicator:Y<=1", "box:2,1", "box:1", "logistic:0", "cos:x"}) {
        try {
            Statistic::parse(bad);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ConfigError) << bad;
        }
    }
}

TEST(Statistic, ValuesLieInTheUnitInterval) {
    const Statistic stats[] = {Statistic::parse("one"), Statistic::parse("indicator:X<=0"),
                               Statistic::parse("box:-1,1"), Statistic::parse("logistic:0.5"),
                               Statistic::parse("cos:2")};
    gen::for_all(200, 44, [&](gen::Rng& r) {
        const double x = r.uniform(-100.0, 100.0);
        for (const auto& s : stats) {
            EXPECT_GE(s(x), 0.0);
            EXPECT_LE(s(x), 1.0);
        }
    });
}

TEST(StoppingRule, ParsesAndDescribes) {
    for (const char* text : {"t=0.5", "cross:X>=1", "cross:Z>=8", "cross:|X|>=2", "cross:X<=-1", "cross:C>=4"})
        EXPECT_EQ(describe(parse_rule(text)), text);
    for (const char* bad : {"t=", "cross:W>=1", "cross:|X>=1", "cross:|X|<=1", "cross:X=1", "stop"}) {
        try {
            parse_rule(bad);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::ConfigError) << bad;
        }
    }
}

TEST(TwoPointOracle, OraclesAgreeWithTheFrozenValues) {
    for (const auto& f : kTwoPoint) {
        EXPECT_NEAR(oracle::two_point_q_survival(f.horizon, 1024.0), f.value, 1e-15 * f.value) << f.horizon;
        if (f.horizon <= 16) {
            EXPECT_NEAR(oracle::two_point_p_truncated_brute(f.horizon, 1024.0), f.value, 1e-13 * f.value) << f.horizon;
        }
    }
}

TEST(TwoPointOracle, LibraryMatchesBothSides) {
    for (const auto& f : kTwoPoint) {
        const TwoPointOracle o = two_point_truncated_mass(f.horizon, 1024.0);
        EXPECT_NEAR(o.p_side, f.value, 1e-12 * f.value + o.pruned) << f.horizon;
        EXPECT_NEAR(o.q_side, f.value, 1e-12 * f.value + o.pruned) << f.horizon;
    }
}

TEST(Duality, HoldsForBrownianMotion) {
    const DualModelPair pair = tilt_model(preset("bm"));
    for (const char* rule : {"t=0.5", "cross:X>=0.5"}) {
        const DualityResult d = duality_check(pair, parse_rule(rule), Statistic::parse("indicator:X<=0"), 4000, 3);
        EXPECT_LT(d.z_score, 4.5) << rule;
        EXPECT_EQ(d.q_explosions, 0u) << rule;
    }
}

TEST(UiProbe, TwoPointSurvivalDecaysPastHorizonTwelve) {
    const UiProbeTable t = ui_probe(preset("ex-6.3-1"), {8.0, 16.0}, 20000, 5);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_NEAR(t.rows[0].q_survival.mean, 1.0, 1e-12);
    EXPECT_NEAR(t.rows[1].q_survival.mean, 0.015746103462910215, 5.0 * t.rows[1].q_survival.se + 1e-3);
    EXPECT_EQ(t.trend, "decaying");
}
