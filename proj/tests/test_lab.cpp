#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "lmconv/error.hpp"
#include "lmconv/identities.hpp"
#include "lmconv/lab.hpp"

using namespace lmconv;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidPath;
}

std::vector<CadlagPath> ensemble(const ModelSpec& m, std::size_t n, std::uint64_t seed) {
    std::vector<CadlagPath> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_path(m, seed, i).path);
    return out;
}

}  // namespace

TEST(Tolerances, ValidateRejectsOutOfRangeValues) {
    EXPECT_NO_THROW(Tolerances{}.validate());
    Tolerances t;
    t.alpha = 1.0;
    EXPECT_EQ(code_of([&] { t.validate(); }), ErrorCode::ConfigError);
    t = {};
    t.eta = 0.0;
    EXPECT_EQ(code_of([&] { t.validate(); }), ErrorCode::ConfigError);
    t = {};
    t.epsilon = -1.0;
    EXPECT_EQ(code_of([&] { t.validate(); }), ErrorCode::ConfigError);
}

TEST(Tolerances, JsonRoundTripsAndKeepsDefaults) {
    Tolerances t;
    t.epsilon = 0.03;
    t.cap = 1e4;
    const Tolerances back = Tolerances::from_json(t.to_json());
    EXPECT_EQ(back.to_json().dump(), t.to_json().dump());
    const Tolerances partial = Tolerances::from_json(Json::parse(R"({"alpha": 0.25})"));
    EXPECT_DOUBLE_EQ(partial.alpha, 0.25);
    EXPECT_DOUBLE_EQ(partial.epsilon, Tolerances{}.epsilon);
    EXPECT_EQ(code_of([] { Tolerances::from_json(Json::parse(R"({"gamma": 1})")); }), ErrorCode::ConfigError);
}

TEST(EventFlags, ConvergentPathsHaveBothTailBoundsAbove) {
    for (const auto& id : {"ex-6.2-1", "ex-6.2-3", "ex-6.2-5", "ex-6.4", "ex-6.6", "bm", "remark-4.3"}) {
        ModelSpec m = preset(id);
        m.horizon = std::min(m.horizon, 1000.0);
        for (const auto& f : classify_events(m, ensemble(m, 100, 3), Tolerances{})) {
            if (f.convergent) {
                EXPECT_TRUE(f.liminf_above) << id;
                EXPECT_TRUE(f.limsup_above) << id;
            }
            EXPECT_LE(f.qv_terminal_truncated, f.qv_terminal + 1e-12) << id;
        }
    }
}

TEST(EventFlags, ConvergenceIsMonotoneInEpsilon) {
    const ModelSpec m = preset("ex-6.2-6");
    const auto paths = ensemble(m, 200, 4);
    Tolerances tight, loose;
    tight.epsilon = 1e-3;
    loose.epsilon = 1e-1;
    const auto a = classify_events(m, paths, tight);
    const auto b = classify_events(m, paths, loose);
    std::size_t na = 0, nb = 0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (a[i].convergent) {
            EXPECT_TRUE(b[i].convergent) << "path " << i;
        }
        na += a[i].convergent;
        nb += b[i].convergent;
    }
    EXPECT_LT(na, nb);
}

TEST(EventFlags, TheZeroMartingaleIsTrivial) {
    const ModelSpec m = preset("zero");
    for (const auto& f : classify_events(m, ensemble(m, 5, 1), Tolerances{})) {
        EXPECT_TRUE(f.convergent);
        EXPECT_TRUE(f.functional_c_finite);
        EXPECT_TRUE(f.exp_converges_nonzero);
        EXPECT_FALSE(f.qv_growing);
        EXPECT_FALSE(f.absorbed);
        EXPECT_EQ(f.tail_oscillation, 0.0);
        EXPECT_EQ(f.qv_terminal, 0.0);
        EXPECT_EQ(f.terminal_value, 0.0);
    }
}

TEST(EventFlags, FlagNamesResolve) {
    EventFlags f;
    f.convergent = true;
    for (const auto& name : flag_names()) {
        EXPECT_EQ(name.rfind("numeric-", 0), 0u) << name;
        EXPECT_NO_THROW(flag_value(f, name));
    }
    EXPECT_TRUE(flag_value(f, "numeric-convergent"));
}

TEST(EqualityTest, PatternsCoverEveryPath) {
    const ModelSpec m = preset("ex-6.3-2");
    for (const auto& id : equality_ids()) {
        const EqualityReport r = event_equality_test(m, id, 300, 5, Tolerances{});
        std::size_t total = 0;
        for (const auto& [key, count] : r.pattern) total += count;
        EXPECT_EQ(total, 300u) << id;
        const double agree = static_cast<double>(r.pattern.at("TT") + r.pattern.at("FF")) / 300.0;
        EXPECT_NEAR(r.agreement.mean, agree, 1e-15) << id;
    }
    EXPECT_EQ(code_of([&] { event_equality_test(m, "no-such", 10, 5, Tolerances{}); }), ErrorCode::InvalidParameters);
}

TEST(EqualityTest, SkipsPathsWithoutALogTransform) {
    // x_1 = -1 is the common first jump, so no path has a log transform.
    const EqualityReport r = event_equality_test(preset("ex-6.2-6"), "joint-log-transform", 50, 5, Tolerances{});
    std::size_t total = 0;
    for (const auto& [key, count] : r.pattern) total += count;
    std::size_t skipped_warnings = 0;
    for (const auto& w : r.warnings) skipped_warnings += w.find("without a log transform") != std::string::npos;
    EXPECT_EQ(skipped_warnings, 1u);
    EXPECT_LT(total, 50u);
}

TEST(RunExperiment, HorizonConflictsAndUnknownFieldsAreConfigErrors) {
    EXPECT_EQ(code_of([] { run_experiment(Json::parse(R"({"preset": "bm", "horizon": 2, "n_paths": 10})")); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { run_experiment(Json::parse(R"({"preset": "bm", "paths": 10})")); }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { run_experiment(Json::parse(R"({"n_paths": 10})")); }), ErrorCode::ConfigError);
    // The model block may set its own horizon.
    EXPECT_NO_THROW(run_experiment(Json::parse(R"({"model": {"preset": "bm"}, "horizon": 2, "n_paths": 10})")));
}

TEST(RunExperiment, ReportsAreReproducibleAcrossRunsAndThreadCounts) {
    const Json config = Json::parse(R"({"preset": "ex-6.2-6", "n_paths": 200, "seed": 11})");
    const std::string once = run_experiment(config, 1).to_json().dump();
    EXPECT_EQ(run_experiment(config, 1).to_json().dump(), once);
    EXPECT_EQ(run_experiment(config, 3).to_json().dump(), once);
}

TEST(WriteReport, WritesTheJsonAndCsvSidecars) {
    const auto dir = std::filesystem::temp_directory_path() / "lmconv-test-report";
    std::filesystem::remove_all(dir);
    const ExperimentReport r = run_experiment(Json::parse(R"({"preset": "bm", "n_paths": 20})"));
    write_report(r, dir);
    for (const char* file : {"report.json", "flags.csv", "confusion.csv", "checks.csv", "terminal_values.csv"})
        EXPECT_TRUE(std::filesystem::exists(dir / file)) << file;
    EXPECT_EQ(read_json_file(dir / "report.json").dump(), r.to_json().dump());
    std::filesystem::remove_all(dir);
}

TEST(Reproduce, AlternatingHarmonicChecksPass) {
    const ExperimentReport r = reproduce("remark-4.3");
    EXPECT_TRUE(r.passed());
    std::set<std::string> names;
    for (const auto& c : r.checks) names.insert(c.name);
    EXPECT_TRUE(names.count("variation-is-harmonic"));
    EXPECT_TRUE(names.count("partial-sums-closed-form"));
    EXPECT_EQ(code_of([] { reproduce("ex-0.0"); }), ErrorCode::UnknownExample);
}

TEST(IdentitySuite, DeviationsStayAtRoundingLevel) {
    const IdentitySuiteResult s = identity_suite(200, 7, 20);
    EXPECT_EQ(s.n_paths, 200u);
    EXPECT_LE(s.reciprocal, 1e-10);
    EXPECT_LE(s.pushforward, 1e-10);
    EXPECT_LE(s.round_trip, 1e-10);
    EXPECT_LE(s.atom_log_jump, 1e-10);
    EXPECT_LE(s.qlc_log_transform, 1e-10);
    ASSERT_EQ(s.lemma.size(), 4u);
    for (const auto& d : s.lemma) {
        EXPECT_LE(d.max_dev_A, 1e-9);
        EXPECT_LE(d.max_dev_B, 1e-9);
    }
}
