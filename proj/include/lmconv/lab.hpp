#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lmconv/criteria.hpp"
#include "lmconv/follmer.hpp"
#include "lmconv/functionals.hpp"
#include "lmconv/io.hpp"
#include "lmconv/models.hpp"
#include "lmconv/stats.hpp"

namespace lmconv {

Json estimate_json(const Estimate& e);
Json verdict_json(const CriterionVerdict& v);
Json ui_json(const UiProbeTable& t);
Json duality_json(const DualityResult& d, const std::string& rule, const std::string& stat, double horizon);

/// Finite-horizon stand-ins for asymptotic events. The tail window is
/// [alpha T, T].
struct Tolerances {
    /// Largest tail oscillation of a convergent path.
    double epsilon = 1e-2;
    double alpha = 0.5;
    /// -K stands in for -infinity.
    double minus_infinity_level = 1e3;
    /// E(X) converges in R \ {0} when its tail stays in [eta, 1/eta] with
    /// log|E(X)| oscillating by less than epsilon.
    double eta = 1e-3;
    /// An increasing process keeps growing when its tail increment exceeds
    /// this fraction of the increment that linear accrual over the horizon
    /// would put in the window.
    double growth_fraction = 0.1;
    /// Values at or above the cap count as infinite.
    double cap = 1e6;

    void validate() const;
    Json to_json() const;
    /// Missing fields keep their defaults.
    static Tolerances from_json(const Json& j);
};

/// Per-path numeric flags; every flag describes the simulated window only.
struct EventFlags {
    bool convergent = false;
    bool liminf_above = false;
    bool limsup_above = false;
    /// Judged on the continuous part and the jumps with |dX| <= 1.
    bool qv_growing = false;
    bool functional_c_finite = false;
    bool exp_converges_nonzero = false;
    bool absorbed = false;
    /// False when the log transform is unavailable (jumps at or below -1).
    bool log_transform_available = false;
    bool y_convergent = false;
    bool v_finite = false;
    /// Var(A) keeps growing over the tail window.
    bool variation_growing = false;

    double tail_oscillation = 0.0;
    double terminal_value = 0.0;
    double qv_terminal = 0.0;
    /// [X^c,X^c]_T plus the squares of the jumps with |dX| <= 1.
    double qv_terminal_truncated = 0.0;
    double functional_c = 0.0;
    double total_variation = 0.0;
};

/// Names of the flags as they appear in reports, all prefixed "numeric-".
std::vector<std::string> flag_names();
bool flag_value(const EventFlags& f, const std::string& name);

/// The model provides the compensator and per-preset overrides of epsilon
/// and the -infinity level.
std::vector<EventFlags> classify_events(const ModelSpec& model, const std::vector<CadlagPath>& ensemble,
                                        const Tolerances& tolerances, std::size_t threads = 1);

struct FlagFrequency {
    std::string name;
    Estimate frequency;
};
std::vector<FlagFrequency> flag_frequencies(const std::vector<EventFlags>& flags);

/// counts[numeric][oracle] over paths whose oracle answer is known.
struct ConfusionMatrix {
    std::string event;
    std::size_t counts[2][2] = {{0, 0}, {0, 0}};

    std::size_t total() const;
    double diagonal_mass() const;
};

/// Events: converges, qv_finite, limsup_minus_infinity.
std::vector<ConfusionMatrix> confusion_matrices(const ModelSpec& model, const std::vector<SampleInfo>& infos,
                                                const std::vector<EventFlags>& flags);

/// Registered equalities between event flags:
///   convergent-vs-qv-limsup   {X converges} vs {[X,X] finite, limsup > -K}
///   convergent-vs-functional  {X converges} vs {functional c finite}
///   convergent-vs-exponential {X converges, [X,X] finite} vs {E(X) converges in R \ {0}}
///   joint-log-transform       {X converges, V finite} vs {Y converges, V finite}
///   qv-vs-limsup              {[X,X] finite} vs {limsup > -K}
std::vector<std::string> equality_ids();

struct EqualityReport {
    std::string equality_id;
    std::string description;
    /// Fraction of paths where both sides agree.
    Estimate agreement;
    /// Path counts per (left, right) outcome, keys "TT", "TF", "FT", "FF".
    std::map<std::string, std::size_t> pattern;
    /// Agreement of the numeric convergence flag with the oracle.
    std::optional<Estimate> oracle_agreement;
    std::vector<std::string> warnings;
};

EqualityReport event_equality_test(const ModelSpec& model, const std::string& equality_id, std::size_t n_paths,
                                   std::uint64_t seed, const Tolerances& tolerances, std::size_t threads = 1);

/// A quantitative statement checked by an experiment. Only gating checks
/// decide whether the experiment passes.
struct Check {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool gating = true;
    std::string detail;
};

struct ExperimentReport {
    std::string id;
    Json config;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<FlagFrequency> frequencies;
    std::vector<ConfusionMatrix> confusion;
    std::optional<IdentityDeviation> identities;
    /// Criterion verdicts, duality checks and UI probes.
    Json verdicts = Json::object();
    std::vector<Check> checks;
    std::vector<std::string> warnings;
    /// Plot data: terminal values and QV trajectories of the first paths.
    std::vector<double> terminal_values;
    std::vector<std::vector<double>> qv_trajectories;
    std::vector<double> qv_times;
    /// Kept out of the payload so reports are reproducible byte for byte.
    double runtime_seconds = 0.0;

    bool passed() const;
    Json to_json() const;
};

/// Writes <dir>/report.json and CSV sidecars (flags, confusion, checks,
/// terminal values, QV trajectories).
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Config schema: {model | preset, n_paths, horizon, seed, tolerances{},
/// family{}, criteria[], follmer{}, report{}}. A horizon that differs from
/// the preset's is a ConfigError unless the model block sets it.
ExperimentReport run_experiment(const Json& config, std::size_t threads = 1);

/// The two-point steps with the ui-sequence: B^a criteria stay bounded while
/// the truncated mass E_P[Z_T 1{max Z < level}] decays, checked against the
/// exact enumeration on both sides of the duality.
struct NkCheckOptions {
    std::vector<double> a_values{2.0, 3.0};
    std::vector<double> horizons{8.0, 16.0, 32.0};
    std::size_t criterion_paths = 10000;
    std::vector<double> probe_horizons{8.0, 10.0, 11.0, 12.0, 16.0, 32.0};
    std::size_t probe_paths = 100000;
    /// The P-side Monte Carlo is compared with the oracle up to here only.
    double p_side_max_horizon = 12.0;
    double level = 1024.0;
    double cap = 10.0;
    std::uint64_t seed = 7;
    std::size_t threads = 1;
};

struct NkCheckResult {
    std::vector<Check> checks;
    Json verdicts = Json::object();
    bool passed() const;
};

NkCheckResult nk_check(const NkCheckOptions& options = {});

struct ReproduceOverrides {
    std::optional<std::size_t> n_paths;
    std::optional<double> horizon;
    std::uint64_t seed = 7;
    Tolerances tolerances;
    std::size_t threads = 1;
    /// Smaller ensembles for the battery.
    bool quick = false;
};

/// Preset ids and "ex-5.16".
std::vector<std::string> example_ids();
ExperimentReport reproduce(const std::string& example_id, const ReproduceOverrides& overrides = {});

struct BatteryResult {
    std::vector<ExperimentReport> reports;
    bool passed() const;
};

/// Quick reproduction of every example; reports go to <out_dir>/<id>/ and a
/// summary to <out_dir>/battery.json.
BatteryResult run_battery(std::uint64_t seed, std::size_t threads, const std::optional<std::filesystem::path>& out_dir);

}  // namespace lmconv
