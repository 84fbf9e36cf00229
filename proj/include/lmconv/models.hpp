#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lmconv/cox.hpp"
#include "lmconv/functionals.hpp"
#include "lmconv/path.hpp"
#include "lmconv/rng.hpp"

namespace lmconv {

enum class ModelKind {
    RandomWalkLargeJumps,
    CoxOneJump,
    DiscreteDensitySteps,
    GridDiffusion,
    Composite,
    /// Fixed jumps at integer times; no randomness.
    DeterministicSeries,
};

std::string model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Jump at integer n: x_n with probability 1 - p_n, x_n (1 - 1/p_n) with
/// probability p_n, where p_n = 2^-k_n.
///
/// Size families: alt-sqrt, ones, harmonic-osc, exp-alt-sqrt, neg-harmonic,
/// alt-harmonic, constant (value `size_scale`), geometric (size_scale 2^-n),
/// explicit. Probability families: dyadic (k_n = n), ui-sequence, explicit.
struct RandomWalkParams {
    std::string sizes = "alt-sqrt";
    double size_scale = 1.0;
    /// Replace x_1 by 0, keeping the exponential away from a jump of -1.
    bool zero_first = false;
    std::vector<double> explicit_sizes;
    std::string probabilities = "dyadic";
    std::vector<int> explicit_exponents;
};

/// X_t = mark(rho) 1{rho <= t} - compensator, with rho the first time the
/// cumulative intensity exceeds a standard exponential draw.
struct CoxParams {
    CoxRate rate;
    /// Subtract the drift integral of mark * intensity up to rho.
    bool compensated = true;
};

/// Law of one step; `heavy_mass` is the weight of the heavy-tailed law.
struct StepLaw {
    std::vector<AtomPoint> points;
    double heavy_mass = 0.0;
};

/// Independent steps at n = 1, 2, ...
///
/// Families: two-point (P(1) = (1-p_n)/2, P(-(1-p_n)/(1+p_n)) = (1+p_n)/2
/// with the ui-sequence p_n), explicit (step n uses laws[n-1]).
struct StepsParams {
    std::string family = "two-point";
    std::vector<StepLaw> laws;
};

/// sigma^2 t with drift b on [start, horizon], sampled on a grid of step h.
struct DiffusionParams {
    double qv_rate = 1.0;
    double drift = 0.0;
    double step = 0.01;
    double start = 0.0;
};

/// Families: alt-harmonic ((-1)^n / n), zero.
struct SeriesParams {
    std::string sizes = "alt-harmonic";
};

struct ModelSpec {
    ModelKind kind = ModelKind::GridDiffusion;
    double horizon = 1.0;
    std::string preset_id;
    RandomWalkParams walk;
    CoxParams cox;
    StepsParams steps;
    DiffusionParams diffusion;
    SeriesParams series;
    std::vector<ModelSpec> components;

    /// Preset-specific classification overrides.
    std::optional<double> limsup_level;
    std::optional<double> epsilon;
    /// Jumps may fall below -1, so the exponential can change sign.
    bool signed_exponential = false;
    std::string description;

    void validate() const;
    bool is_martingale() const;
    /// Jumps strictly above -1 almost surely.
    bool jumps_above_minus_one() const;
};

/// Per-path facts known to the sampler.
struct SampleInfo {
    /// Cox jump time; +inf when the exponential draw exceeds the total mass.
    double rho = std::numeric_limits<double>::infinity();
    /// Indices n with a rare outcome.
    std::vector<int> rare_indices;
};

struct SampledPath {
    CadlagPath path;
    SampleInfo info;
};

/// Forced outcomes for tests of the sampler.
struct SampleOverrides {
    bool no_rare_events = false;
    std::optional<double> cox_draw;
};

SampledPath sample_path(const ModelSpec& model, std::uint64_t seed, std::uint64_t index = 0,
                        StreamId stream = StreamId::Primary);
SampledPath sample_path(const ModelSpec& model, Substream& rng, const SampleOverrides& overrides = {});

CompensatorSpec compensator(const ModelSpec& model);

/// x_n of a random walk or deterministic series.
double walk_size(const RandomWalkParams& walk, int n);
/// k_n with p_n = 2^-k_n.
int walk_exponent(const RandomWalkParams& walk, int n);
/// Largest 2^-k with p log(1 + 1/p) <= n^-3 and p <= 2^-n (e^{n^-2} - 1)^n.
int ui_sequence_exponent(int n);

/// Closed-form facts about the series of registered size families.
struct SeriesFacts {
    bool sum_converges = false;
    bool square_summable = false;
    bool abs_summable = false;
};
SeriesFacts series_facts(const RandomWalkParams& walk);

enum class Verdict { Yes, No, Mixed, Unknown };
std::string verdict_name(Verdict v);

struct Ternary {
    Verdict verdict = Verdict::Unknown;
    /// Probability of "yes" when mixed.
    double probability = 0.0;

    static Ternary yes() { return {Verdict::Yes, 1.0}; }
    static Ternary no() { return {Verdict::No, 0.0}; }
    static Ternary mixed(double p) { return {Verdict::Mixed, p}; }
    static Ternary unknown() { return {Verdict::Unknown, 0.0}; }
};

/// Asymptotic answers as t -> infinity, not at the simulated horizon.
struct EventOracle {
    Ternary converges;
    Ternary qv_finite;
    Ternary special_semimartingale_on_closure;
    Ternary ui_martingale_of_exponential;
    Ternary sup_finite;
    Ternary limsup_minus_infinity;
    std::string notes;
};

EventOracle analytic_oracle(const ModelSpec& model);

/// Per-path resolution of mixed oracle answers, using the sampler's info.
struct PathTruth {
    std::optional<bool> converges;
    std::optional<bool> qv_finite;
    std::optional<bool> limsup_minus_infinity;
};
PathTruth path_truth(const ModelSpec& model, const SampleInfo& info);

/// Registered preset ids.
std::vector<std::string> preset_ids();
ModelSpec preset(const std::string& id);

}  // namespace lmconv
