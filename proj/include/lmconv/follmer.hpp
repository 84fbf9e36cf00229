#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lmconv/criteria.hpp"
#include "lmconv/models.hpp"
#include "lmconv/stats.hpp"
#include "lmconv/stopping.hpp"

namespace lmconv {

/// One scheduled jump law before and after tilting.
struct TiltRow {
    double time = 0.0;
    std::vector<AtomPoint> p_points;
    std::vector<AtomPoint> q_points;
    /// Total q-mass; 1 up to rounding for a mean-zero p-law.
    double q_mass = 0.0;
};

/// M and Z = E(M) under P, together with the reciprocal logarithm N and
/// 1/Z = E(N) under the tilted measure.
struct DualModelPair {
    ModelSpec p_model;
    ModelSpec q_model;
    std::vector<TiltRow> tilt_certificate;
    /// P-side and Q-side Cox rates when the model has a Cox jump.
    std::optional<std::pair<CoxRate, CoxRate>> cox_tilt;
};

/// The point (phi(x), (1+x) m). Huge sizes and tiny gaps use the scaled
/// representation of AtomPoint.
AtomPoint tilt_point(const AtomPoint& p);
std::vector<AtomPoint> tilt_law(const std::vector<AtomPoint>& points);

/// Needs a martingale with jumps above -1 and analytic jump laws. Atom
/// models become explicit step laws, Cox rates are tilted by (1 + mark) and
/// a driftless diffusion keeps its law.
DualModelPair tilt_model(const ModelSpec& p_model);

/// Bounded nonnegative statistic of X at the stopping time.
///
/// Text forms: one, indicator:X<=c, indicator:X>=c, box:a,b, logistic:s,
/// cos:w.
struct Statistic {
    enum class Kind { One, AtMost, AtLeast, Box, Logistic, Cosine };
    Kind kind = Kind::One;
    double lo = 0.0;
    double hi = 0.0;

    double operator()(double x) const;
    std::string describe() const;
    static Statistic parse(const std::string& text);
};

/// M, Z and the explosion time of Z on one Q-side path.
struct DualSample {
    CadlagPath n_path;
    /// Reconstructed from N; ends at the explosion time of Z.
    CadlagPath m_path;
    /// N absorbed or E(N) below the numeric zero threshold.
    std::optional<double> explosion_time;
};

DualSample sample_dual(const DualModelPair& pair, std::uint64_t seed, std::uint64_t index);

struct DualityResult {
    /// E_P[Z_sigma G]
    Estimate lhs;
    /// E_Q[G 1{Z_sigma < inf}]
    Estimate rhs;
    double z_score = 0.0;
    bool consistent = false;
    std::size_t q_explosions = 0;
};

/// P and Q ensembles are drawn from disjoint substreams of `seed`. Crossing
/// rules are monitored at knots.
DualityResult duality_check(const DualModelPair& pair, const StoppingRule& sigma, const Statistic& g,
                            std::size_t n_paths, std::uint64_t seed, std::size_t threads = 1);

struct UiProbeRow {
    double horizon = 0.0;
    /// E_P[Z_T]; heavy tails make this a poor estimator of 1.
    Estimate p_mean;
    /// E_P[Z_T 1{sup_{t<=T} Z_t < level}]
    Estimate p_truncated;
    /// Q(sup_{t<=T} Z_t < level)
    Estimate q_survival;
    double z_score = 0.0;
};

struct UiProbeTable {
    double level = 0.0;
    std::vector<UiProbeRow> rows;
    /// "stable" when the Q-side survival stays within 4 s.e. of 1 at every
    /// horizon, "decaying" otherwise.
    std::string trend;
};

/// Explosion of Z under Q is read as Z reaching `level`; levels recede to
/// infinity in the asymptotic statement.
UiProbeTable ui_probe(const ModelSpec& p_model, const std::vector<double>& horizons, std::size_t n_paths,
                      std::uint64_t seed, double level = 1024.0, std::size_t threads = 1);

/// Exact E_P[Z_T 1{max Z < level}] and Q(max Z < level) for the two-point
/// steps with the ui-sequence, by enumerating histories. Branches whose
/// weight falls below 1e-30 are dropped; `pruned` bounds the error.
struct TwoPointOracle {
    double p_side = 0.0;
    double q_side = 0.0;
    double pruned = 0.0;
};
TwoPointOracle two_point_truncated_mass(int horizon, double level);

struct LocalizationDiagnostic {
    std::string target;
    std::vector<double> levels;
    /// E[sup_{t <= tau_n ^ T} |X_t|], times Z_{tau_n ^ T} when Z-weighted.
    std::vector<Estimate> sup_estimate;
    /// P(tau_n >= T)
    std::vector<Estimate> coverage;
    bool z_weighted = false;
};

/// tau_n is the first time |X| reaches levels[n]; X is M itself or a
/// criterion process of M.
LocalizationDiagnostic extended_local_diag(const ModelSpec& model, const std::optional<CriterionSpec>& target,
                                           const std::vector<double>& levels, std::size_t n_paths,
                                           std::uint64_t seed, bool z_weighted = false, std::size_t threads = 1);

struct ReciprocalConsistency {
    KsResult ks;
    std::size_t q_kept = 0;
    std::size_t p_resampled = 0;
};

/// Compares log Z_T sampled from the Q-model (non-exploded paths) with P-side
/// draws resampled in proportion to Z_T.
ReciprocalConsistency reciprocal_consistency(const DualModelPair& pair, std::size_t n_paths, std::uint64_t seed,
                                             std::size_t threads = 1);

}  // namespace lmconv
