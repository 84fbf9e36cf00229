#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lmconv/path.hpp"

namespace lmconv {

/// A trajectory that is continuous and monotone between consecutive knots.
class TrajectoryView {
public:
    virtual ~TrajectoryView() = default;
    virtual double horizon() const = 0;
    virtual std::vector<KnotValue> knots() const = 0;
    /// Value strictly inside a knot interval; used to locate crossings.
    virtual double value_between(double t) const = 0;
    /// True when the trajectory is affine between knots.
    virtual bool affine() const { return false; }
};

class PathTrajectory final : public TrajectoryView {
public:
    explicit PathTrajectory(CadlagPath path) : path_(std::move(path)) {}
    double horizon() const override { return path_.domain_end(); }
    std::vector<KnotValue> knots() const override { return knot_values(path_); }
    double value_between(double t) const override { return value_at(path_, t); }
    bool affine() const override { return true; }

private:
    CadlagPath path_;
};

enum class CrossingDirection { Above, Below, Abs };

/// Which derived trajectory a crossing rule watches.
enum class CrossingTarget { Path, Exponential, Criterion };

struct DeterministicTime {
    double time = 0.0;
};

struct FirstCrossingRule {
    CrossingTarget target = CrossingTarget::Path;
    double level = 0.0;
    CrossingDirection direction = CrossingDirection::Abs;
};

using StoppingRule = std::variant<DeterministicTime, FirstCrossingRule>;

struct StoppingFamily {
    std::vector<StoppingRule> rules;

    /// Deterministic times horizon * 2^-k (k < geometric_levels), first
    /// crossings of the exponential above 2^k (1 <= k <= exponential_levels)
    /// and of the criterion above 2^k (0 <= k < criterion_levels).
    static StoppingFamily default_family(double horizon, int geometric_levels = 6, int exponential_levels = 8,
                                         int criterion_levels = 4);
    /// Every other rule of each kind; used to judge stability under refinement.
    StoppingFamily coarsened() const;
};

struct StopResult {
    double time = 0.0;
    bool triggered = false;
};

/// Knot monitoring looks only at values at knots. On a path sampled on a
/// grid this keeps a crossing rule a stopping time of the sampled model,
/// whereas continuous monitoring interpolates and loses the overshoot.
enum class Monitoring { Continuous, Knots };

/// First time the trajectory meets the crossing condition, if any.
std::optional<double> first_crossing(const TrajectoryView& view, double level, CrossingDirection direction,
                                     Monitoring monitoring = Monitoring::Continuous);

/// Trajectories available to crossing rules; null entries are unavailable.
struct RuleTargets {
    const TrajectoryView* path = nullptr;
    const TrajectoryView* exponential = nullptr;
    const TrajectoryView* criterion = nullptr;
};

/// Time in [0, horizon]; rules that never trigger stop at the horizon.
StopResult evaluate_rule(const StoppingRule& rule, const RuleTargets& targets, double horizon,
                         Monitoring monitoring = Monitoring::Continuous);

std::string describe(const StoppingRule& rule);
StoppingRule parse_rule(const std::string& text);

}  // namespace lmconv
