#pragma once

#include <memory>
#include <optional>
#include <vector>

namespace lmconv {

struct JumpEvent {
    double time = 0.0;
    double size = 0.0;
};

/// Constant drift `rate` on [t0, t1).
struct DriftSegment {
    double t0 = 0.0;
    double t1 = 0.0;
    double rate = 0.0;
};

/// Increments of the continuous martingale part on the grid start + k * step.
struct DiffusionGrid {
    double start = 0.0;
    double step = 0.0;
    std::vector<double> increments;
};

/// Raw fields of a path. CadlagPath validates them on construction.
struct PathData {
    double initial = 0.0;
    double horizon = 1.0;
    std::vector<JumpEvent> jumps;
    std::vector<DriftSegment> drift;
    /// d[X^c,X^c]/dt on [diffusion_start, horizon].
    double diffusion_qv_rate = 0.0;
    double diffusion_start = 0.0;
    std::optional<DiffusionGrid> diffusion_samples;
    std::optional<double> absorption_time;
    std::optional<double> explosion_time;
};

/// Immutable right-continuous path with finitely many jumps, piecewise
/// constant drift and an optional sampled continuous martingale part.
///
/// After `absorption_time` the path is frozen. Queries at or after
/// `explosion_time` are rejected.
class CadlagPath {
public:
    CadlagPath();
    explicit CadlagPath(PathData data);

    const PathData& data() const;
    double initial() const { return data().initial; }
    double horizon() const { return data().horizon; }
    const std::vector<JumpEvent>& jumps() const { return data().jumps; }
    const std::vector<DriftSegment>& drift() const { return data().drift; }
    double diffusion_qv_rate() const { return data().diffusion_qv_rate; }
    double diffusion_start() const { return data().diffusion_start; }
    const std::optional<double>& absorption_time() const { return data().absorption_time; }
    const std::optional<double>& explosion_time() const { return data().explosion_time; }

    bool explodes_within_horizon() const;
    /// min(horizon, explosion_time); the path is defined on [0, end] or [0, end).
    double domain_end() const;

    /// [X^c,X^c]_t, frozen after absorption.
    double continuous_qv(double t) const;
    double jump_sum(double t) const;
    double jump_sum_before(double t) const;
    double drift_integral(double t) const;
    double diffusion_value(double t) const;

    /// Sorted distinct times at which the path may jump or change slope,
    /// including 0 and the end of the domain when it is attained.
    std::vector<double> knot_times() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

double value_at(const CadlagPath& path, double t);
double left_limit(const CadlagPath& path, double t);
std::optional<double> first_crossing(const CadlagPath& path, double level);
double tail_oscillation(const CadlagPath& path, double window_start);

struct KnotValue {
    double time = 0.0;
    double left = 0.0;
    double value = 0.0;
};

/// Left limits and values at every knot, computed in one sweep. Between
/// consecutive knots the path is affine.
std::vector<KnotValue> knot_values(const CadlagPath& path);

/// Accumulates jumps, drift and continuous parts and produces a normalised
/// path: coincident jumps are summed, zero jumps dropped, jumps at time 0
/// folded into the initial value, and overlapping drift segments split into
/// disjoint pieces.
class PathBuilder {
public:
    explicit PathBuilder(double horizon);

    PathBuilder& set_initial(double value);
    PathBuilder& add_initial(double value);
    PathBuilder& add_jump(double time, double size);
    PathBuilder& add_drift(double t0, double t1, double rate);
    /// Adds `coefficient * path`. All continuous martingale parts added this
    /// way must come from the same source, so their coefficients add up.
    PathBuilder& add_scaled(const CadlagPath& path, double coefficient);
    /// As add_scaled but without the jumps.
    PathBuilder& add_scaled_continuous(const CadlagPath& path, double coefficient);
    /// Adds `coefficient * [X^c,X^c]` of `path` as drift.
    PathBuilder& add_scaled_qv(const CadlagPath& path, double coefficient);
    PathBuilder& set_continuous_part(double qv_rate, double start, std::optional<DiffusionGrid> grid);
    PathBuilder& set_absorption(std::optional<double> time);
    PathBuilder& set_explosion(std::optional<double> time);

    CadlagPath build() const;

private:
    double horizon_;
    double initial_ = 0.0;
    std::vector<JumpEvent> jumps_;
    std::vector<DriftSegment> drift_;
    double source_qv_rate_ = 0.0;
    double source_start_ = 0.0;
    std::optional<DiffusionGrid> source_grid_;
    bool has_source_ = false;
    double source_coefficient_ = 0.0;
    std::optional<double> absorption_;
    std::optional<double> explosion_;
};

}  // namespace lmconv
