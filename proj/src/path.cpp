#include "lmconv/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lmconv/error.hpp"

namespace lmconv {
namespace {

std::string fmt_time(double t) {
    std::ostringstream os;
    os.precision(17);
    os << t;
    return os.str();
}

void validate(const PathData& d) {
    if (!(std::isfinite(d.horizon) && d.horizon > 0.0)) fail(ErrorCode::InvalidPath, "horizon must be positive and finite");
    if (!std::isfinite(d.initial)) fail(ErrorCode::InvalidPath, "initial value must be finite");
    if (!(d.diffusion_qv_rate >= 0.0) || !std::isfinite(d.diffusion_qv_rate))
        fail(ErrorCode::InvalidPath, "diffusion_qv_rate must be nonnegative");
    if (!(d.diffusion_start >= 0.0)) fail(ErrorCode::InvalidPath, "diffusion_start must be nonnegative");
    if (d.explosion_time && !(*d.explosion_time >= 0.0)) fail(ErrorCode::InvalidPath, "explosion_time must be nonnegative");
    if (d.absorption_time && !(*d.absorption_time >= 0.0 && *d.absorption_time <= d.horizon))
        fail(ErrorCode::InvalidPath, "absorption_time must lie in [0, horizon]");
    if (d.absorption_time && d.explosion_time && *d.explosion_time <= *d.absorption_time)
        fail(ErrorCode::InvalidPath, "absorption must precede explosion");
    const double end = d.explosion_time ? std::min(*d.explosion_time, d.horizon) : d.horizon;
    const bool end_open = d.explosion_time && *d.explosion_time <= d.horizon;
    double prev = -1.0;
    for (const auto& j : d.jumps) {
        if (!std::isfinite(j.time) || !(j.time > 0.0)) fail(ErrorCode::InvalidPath, "jump time must be finite and positive");
        if (!(j.time > prev)) fail(ErrorCode::InvalidPath, "jump times must be strictly increasing at " + fmt_time(j.time));
        if (j.size == 0.0 || !std::isfinite(j.size)) fail(ErrorCode::InvalidPath, "jump size must be finite and nonzero at " + fmt_time(j.time));
        if (end_open ? !(j.time < end) : !(j.time <= end)) fail(ErrorCode::InvalidPath, "jump at " + fmt_time(j.time) + " outside the path domain");
        if (d.absorption_time && j.time > *d.absorption_time) fail(ErrorCode::InvalidPath, "jump after absorption");
        prev = j.time;
    }
    double prev_end = 0.0;
    for (const auto& s : d.drift) {
        if (!(s.t0 >= prev_end) || !(s.t1 > s.t0)) fail(ErrorCode::InvalidPath, "drift segments must be sorted, disjoint and nonempty");
        if (!std::isfinite(s.rate)) fail(ErrorCode::InvalidPath, "drift rate must be finite");
        if (s.t1 > d.horizon) fail(ErrorCode::InvalidPath, "drift segment beyond horizon");
        if (d.absorption_time && s.t1 > *d.absorption_time) fail(ErrorCode::InvalidPath, "drift after absorption");
        prev_end = s.t1;
    }
    if (d.diffusion_samples) {
        const auto& g = *d.diffusion_samples;
        if (!(g.step > 0.0) || !(g.start >= 0.0)) fail(ErrorCode::InvalidPath, "diffusion grid needs positive step");
        for (double v : g.increments)
            if (!std::isfinite(v)) fail(ErrorCode::InvalidPath, "diffusion increments must be finite");
    }
}

}  // namespace

struct CadlagPath::Impl {
    PathData data;
    std::vector<double> jump_times;
    std::vector<double> jump_prefix;   // jump_prefix[i] = sum of sizes of jumps 0..i-1
    std::vector<double> drift_prefix;  // integral of drift up to segment i start
    std::vector<double> grid_prefix;   // continuous part at grid node k

    explicit Impl(PathData d) : data(std::move(d)) {
        validate(data);
        jump_times.reserve(data.jumps.size());
        jump_prefix.assign(data.jumps.size() + 1, 0.0);
        for (std::size_t i = 0; i < data.jumps.size(); ++i) {
            jump_times.push_back(data.jumps[i].time);
            jump_prefix[i + 1] = jump_prefix[i] + data.jumps[i].size;
        }
        drift_prefix.assign(data.drift.size() + 1, 0.0);
        for (std::size_t i = 0; i < data.drift.size(); ++i) {
            const auto& s = data.drift[i];
            drift_prefix[i + 1] = drift_prefix[i] + s.rate * (s.t1 - s.t0);
        }
        if (data.diffusion_samples) {
            const auto& inc = data.diffusion_samples->increments;
            grid_prefix.assign(inc.size() + 1, 0.0);
            for (std::size_t k = 0; k < inc.size(); ++k) grid_prefix[k + 1] = grid_prefix[k] + inc[k];
        }
    }
};

CadlagPath::CadlagPath() : CadlagPath(PathData{}) {}

CadlagPath::CadlagPath(PathData data) : impl_(std::make_shared<const Impl>(std::move(data))) {}

const PathData& CadlagPath::data() const { return impl_->data; }

bool CadlagPath::explodes_within_horizon() const {
    return data().explosion_time && *data().explosion_time <= data().horizon;
}

double CadlagPath::domain_end() const {
    return explodes_within_horizon() ? *data().explosion_time : data().horizon;
}

double CadlagPath::continuous_qv(double t) const {
    const auto& d = data();
    if (d.absorption_time) t = std::min(t, *d.absorption_time);
    return d.diffusion_qv_rate * std::max(0.0, t - d.diffusion_start);
}

double CadlagPath::jump_sum(double t) const {
    const auto& times = impl_->jump_times;
    const auto idx = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    return impl_->jump_prefix[idx];
}

double CadlagPath::jump_sum_before(double t) const {
    const auto& times = impl_->jump_times;
    const auto idx = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
    return impl_->jump_prefix[idx];
}

double CadlagPath::drift_integral(double t) const {
    const auto& segs = data().drift;
    if (segs.empty()) return 0.0;
    const auto it = std::upper_bound(segs.begin(), segs.end(), t,
                                     [](double v, const DriftSegment& s) { return v < s.t0; });
    if (it == segs.begin()) return 0.0;
    const auto i = static_cast<std::size_t>(it - segs.begin()) - 1;
    const auto& s = segs[i];
    return impl_->drift_prefix[i] + s.rate * (std::min(t, s.t1) - s.t0);
}

double CadlagPath::diffusion_value(double t) const {
    const auto& d = data();
    if (!d.diffusion_samples) return 0.0;
    if (d.absorption_time) t = std::min(t, *d.absorption_time);
    const auto& g = *d.diffusion_samples;
    if (t <= g.start || g.increments.empty()) return 0.0;
    const double u = (t - g.start) / g.step;
    const double k = std::floor(u);
    if (k >= static_cast<double>(g.increments.size())) return impl_->grid_prefix.back();
    const auto idx = static_cast<std::size_t>(k);
    return impl_->grid_prefix[idx] + (u - k) * g.increments[idx];
}

std::vector<double> CadlagPath::knot_times() const {
    const auto& d = data();
    const double end = domain_end();
    const bool open_end = explodes_within_horizon();
    auto inside = [&](double t) { return t >= 0.0 && (open_end ? t < end : t <= end); };
    std::vector<double> knots;
    knots.reserve(d.jumps.size() + 2 * d.drift.size() + 2);
    knots.push_back(0.0);
    for (const auto& j : d.jumps) knots.push_back(j.time);
    for (const auto& s : d.drift) {
        if (inside(s.t0)) knots.push_back(s.t0);
        if (inside(s.t1)) knots.push_back(s.t1);
    }
    if (d.diffusion_samples) {
        const auto& g = *d.diffusion_samples;
        for (std::size_t k = 0; k <= g.increments.size(); ++k) {
            const double t = g.start + static_cast<double>(k) * g.step;
            if (inside(t)) knots.push_back(t);
        }
    }
    if (d.absorption_time && inside(*d.absorption_time)) knots.push_back(*d.absorption_time);
    if (d.diffusion_qv_rate > 0.0 && inside(d.diffusion_start)) knots.push_back(d.diffusion_start);
    if (!open_end) knots.push_back(end);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    return knots;
}

namespace {

void check_query(const CadlagPath& path, double t) {
    if (!(t >= 0.0)) fail(ErrorCode::DomainError, "negative query time " + fmt_time(t));
    if (path.explosion_time() && t >= *path.explosion_time())
        fail(ErrorCode::QueryAfterExplosion, "query at " + fmt_time(t) + " after explosion at " + fmt_time(*path.explosion_time()));
    if (t > path.horizon()) fail(ErrorCode::QueryBeyondHorizon, "query at " + fmt_time(t) + " beyond horizon " + fmt_time(path.horizon()));
}

double raw_value(const CadlagPath& p, double t) {
    if (p.absorption_time()) t = std::min(t, *p.absorption_time());
    return p.initial() + p.jump_sum(t) + p.drift_integral(t) + p.diffusion_value(t);
}

double raw_left(const CadlagPath& p, double t) {
    if (t <= 0.0) return p.initial();
    if (p.absorption_time() && t > *p.absorption_time()) return raw_value(p, *p.absorption_time());
    return p.initial() + p.jump_sum_before(t) + p.drift_integral(t) + p.diffusion_value(t);
}

}  // namespace

double value_at(const CadlagPath& path, double t) {
    check_query(path, t);
    return raw_value(path, t);
}

double left_limit(const CadlagPath& path, double t) {
    check_query(path, t);
    return raw_left(path, t);
}

std::vector<KnotValue> knot_values(const CadlagPath& path) {
    const auto knots = path.knot_times();
    std::vector<KnotValue> out;
    out.reserve(knots.size());
    const auto& jumps = path.jumps();
    const auto& segs = path.drift();
    const std::optional<double> absorb = path.absorption_time();
    std::size_t j = 0;
    double jsum = 0.0;
    std::size_t d = 0;
    double dsum = 0.0;  // integral of drift over completed segments
    auto drift_at = [&](double t) {
        while (d < segs.size() && segs[d].t1 <= t) {
            dsum += segs[d].rate * (segs[d].t1 - segs[d].t0);
            ++d;
        }
        if (d < segs.size() && t > segs[d].t0) return dsum + segs[d].rate * (t - segs[d].t0);
        return dsum;
    };
    for (double t : knots) {
        KnotValue kv;
        kv.time = t;
        if (absorb && t > *absorb) {
            const double frozen = out.empty() ? path.initial() : raw_value(path, *absorb);
            kv.left = frozen;
            kv.value = frozen;
            out.push_back(kv);
            continue;
        }
        while (j < jumps.size() && jumps[j].time < t) jsum += jumps[j++].size;
        const double cont = drift_at(t) + path.diffusion_value(t);
        kv.left = (t == 0.0) ? path.initial() : path.initial() + jsum + cont;
        double at = 0.0;
        if (j < jumps.size() && jumps[j].time == t) at = jumps[j].size;
        kv.value = path.initial() + jsum + at + cont;
        out.push_back(kv);
    }
    return out;
}

std::optional<double> first_crossing(const CadlagPath& path, double level) {
    if (!(level >= 0.0)) fail(ErrorCode::DomainError, "crossing level must be nonnegative");
    const auto kv = knot_values(path);
    for (std::size_t i = 0; i < kv.size(); ++i) {
        if (i > 0) {
            const double a = kv[i - 1].time, b = kv[i].time;
            const double v0 = kv[i - 1].value, v1 = kv[i].left;
            if (std::abs(v1) >= level && v1 != v0) {
                const double target = v1 > v0 ? level : -level;
                double frac = (target - v0) / (v1 - v0);
                frac = std::clamp(frac, 0.0, 1.0);
                const double t = a + frac * (b - a);
                if (t < b) return t;
            }
        }
        if (std::abs(kv[i].value) >= level) return kv[i].time;
    }
    if (path.explodes_within_horizon() && !kv.empty()) {
        // The affine piece after the last knot runs up to the explosion time.
        const double a = kv.back().time, b = *path.explosion_time();
        const double v0 = kv.back().value, v1 = raw_left(path, b);
        if (std::abs(v1) >= level && v1 != v0) {
            const double target = v1 > v0 ? level : -level;
            const double t = a + std::clamp((target - v0) / (v1 - v0), 0.0, 1.0) * (b - a);
            if (t < b) return t;
        }
    }
    return std::nullopt;
}

double tail_oscillation(const CadlagPath& path, double window_start) {
    if (!(window_start >= 0.0) || window_start > path.horizon())
        fail(ErrorCode::QueryBeyondHorizon, "window start outside [0, horizon]");
    if (path.explodes_within_horizon())
        fail(ErrorCode::QueryAfterExplosion, "tail window intersects the explosion time");
    double hi = raw_value(path, window_start);
    double lo = hi;
    for (const auto& k : knot_values(path)) {
        if (k.time <= window_start) continue;
        hi = std::max({hi, k.left, k.value});
        lo = std::min({lo, k.left, k.value});
    }
    return hi - lo;
}

PathBuilder::PathBuilder(double horizon) : horizon_(horizon) {}

PathBuilder& PathBuilder::set_initial(double value) {
    initial_ = value;
    return *this;
}

PathBuilder& PathBuilder::add_initial(double value) {
    initial_ += value;
    return *this;
}

PathBuilder& PathBuilder::add_jump(double time, double size) {
    if (size != 0.0) jumps_.push_back({time, size});
    return *this;
}

PathBuilder& PathBuilder::add_drift(double t0, double t1, double rate) {
    if (t1 > t0 && rate != 0.0) drift_.push_back({t0, t1, rate});
    return *this;
}

PathBuilder& PathBuilder::add_scaled(const CadlagPath& path, double coefficient) {
    if (coefficient == 0.0) return *this;
    for (const auto& j : path.jumps()) add_jump(j.time, coefficient * j.size);
    return add_scaled_continuous(path, coefficient);
}

PathBuilder& PathBuilder::add_scaled_continuous(const CadlagPath& path, double coefficient) {
    if (coefficient == 0.0) return *this;
    initial_ += coefficient * path.initial();
    for (const auto& s : path.drift()) add_drift(s.t0, s.t1, coefficient * s.rate);
    if (path.diffusion_qv_rate() > 0.0 || path.data().diffusion_samples) {
        const auto& d = path.data();
        // Scaling a path scales its continuous martingale part, so the
        // source is stored once with the accumulated coefficient.
        const double base_rate = d.diffusion_qv_rate;
        if (!has_source_) {
            has_source_ = true;
            source_qv_rate_ = base_rate;
            source_start_ = d.diffusion_start;
            source_grid_ = d.diffusion_samples;
            source_coefficient_ = coefficient;
        } else {
            // Only an identical continuous part (same rate, start and grid)
            // is recognised as the same source.
            const bool same_grid = source_grid_.has_value() == d.diffusion_samples.has_value() &&
                                   (!source_grid_ || (source_grid_->step == d.diffusion_samples->step &&
                                                      source_grid_->start == d.diffusion_samples->start &&
                                                      source_grid_->increments == d.diffusion_samples->increments));
            if (!same_grid || source_start_ != d.diffusion_start || source_qv_rate_ != base_rate)
                fail(ErrorCode::InvalidParameters, "paths with different continuous martingale parts cannot be combined");
            source_coefficient_ += coefficient;
        }
    }
    if (path.absorption_time()) {
        absorption_ = absorption_ ? std::min(*absorption_, *path.absorption_time()) : path.absorption_time();
    }
    if (path.explosion_time()) {
        explosion_ = explosion_ ? std::min(*explosion_, *path.explosion_time()) : path.explosion_time();
    }
    return *this;
}

PathBuilder& PathBuilder::add_scaled_qv(const CadlagPath& path, double coefficient) {
    const double rate = path.diffusion_qv_rate();
    if (rate == 0.0 || coefficient == 0.0) return *this;
    double end = path.domain_end();
    if (path.absorption_time()) end = std::min(end, *path.absorption_time());
    return add_drift(path.diffusion_start(), end, coefficient * rate);
}

PathBuilder& PathBuilder::set_continuous_part(double qv_rate, double start, std::optional<DiffusionGrid> grid) {
    has_source_ = qv_rate > 0.0 || grid.has_value();
    source_qv_rate_ = qv_rate;
    source_start_ = start;
    source_grid_ = std::move(grid);
    source_coefficient_ = 1.0;
    return *this;
}

PathBuilder& PathBuilder::set_absorption(std::optional<double> time) {
    absorption_ = time;
    return *this;
}

PathBuilder& PathBuilder::set_explosion(std::optional<double> time) {
    explosion_ = time;
    return *this;
}

CadlagPath PathBuilder::build() const {
    PathData d;
    d.horizon = horizon_;
    d.initial = initial_;
    d.absorption_time = absorption_;
    d.explosion_time = explosion_;

    std::vector<JumpEvent> js = jumps_;
    std::stable_sort(js.begin(), js.end(), [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
    for (std::size_t i = 0; i < js.size();) {
        std::size_t k = i;
        double sum = 0.0;
        while (k < js.size() && js[k].time == js[i].time) sum += js[k++].size;
        // X_{0-} = X_0, so a jump at time 0 is part of the initial value.
        if (js[i].time == 0.0) d.initial += sum;
        else if (sum != 0.0) d.jumps.push_back({js[i].time, sum});
        i = k;
    }

    if (!drift_.empty()) {
        std::map<double, double> delta;
        for (const auto& s : drift_) {
            delta[s.t0] += s.rate;
            delta[s.t1] -= s.rate;
        }
        // Sum rates exactly per elementary interval to avoid drift from
        // running-sum cancellation.
        std::vector<double> cuts;
        for (const auto& [t, _] : delta) cuts.push_back(t);
        std::vector<DriftSegment> sorted = drift_;
        std::sort(sorted.begin(), sorted.end(), [](const DriftSegment& a, const DriftSegment& b) { return a.t0 < b.t0; });
        std::vector<const DriftSegment*> active;
        std::size_t next = 0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double a = cuts[i], b = cuts[i + 1];
            active.erase(std::remove_if(active.begin(), active.end(), [a](const DriftSegment* s) { return s->t1 <= a; }),
                         active.end());
            while (next < sorted.size() && sorted[next].t0 <= a) active.push_back(&sorted[next++]);
            // Summing the covering rates afresh per interval keeps the result
            // free of running-sum cancellation residue.
            double rate = 0.0;
            for (const auto* s : active) rate += s->rate;
            if (rate != 0.0) d.drift.push_back({a, b, rate});
        }
        // The path is frozen after absorption.
        if (absorption_) {
            std::vector<DriftSegment> kept;
            for (auto s : d.drift) {
                if (s.t0 >= *absorption_) break;
                s.t1 = std::min(s.t1, *absorption_);
                kept.push_back(s);
            }
            d.drift = std::move(kept);
        }
    }

    if (has_source_ && source_coefficient_ != 0.0) {
        const double c = source_coefficient_;
        d.diffusion_qv_rate = c * c * source_qv_rate_;
        d.diffusion_start = source_start_;
        if (source_grid_) {
            DiffusionGrid g = *source_grid_;
            for (double& v : g.increments) v *= c;
            d.diffusion_samples = std::move(g);
        }
    }
    return CadlagPath(std::move(d));
}

}  // namespace lmconv
