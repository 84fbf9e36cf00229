#include "lmconv/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lmconv/error.hpp"

namespace lmconv {
namespace {

bool meets(double v, double level, CrossingDirection dir) {
    switch (dir) {
        case CrossingDirection::Above: return v >= level;
        case CrossingDirection::Below: return v <= level;
        case CrossingDirection::Abs: return std::abs(v) >= level;
    }
    return false;
}

}  // namespace

std::optional<double> first_crossing(const TrajectoryView& view, double level, CrossingDirection direction,
                                     Monitoring monitoring) {
    const auto kv = view.knots();
    for (std::size_t i = 0; i < kv.size(); ++i) {
        if (i > 0 && monitoring == Monitoring::Continuous && meets(kv[i].left, level, direction) && kv[i].left != kv[i - 1].value) {
            const double a = kv[i - 1].time, b = kv[i].time;
            const double v0 = kv[i - 1].value, v1 = kv[i].left;
            double t = b;
            if (view.affine()) {
                const double target = (direction == CrossingDirection::Abs && v1 < v0) ? -level : level;
                t = a + std::clamp((target - v0) / (v1 - v0), 0.0, 1.0) * (b - a);
            } else {
                double lo = a, hi = b;
                for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    if (meets(view.value_between(mid), level, direction)) hi = mid;
                    else lo = mid;
                }
                t = hi;
            }
            if (t < b) return t;
        }
        if (meets(kv[i].value, level, direction)) return kv[i].time;
    }
    return std::nullopt;
}

StoppingFamily StoppingFamily::default_family(double horizon, int geometric_levels, int exponential_levels,
                                              int criterion_levels) {
    StoppingFamily f;
    for (int k = 0; k < geometric_levels; ++k) f.rules.push_back(DeterministicTime{std::ldexp(horizon, -k)});
    for (int k = 1; k <= exponential_levels; ++k)
        f.rules.push_back(FirstCrossingRule{CrossingTarget::Exponential, std::ldexp(1.0, k), CrossingDirection::Above});
    for (int k = 0; k < criterion_levels; ++k)
        f.rules.push_back(FirstCrossingRule{CrossingTarget::Criterion, std::ldexp(1.0, k), CrossingDirection::Above});
    return f;
}

StoppingFamily StoppingFamily::coarsened() const {
    StoppingFamily out;
    int det = 0, cross = 0;
    for (const auto& r : rules) {
        const bool is_det = std::holds_alternative<DeterministicTime>(r);
        int& counter = is_det ? det : cross;
        if (counter++ % 2 == 0) out.rules.push_back(r);
    }
    return out;
}

StopResult evaluate_rule(const StoppingRule& rule, const RuleTargets& targets, double horizon,
                         Monitoring monitoring) {
    if (const auto* d = std::get_if<DeterministicTime>(&rule)) {
        if (!(d->time >= 0.0)) fail(ErrorCode::InvalidParameters, "deterministic stopping time must be nonnegative");
        return d->time <= horizon ? StopResult{d->time, true} : StopResult{horizon, false};
    }
    const auto& c = std::get<FirstCrossingRule>(rule);
    const TrajectoryView* view = nullptr;
    switch (c.target) {
        case CrossingTarget::Path: view = targets.path; break;
        case CrossingTarget::Exponential: view = targets.exponential; break;
        case CrossingTarget::Criterion: view = targets.criterion; break;
    }
    if (view == nullptr) fail(ErrorCode::InvalidParameters, "crossing rule target is not available: " + describe(rule));
    const auto hit = first_crossing(*view, c.level, c.direction, monitoring);
    if (hit && *hit <= horizon) return {*hit, true};
    return {horizon, false};
}

std::string describe(const StoppingRule& rule) {
    std::ostringstream os;
    os.precision(17);
    if (const auto* d = std::get_if<DeterministicTime>(&rule)) {
        os << "t=" << d->time;
        return os.str();
    }
    const auto& c = std::get<FirstCrossingRule>(rule);
    const char* name = c.target == CrossingTarget::Path ? "X" : c.target == CrossingTarget::Exponential ? "Z" : "C";
    os << "cross:";
    if (c.direction == CrossingDirection::Abs) os << '|' << name << "|>=";
    else os << name << (c.direction == CrossingDirection::Above ? ">=" : "<=");
    os << c.level;
    return os.str();
}

StoppingRule parse_rule(const std::string& text) {
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) fail(ErrorCode::ConfigError, "bad number in stopping rule '" + text + "'");
        return v;
    };
    if (text.rfind("t=", 0) == 0) return DeterministicTime{number(text.substr(2))};
    if (text.rfind("cross:", 0) != 0) fail(ErrorCode::ConfigError, "unknown stopping rule '" + text + "'");
    std::string body = text.substr(6);
    FirstCrossingRule r;
    bool abs = false;
    if (!body.empty() && body.front() == '|') {
        abs = true;
        body.erase(0, 1);
    }
    if (body.empty()) fail(ErrorCode::ConfigError, "empty crossing rule");
    switch (body.front()) {
        case 'X': r.target = CrossingTarget::Path; break;
        case 'Z': r.target = CrossingTarget::Exponential; break;
        case 'C': r.target = CrossingTarget::Criterion; break;
        default: fail(ErrorCode::ConfigError, "crossing target must be X, Z or C in '" + text + "'");
    }
    body.erase(0, 1);
    if (abs) {
        if (body.empty() || body.front() != '|') fail(ErrorCode::ConfigError, "unbalanced '|' in '" + text + "'");
        body.erase(0, 1);
    }
    if (body.rfind(">=", 0) == 0) r.direction = abs ? CrossingDirection::Abs : CrossingDirection::Above;
    else if (body.rfind("<=", 0) == 0 && !abs) r.direction = CrossingDirection::Below;
    else fail(ErrorCode::ConfigError, "crossing rule needs >= or <= in '" + text + "'");
    r.level = number(body.substr(2));
    return r;
}

}  // namespace lmconv
