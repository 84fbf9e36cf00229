#include "lmconv/stochexp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmconv/error.hpp"

namespace lmconv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// X^c + drift - [X^c,X^c]/2 between two times, the continuous log-increment of E(X).
double continuous_log_increment(const CadlagPath& x, double a, double b) {
    return (x.drift_integral(b) - x.drift_integral(a)) + (x.diffusion_value(b) - x.diffusion_value(a)) -
           0.5 * (x.continuous_qv(b) - x.continuous_qv(a));
}

}  // namespace

double phi(double x) {
    if (!(x > -1.0)) fail(ErrorCode::DomainError, "phi is defined for x > -1");
    return -x / (1.0 + x);
}

ExponentialPath::ExponentialPath(CadlagPath base, std::vector<ExponentialKnot> knots,
                                 std::optional<double> absorption_time, std::optional<double> numeric_zero_time)
    : base_(std::move(base)),
      knots_(std::move(knots)),
      absorption_(absorption_time),
      numeric_zero_(numeric_zero_time) {}

std::size_t ExponentialPath::knot_index(double t) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                     [](double v, const ExponentialKnot& k) { return v < k.time; });
    return it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
}

double ExponentialPath::log_abs_at(double t) const {
    (void)lmconv::value_at(base_, t);  // domain checks
    if (absorption_ && t >= *absorption_) return -kInf;
    const auto& k = knots_[knot_index(t)];
    if (k.time == t) return k.log_value;
    return k.log_value + continuous_log_increment(base_, k.time, t);
}

int ExponentialPath::sign_at(double t) const {
    (void)lmconv::value_at(base_, t);
    if (absorption_ && t >= *absorption_) return 0;
    return knots_[knot_index(t)].sign;
}

double ExponentialPath::value_at(double t) const {
    const double l = log_abs_at(t);
    if (l < kNumericZeroLog) return 0.0;
    return sign_at(t) * std::exp(l);
}

double ExponentialPath::left_limit(double t) const {
    (void)lmconv::left_limit(base_, t);
    if (t <= 0.0) return value_at(0.0);
    if (absorption_ && t > *absorption_) return 0.0;
    const auto& k = knots_[knot_index(t)];
    if (k.time == t) return k.log_left < kNumericZeroLog ? 0.0 : k.sign_left * std::exp(k.log_left);
    return value_at(t);
}

std::vector<KnotValue> ExponentialPath::knots() const {
    std::vector<KnotValue> out;
    out.reserve(knots_.size());
    for (const auto& k : knots_) {
        KnotValue v;
        v.time = k.time;
        v.left = k.log_left < kNumericZeroLog ? 0.0 : k.sign_left * std::exp(k.log_left);
        v.value = k.log_value < kNumericZeroLog ? 0.0 : k.sign * std::exp(k.log_value);
        out.push_back(v);
    }
    return out;
}

ExponentialPair stoch_exp(const CadlagPath& x, ExpOptions options) {
    const auto times = x.knot_times();
    const auto& jumps = x.jumps();
    std::vector<ExponentialKnot> knots;
    knots.reserve(times.size());
    std::optional<double> absorption;
    std::optional<double> numeric_zero;
    double log_abs = x.initial();
    int sign = 1;
    std::size_t j = 0;
    double prev = 0.0;
    double prev_log = log_abs;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        ExponentialKnot k;
        k.time = t;
        if (absorption) {
            k.log_left = k.log_value = -kInf;
            k.sign_left = k.sign = 0;
            knots.push_back(k);
            continue;
        }
        if (i > 0) {
            k.log_increment = continuous_log_increment(x, prev, t);
            log_abs += k.log_increment;
        }
        k.log_left = log_abs;
        k.sign_left = sign;
        if (!numeric_zero && log_abs < kNumericZeroLog) {
            // log|Z| is affine on the interval, so the crossing time is exact.
            const double frac = (kNumericZeroLog - prev_log) / (log_abs - prev_log);
            numeric_zero = prev + std::clamp(frac, 0.0, 1.0) * (t - prev);
        }
        while (j < jumps.size() && jumps[j].time < t) ++j;
        if (j < jumps.size() && jumps[j].time == t) {
            const double d = jumps[j].size;
            const double f = 1.0 + d;
            if (std::abs(f) < kAbsorptionTolerance) {
                absorption = t;
                k.factor = 0.0;
                log_abs = -kInf;
                sign = 0;
            } else if (f < 0.0) {
                if (!options.allow_signed)
                    fail(ErrorCode::JumpBelowMinusOne, "jump below -1 at t=" + std::to_string(t));
                k.factor = f;
                sign = -sign;
                log_abs += std::log(-f);
            } else {
                k.factor = f;
                log_abs += std::log1p(d);
            }
        }
        k.log_value = log_abs;
        k.sign = sign;
        if (!numeric_zero && !absorption && log_abs < kNumericZeroLog) numeric_zero = t;
        knots.push_back(k);
        prev = t;
        prev_log = log_abs;
    }
    ExponentialPair pair;
    pair.base = x;
    pair.absorption_time = absorption;
    pair.exponential = ExponentialPath(x, std::move(knots), absorption, numeric_zero);
    return pair;
}

CadlagPath stoch_log(const ExponentialPath& z) {
    const CadlagPath& base = z.base();
    const auto& knots = z.exp_knots();
    PathBuilder b(base.horizon());
    if (knots.empty()) return b.build();
    b.set_initial(knots.front().log_value);
    b.set_continuous_part(base.diffusion_qv_rate(), base.diffusion_start(), base.data().diffusion_samples);
    for (std::size_t i = 1; i < knots.size(); ++i) {
        const auto& k = knots[i];
        const double a = knots[i - 1].time;
        if (knots[i - 1].factor == 0.0 || knots[i - 1].sign == 0) break;
        const double dt = k.time - a;
        const double moved = k.log_increment + 0.5 * (base.continuous_qv(k.time) - base.continuous_qv(a)) -
                             (base.diffusion_value(k.time) - base.diffusion_value(a));
        if (moved != 0.0) b.add_drift(a, k.time, moved / dt);
        if (k.factor != 1.0) b.add_jump(k.time, k.factor - 1.0);
        if (k.factor == 0.0) b.set_absorption(k.time);
    }
    if (base.absorption_time() && !z.absorption_time()) b.set_absorption(base.absorption_time());
    b.set_explosion(base.explosion_time());
    return b.build();
}

CadlagPath stoch_log(const CadlagPath& z) {
    if (z.diffusion_qv_rate() > 0.0 || z.data().diffusion_samples)
        fail(ErrorCode::UnsupportedModel, "stochastic logarithm of a path with a continuous martingale part; use the exponential overload");
    const auto kv = knot_values(z);
    if (!(kv.front().value > 0.0)) fail(ErrorCode::DomainError, "Z_0 must be positive");
    PathBuilder b(z.horizon());
    b.set_initial(std::log(kv.front().value));
    std::optional<double> zero_time;
    constexpr int pieces = 16;
    for (std::size_t i = 1; i < kv.size(); ++i) {
        const auto& a = kv[i - 1];
        const auto& c = kv[i];
        if (c.left < 0.0 || c.value < 0.0) fail(ErrorCode::NotNonnegative, "Z takes a negative value");
        if (zero_time) {
            if (c.left != 0.0 || c.value != 0.0) fail(ErrorCode::RevivesAfterZero, "Z leaves zero after reaching it");
            continue;
        }
        const double z0 = a.value, z1 = c.left;
        const double span = c.time - a.time;
        auto at = [&](double s) { return z0 + (z1 - z0) * (s - a.time) / span; };
        if (z1 == 0.0) {
            // Continuous approach to zero: the logarithm explodes at c.time.
            double s0 = a.time;
            for (int k = 1; k <= 48; ++k) {
                const double s1 = c.time - span * std::ldexp(1.0, -k);
                b.add_drift(s0, s1, std::log(at(s1) / at(s0)) / (s1 - s0));
                s0 = s1;
            }
            b.set_explosion(c.time);
            zero_time = c.time;
            continue;
        }
        if (z1 != z0) {
            for (int k = 0; k < pieces; ++k) {
                const double s0 = a.time + span * k / pieces;
                const double s1 = (k + 1 == pieces) ? c.time : a.time + span * (k + 1) / pieces;
                b.add_drift(s0, s1, std::log(at(s1) / at(s0)) / (s1 - s0));
            }
        }
        if (c.value != c.left) {
            if (c.value == 0.0) {
                b.add_jump(c.time, -1.0);
                b.set_absorption(c.time);
                zero_time = c.time;
            } else {
                b.add_jump(c.time, (c.value - c.left) / c.left);
            }
        }
    }
    return b.build();
}

CadlagPath reciprocal_log(const CadlagPath& m, const CompensatorSpec&) {
    PathBuilder b(m.horizon());
    b.add_scaled_continuous(m, -1.0);
    b.add_scaled_qv(m, 1.0);
    for (const auto& j : m.jumps()) b.add_jump(j.time, phi(j.size));
    b.set_absorption(m.absorption_time());
    b.set_explosion(m.explosion_time());
    return b.build();
}

std::pair<double, double> pushforward_check(const CadlagPath& m, const TestFunction& f, double t) {
    const CadlagPath n = reciprocal_log(m);
    const TestFunction g = compose_with_phi(f);
    double lhs = 0.0, rhs = 0.0;
    for (const auto& j : m.jumps()) {
        if (j.time > t) break;
        lhs += f(j.size);
    }
    for (const auto& j : n.jumps()) {
        if (j.time > t) break;
        rhs += g(j.size);
    }
    return {lhs, rhs};
}

LogTransform log_transform(const CadlagPath& x, const CompensatorSpec& comp) {
    const auto xm = compensator_path(comp, TestFunction::of(FunctionTag::XmLog), x);
    if (xm.divergence_time)
        fail(ErrorCode::CompensatorDiverges, "(x - log(1+x)) * nu diverges at t=" + std::to_string(*xm.divergence_time));
    const auto lg = compensator_path(comp, TestFunction::of(FunctionTag::Log1p), x);

    PathBuilder v(x.horizon());
    v.add_scaled(xm.path, 1.0);
    v.add_scaled_qv(x, 0.5);
    v.set_absorption(x.absorption_time());
    v.set_explosion(x.explosion_time());

    PathBuilder y(x.horizon());
    y.set_initial(x.initial());
    y.set_continuous_part(x.diffusion_qv_rate(), x.diffusion_start(), x.data().diffusion_samples);
    for (const auto& j : x.jumps()) {
        if (!(j.size > -1.0)) fail(ErrorCode::DomainError, "log transform needs jumps above -1");
        y.add_jump(j.time, std::log1p(j.size));
    }
    y.add_scaled(lg.path, -1.0);
    y.set_absorption(x.absorption_time());
    y.set_explosion(x.explosion_time());
    return {y.build(), v.build()};
}

}  // namespace lmconv
