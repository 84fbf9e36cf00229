#include "lmconv/cox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmconv/error.hpp"

namespace lmconv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1+t) + 1/(1+t) - 1, accurate for small t.
double log_shift(double t) {
    if (std::isinf(t)) return kInf;
    if (t < 1e-4) return t * t * (0.5 - t * (2.0 / 3.0 - t * (0.75 - 0.8 * t)));
    return std::log1p(t) + 1.0 / (1.0 + t) - 1.0;
}

}  // namespace

CoxRate CoxRate::named(std::string_view name) {
    CoxRate r;
    if (name == "decay2-linear") r.family = CoxFamily::Decay2Linear;
    else if (name == "decay2-reciprocal") r.family = CoxFamily::Decay2Reciprocal;
    else if (name == "harmonic-shrink") r.family = CoxFamily::HarmonicShrink;
    else if (name == "decay2-reciprocal-tilted") r.family = CoxFamily::Decay2ReciprocalTilted;
    else if (name == "exp-const") r.family = CoxFamily::ExpConst;
    else fail(ErrorCode::InvalidParameters, "unknown Cox rate family '" + std::string(name) + "'");
    return r;
}

CoxRate CoxRate::exp_const(double scale, double decay, double mark) {
    CoxRate r;
    r.family = CoxFamily::ExpConst;
    r.scale = scale;
    r.decay = decay;
    r.mark_value = mark;
    r.validate();
    return r;
}

std::string CoxRate::name() const {
    switch (family) {
        case CoxFamily::Decay2Linear: return "decay2-linear";
        case CoxFamily::Decay2Reciprocal: return "decay2-reciprocal";
        case CoxFamily::HarmonicShrink: return "harmonic-shrink";
        case CoxFamily::Decay2ReciprocalTilted: return "decay2-reciprocal-tilted";
        case CoxFamily::ExpConst: return "exp-const";
    }
    return "unknown";
}

void CoxRate::validate() const {
    if (family != CoxFamily::ExpConst) return;
    if (!(scale > 0.0) || !(decay > 0.0) || !std::isfinite(scale) || !std::isfinite(decay))
        fail(ErrorCode::InvalidParameters, "exp-const rate needs positive scale and decay");
    if (!(mark_value > -1.0) || !std::isfinite(mark_value))
        fail(ErrorCode::InvalidParameters, "exp-const mark must exceed -1");
    if (!std::isfinite(mark_scale)) fail(ErrorCode::InvalidParameters, "mark scale must be finite");
}

double CoxRate::intensity(double s) const {
    const double u = 1.0 + s;
    switch (family) {
        case CoxFamily::Decay2Linear:
        case CoxFamily::Decay2Reciprocal: return 1.0 / (u * u);
        case CoxFamily::HarmonicShrink: return 1.0 / u;
        case CoxFamily::Decay2ReciprocalTilted: return 1.0 / (u * u) + 1.0;
        case CoxFamily::ExpConst: return scale * std::exp(-decay * s);
    }
    return 0.0;
}

double CoxRate::mark(double s) const {
    const double u = 1.0 + s;
    double g = 0.0;
    switch (family) {
        case CoxFamily::Decay2Linear: g = s; break;
        case CoxFamily::Decay2Reciprocal: g = u * u; break;
        case CoxFamily::HarmonicShrink: g = -s / u; break;
        case CoxFamily::Decay2ReciprocalTilted: g = -(u * u) / (1.0 + u * u); break;
        case CoxFamily::ExpConst: g = mark_value; break;
    }
    return mark_scale * g;
}

double CoxRate::cumulative(double t) const {
    if (t <= 0.0) return 0.0;
    const bool inf = std::isinf(t);
    switch (family) {
        case CoxFamily::Decay2Linear:
        case CoxFamily::Decay2Reciprocal: return inf ? 1.0 : t / (1.0 + t);
        case CoxFamily::HarmonicShrink: return inf ? kInf : std::log1p(t);
        case CoxFamily::Decay2ReciprocalTilted: return inf ? kInf : t + t / (1.0 + t);
        case CoxFamily::ExpConst: return inf ? scale / decay : -scale * std::expm1(-decay * t) / decay;
    }
    return 0.0;
}

double CoxRate::inverse_cumulative(double level) const {
    if (level <= 0.0) return 0.0;
    if (level >= total()) return kInf;
    switch (family) {
        case CoxFamily::Decay2Linear:
        case CoxFamily::Decay2Reciprocal: return level / (1.0 - level);
        case CoxFamily::HarmonicShrink: return std::expm1(level);
        case CoxFamily::Decay2ReciprocalTilted: {
            // Positive root of t^2 + (2 - level) t - level = 0, in the form
            // that avoids cancellation for small levels.
            const double b = 2.0 - level;
            return 2.0 * level / (b + std::sqrt(b * b + 4.0 * level));
        }
        case CoxFamily::ExpConst: return -std::log1p(-decay * level / scale) / decay;
    }
    return kInf;
}

double CoxRate::mark_integral(double t) const {
    if (t <= 0.0) return 0.0;
    double v = 0.0;
    switch (family) {
        case CoxFamily::Decay2Linear: v = log_shift(t); break;
        case CoxFamily::Decay2Reciprocal: v = std::isinf(t) ? kInf : t; break;
        case CoxFamily::HarmonicShrink: v = -log_shift(t); break;
        case CoxFamily::Decay2ReciprocalTilted: v = -t; break;
        case CoxFamily::ExpConst: v = mark_value * cumulative(t); break;
    }
    return mark_scale * v;
}

CoxRate CoxRate::tilted() const {
    if (mark_scale != 1.0) fail(ErrorCode::UnsupportedModel, "tilting needs the unscaled mark");
    CoxRate r = *this;
    switch (family) {
        case CoxFamily::Decay2Linear: r.family = CoxFamily::HarmonicShrink; break;
        case CoxFamily::HarmonicShrink: r.family = CoxFamily::Decay2Linear; break;
        case CoxFamily::Decay2Reciprocal: r.family = CoxFamily::Decay2ReciprocalTilted; break;
        case CoxFamily::Decay2ReciprocalTilted: r.family = CoxFamily::Decay2Reciprocal; break;
        case CoxFamily::ExpConst:
            r.scale = scale * (1.0 + mark_value);
            r.mark_value = -mark_value / (1.0 + mark_value);
            break;
    }
    return r;
}

std::vector<double> cox_grid(double horizon, double rho) {
    constexpr int pieces = 64;
    const double end = std::min(horizon, rho);
    std::vector<double> g;
    g.reserve(pieces + 2);
    const double span = std::log1p(horizon);
    for (int k = 0; k < pieces; ++k) {
        const double t = std::expm1(span * k / pieces);
        if (t < end) g.push_back(t);
    }
    g.push_back(end);
    return g;
}

}  // namespace lmconv
