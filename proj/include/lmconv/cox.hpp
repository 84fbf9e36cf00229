#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace lmconv {

/// Intensity and mark families with closed-form antiderivatives.
///
///   decay2-linear             rate (1+s)^-2,          mark s
///   decay2-reciprocal         rate (1+s)^-2,          mark (1+s)^2
///   harmonic-shrink           rate 1/(1+s),           mark -s/(1+s)
///   decay2-reciprocal-tilted  rate (1+s)^-2 + 1,      mark -(1+s)^2/(1+(1+s)^2)
///   exp-const                 rate c*exp(-b s),       mark h
///
/// Tilting by (1 + mark) maps decay2-linear <-> harmonic-shrink,
/// decay2-reciprocal <-> decay2-reciprocal-tilted and exp-const to itself.
enum class CoxFamily { Decay2Linear, Decay2Reciprocal, HarmonicShrink, Decay2ReciprocalTilted, ExpConst };

struct CoxRate {
    CoxFamily family = CoxFamily::Decay2Linear;
    /// exp-const parameters; ignored by the other families.
    double scale = 1.0;
    double decay = 1.0;
    double mark_value = 0.0;
    /// Multiplies the family's mark; -1 gives the negative-jump variant.
    double mark_scale = 1.0;

    static CoxRate named(std::string_view name);
    static CoxRate exp_const(double scale, double decay, double mark);
    std::string name() const;
    void validate() const;

    double intensity(double s) const;
    double mark(double s) const;
    /// Integral of the intensity over [0, t]; t may be infinite.
    double cumulative(double t) const;
    double total() const { return cumulative(std::numeric_limits<double>::infinity()); }
    /// Smallest t with cumulative(t) >= level, or +inf when level >= total().
    double inverse_cumulative(double level) const;
    /// Integral of mark * intensity over [0, t]; t may be infinite.
    double mark_integral(double t) const;

    /// Intensity (1 + mark) * rate with mark phi(mark). Only defined for
    /// mark_scale == 1.
    CoxRate tilted() const;
};

/// Knots shared by every drift built from a Cox rate on a path with the
/// given horizon: 64 pieces uniform in log(1+s) over [0, horizon], cut at
/// min(rho, horizon), which is always the last knot.
std::vector<double> cox_grid(double horizon, double rho);

}  // namespace lmconv
