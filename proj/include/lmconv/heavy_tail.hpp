#pragma once

#include <functional>
#include <vector>

#include "lmconv/numeric.hpp"

namespace lmconv {

/// How an integrand behaves as y -> inf, used to close integrals against
/// the heavy-tailed law beyond the tabulated range.
enum class TailGrowth { Bounded, Linear, Superlinear };

/// Nonnegative law with density c / ((1+y)^2 log(e+y)^2) on [0, inf).
///
/// It has a finite mean while E[(1+Y) log(1+Y)] is infinite. Internally
/// everything is expressed in s = log(1+y), where the density becomes
/// c exp(-s) / log(e-1+e^s)^2 and decays exponentially.
class HeavyTailLaw {
public:
    static const HeavyTailLaw& instance();

    double normaliser() const { return normaliser_; }
    double mean() const { return mean_; }

    double density(double y) const;
    /// P(Y > y).
    double tail(double y) const;
    /// Inverse of the tail: the y with P(Y > y) = u, for u in (0, 1].
    double quantile_upper(double u) const;

    /// E[f(Y)]; `linear_coefficient` is lim f(y)/y, needed to close the
    /// integral when growth is Linear.
    CompensatorValue expectation(const std::function<double(double)>& f, TailGrowth growth,
                                 double linear_coefficient = 1.0) const;
    /// E[f(Y); log(1+Y) <= s_max] without any tail correction.
    double truncated_expectation(const std::function<double(double)>& f, double s_max) const;

    /// Range of s covered by the tail table.
    static constexpr double table_end = 40.0;

private:
    HeavyTailLaw();
    double s_density(double s) const;
    double s_tail(double s) const;

    double normaliser_ = 0.0;
    double mean_ = 0.0;
    double step_ = 0.0;
    std::vector<double> tail_table_;  // P(log(1+Y) > i * step_)
};

}  // namespace lmconv
