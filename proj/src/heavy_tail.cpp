#include "lmconv/heavy_tail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmconv/error.hpp"

namespace lmconv {
namespace {

constexpr double kE = 2.718281828459045235;

// log(e - 1 + e^s) without overflow for large s.
double log_shift(double s) { return s + std::log1p((kE - 1.0) * std::exp(-s)); }

double unnormalised(double s) {
    const double l = log_shift(s);
    return std::exp(-s) / (l * l);
}

}  // namespace

const HeavyTailLaw& HeavyTailLaw::instance() {
    static const HeavyTailLaw law;
    return law;
}

HeavyTailLaw::HeavyTailLaw() {
    // Beyond s = 100 the unnormalised density is below e^-100 / 10^4.
    normaliser_ = 1.0 / integrate_finite(unnormalised, 0.0, 100.0);
    const double c = normaliser_;
    auto mean_integrand = [](double s) {
        const double l = log_shift(s);
        return -std::expm1(-s) / (l * l);
    };
    // Past table_end, log_shift(s) = s to double precision and exp(-s) is
    // negligible, so the remaining integral is 1 / table_end.
    mean_ = c * (integrate_finite(mean_integrand, 0.0, table_end) + 1.0 / table_end);

    step_ = 0.05;
    const auto n = static_cast<std::size_t>(std::lround(table_end / step_));
    tail_table_.assign(n + 1, 0.0);
    tail_table_[n] = c * integrate_finite(unnormalised, table_end, table_end + 80.0);
    for (std::size_t i = n; i-- > 0;) {
        const double a = static_cast<double>(i) * step_;
        tail_table_[i] = tail_table_[i + 1] + c * integrate_finite(unnormalised, a, a + step_);
    }
    tail_table_[0] = 1.0;
}

double HeavyTailLaw::s_density(double s) const { return normaliser_ * unnormalised(s); }

double HeavyTailLaw::s_tail(double s) const {
    if (s <= 0.0) return 1.0;
    const double pos = s / step_;
    const auto i = static_cast<std::size_t>(std::min(std::floor(pos), static_cast<double>(tail_table_.size() - 1)));
    const double a = static_cast<double>(i) * step_;
    return tail_table_[i] - normaliser_ * integrate_finite(unnormalised, a, s);
}

double HeavyTailLaw::density(double y) const {
    if (y < 0.0) return 0.0;
    const double l = std::log(kE + y);
    return normaliser_ / ((1.0 + y) * (1.0 + y) * l * l);
}

double HeavyTailLaw::tail(double y) const {
    if (y <= 0.0) return 1.0;
    return s_tail(std::log1p(y));
}

double HeavyTailLaw::quantile_upper(double u) const {
    if (!(u > 0.0) || u > 1.0) fail(ErrorCode::DomainError, "heavy-tail quantile needs u in (0, 1]");
    if (u >= 1.0) return 0.0;
    // The table is decreasing; find the bracket and interpolate log-tail.
    const auto it = std::lower_bound(tail_table_.begin(), tail_table_.end(), u, std::greater<double>());
    double s;
    if (it == tail_table_.end()) {
        s = table_end;
    } else {
        const auto i = static_cast<std::size_t>(it - tail_table_.begin());
        if (i == 0) return 0.0;
        const double t0 = tail_table_[i - 1], t1 = tail_table_[i];
        const double frac = (std::log(t0) - std::log(u)) / (std::log(t0) - std::log(t1));
        s = (static_cast<double>(i - 1) + frac) * step_;
    }
    // Newton on log(tail(s)) - log(u).
    for (int k = 0; k < 4; ++k) {
        const double t = s_tail(s);
        const double g = std::log(t) - std::log(u);
        const double slope = -s_density(s) / t;
        const double next = s - g / slope;
        if (!std::isfinite(next)) break;
        s = std::max(0.0, next);
        if (std::abs(g) < 1e-14) break;
    }
    return std::expm1(s);
}

CompensatorValue HeavyTailLaw::expectation(const std::function<double(double)>& f, TailGrowth growth,
                                           double linear_coefficient) const {
    if (growth == TailGrowth::Superlinear) return {std::numeric_limits<double>::infinity(), true};
    double v = truncated_expectation(f, table_end);
    if (growth == TailGrowth::Linear) v += normaliser_ * linear_coefficient / table_end;
    return {v, false};
}

double HeavyTailLaw::truncated_expectation(const std::function<double(double)>& f, double s_max) const {
    auto integrand = [&](double s) { return s_density(s) * f(std::expm1(s)); };
    double total = 0.0;
    // Unit pieces keep the quadrature resolving the exp(-s) decay.
    for (double a = 0.0; a < s_max; a += 1.0) total += integrate_finite(integrand, a, std::min(s_max, a + 1.0));
    return total;
}

}  // namespace lmconv
