#include "lmconv/numeric.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

namespace lmconv {

double integrate_finite(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    const double width = b - a;
    // Relative tolerance chosen so that the absolute error stays near 1e-10
    // for integrals of order one.
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, a, b, 15, 1e-12, &err);
    if (err > 1e-10 && width > 0.0) {
        const double mid = a + 0.5 * width;
        return integrate_finite(f, a, mid) + integrate_finite(f, mid, b);
    }
    return value;
}

CompensatorValue integrate_to_infinity(const std::function<double(double)>& f, double a) {
    double total = 0.0;
    double left = a;
    double width = 1.0;
    int quiet = 0;
    constexpr int max_chunks = 120;
    for (int j = 0; j < max_chunks; ++j) {
        const double right = left + width;
        const double chunk = integrate_finite(f, left, right);
        if (!std::isfinite(chunk)) return {std::numeric_limits<double>::infinity(), true};
        total += chunk;
        if (std::abs(chunk) <= 1e-13 * std::max(std::abs(total), 1e-300) || chunk == 0.0) {
            if (++quiet >= 3) return {total, false};
        } else {
            quiet = 0;
        }
        left = right;
        width *= 2.0;
    }
    return {total > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity(), true};
}

CompensatorValue integrate_range(const std::function<double(double)>& f, double a, double b) {
    if (std::isinf(b)) return integrate_to_infinity(f, a);
    return {integrate_finite(f, a, b), false};
}

}  // namespace lmconv
