#pragma once

#include <functional>

namespace lmconv {

/// Result of an integral that may legitimately be infinite.
struct CompensatorValue {
    double value = 0.0;
    bool diverges = false;
};

/// Adaptive Gauss-Kronrod on a finite interval, absolute tolerance 1e-10.
double integrate_finite(const std::function<double(double)>& f, double a, double b);

/// Integral over [a, inf). The half-line is cut into chunks of doubling
/// width; the integral is declared divergent when chunk contributions stop
/// shrinking relative to the running total.
CompensatorValue integrate_to_infinity(const std::function<double(double)>& f, double a);

/// Integral over [a, b] with b possibly infinite.
CompensatorValue integrate_range(const std::function<double(double)>& f, double a, double b);

}  // namespace lmconv
