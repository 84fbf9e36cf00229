#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lmconv/functionals.hpp"
#include "lmconv/path.hpp"
#include "lmconv/stopping.hpp"

namespace lmconv {

/// |1 + jump| below this counts as a jump of exactly -1.
inline constexpr double kAbsorptionTolerance = 1e-12;
/// log|Z| below this is reported as numeric zero.
inline constexpr double kNumericZeroLog = -745.0;

/// -1 + 1/(1+x); an involution of (-1, inf).
double phi(double x);

/// Knot of an exponential path: log|Z| and the sign just before and at the
/// knot, the multiplicative jump factor Z/Z_- and the log-increment of the
/// continuous part over the preceding interval.
struct ExponentialKnot {
    double time = 0.0;
    double log_left = 0.0;
    int sign_left = 1;
    double log_value = 0.0;
    int sign = 1;
    double factor = 1.0;
    double log_increment = 0.0;
};

/// Z = E(X) carried in log space with the sign tracked separately. Between
/// knots log|Z| moves with X - [X^c,X^c]/2, so it is affine there.
class ExponentialPath final : public TrajectoryView {
public:
    ExponentialPath() = default;
    ExponentialPath(CadlagPath base, std::vector<ExponentialKnot> knots, std::optional<double> absorption_time,
                    std::optional<double> numeric_zero_time);

    const CadlagPath& base() const { return base_; }
    const std::vector<ExponentialKnot>& exp_knots() const { return knots_; }
    const std::optional<double>& absorption_time() const { return absorption_; }
    /// First time |Z| fell below exp(-745) without absorption.
    const std::optional<double>& numeric_zero_time() const { return numeric_zero_; }

    double log_abs_at(double t) const;
    int sign_at(double t) const;
    double value_at(double t) const;
    double left_limit(double t) const;

    double horizon() const override { return base_.domain_end(); }
    std::vector<KnotValue> knots() const override;
    double value_between(double t) const override { return value_at(t); }

private:
    std::size_t knot_index(double t) const;

    CadlagPath base_;
    std::vector<ExponentialKnot> knots_;
    std::optional<double> absorption_;
    std::optional<double> numeric_zero_;
};

struct ExponentialPair {
    CadlagPath base;
    ExponentialPath exponential;
    std::optional<double> absorption_time;
};

struct ExpOptions {
    /// Permit jumps below -1; the exponential then changes sign.
    bool allow_signed = false;
};

ExponentialPair stoch_exp(const CadlagPath& x, ExpOptions options = {});

/// Stochastic logarithm of a nonnegative piecewise-affine path without a
/// continuous martingale part. A continuous approach to zero makes the
/// logarithm explode there.
CadlagPath stoch_log(const CadlagPath& z);
/// Inverse of stoch_exp.
CadlagPath stoch_log(const ExponentialPath& z);

/// N = -M + [M^c,M^c] + x^2/(1+x) * mu^M, with jumps phi(dM). `comp` is
/// accepted for symmetry with the other constructions and is not needed.
CadlagPath reciprocal_log(const CadlagPath& m, const CompensatorSpec& comp = {});

/// (F * mu^M_t, (F o phi) * mu^N_t).
std::pair<double, double> pushforward_check(const CadlagPath& m, const TestFunction& f, double t);

struct LogTransform {
    CadlagPath y;
    CadlagPath v;
};

/// Y = X_0 + X^c + log(1+x) * (mu - nu) and V = [X^c,X^c]/2 + (x - log(1+x)) * nu.
LogTransform log_transform(const CadlagPath& x, const CompensatorSpec& comp);

}  // namespace lmconv
