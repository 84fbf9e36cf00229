#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lmconv/cox.hpp"
#include "lmconv/heavy_tail.hpp"
#include "lmconv/numeric.hpp"
#include "lmconv/path.hpp"

namespace lmconv {

enum class FunctionTag {
    Identity,         // x
    Square,           // x^2
    TruncatedSquare,  // x^2 1{|x| <= kappa}
    TruncatedAbs,     // x^2 ^ |x|
    PosTail,          // x 1{x > kappa}
    Log1p,            // log(1+x)
    XmLog,            // x - log(1+x)
    Entropy,          // (1+x) log(1+x) - x
    Expm,             // e^x - 1 - x
    One,              // 1
    Custom,           // piecewise-linear table, constant outside
};

/// Deterministic integrand applied to jump sizes.
struct TestFunction {
    FunctionTag tag = FunctionTag::Identity;
    double kappa = 1.0;
    std::vector<std::pair<double, double>> table;
    /// Evaluate F(phi(x)) instead of F(x).
    bool through_phi = false;

    double operator()(double x) const { return eval(x, 1.0 + x); }
    /// F(x) given 1 + x separately, so jumps just above -1 keep their
    /// relative precision in the log family.
    double eval(double x, double one_plus) const;
    /// Needs 1 + x > 0.
    bool log_family() const;
    std::string name() const;
    TailGrowth growth() const;

    static TestFunction of(FunctionTag tag, double kappa = 1.0);
    /// CLI names: identity, square, truncated_square, truncated_abs,
    /// pos_tail, log1p, xm_log, entropy, expm, one.
    static TestFunction parse(const std::string& name, double kappa = 1.0);
};

TestFunction compose_with_phi(TestFunction f);

/// Mass point of a predictable jump law; masses may sum to less than one.
/// The point sits at size * 2^scale with mass mass * 2^-scale, so rare huge
/// jumps keep a finite size-times-mass even when neither factor is a double.
struct AtomPoint {
    double size = 0.0;
    double mass = 0.0;
    int scale = 0;
    /// 1 + size when it is known more precisely than the sum; 0 means unset.
    double one_plus = 0.0;

    double gap() const { return one_plus > 0.0 ? one_plus : 1.0 + size; }
    double true_size() const { return std::ldexp(size, scale); }
    double true_mass() const { return std::ldexp(mass, -scale); }
    /// mass * F(size), using F's linear asymptote once the scaled factors
    /// leave the double range.
    double contribution(const TestFunction& f) const;
};

/// Law nu({time}, .) of the jump at a scheduled time. `heavy_mass` adds the
/// heavy-tailed law of HeavyTailLaw with that total mass.
struct Atom {
    double time = 0.0;
    std::vector<AtomPoint> points;
    double heavy_mass = 0.0;

    double total_mass() const;
    /// Integral of F against this atom's law; diverges when F outgrows the
    /// heavy-tailed component.
    CompensatorValue integrate(const TestFunction& f) const;
};

/// Analytic compensator: scheduled atoms plus an optional single Cox jump
/// whose compensator runs until the path's jump time rho.
struct CompensatorSpec {
    std::vector<Atom> atoms;
    std::optional<CoxRate> cox;

    const Atom* atom_at(double t) const;
    /// First jump of the path that is not at an atom time, or +inf.
    double cox_jump_time(const CadlagPath& path) const;
};

/// Integral of F(mark(s)) intensity(s) over [a, b]; b may be infinite.
/// Uses closed forms for F in {1, x} and quadrature otherwise.
CompensatorValue cox_integral(const CoxRate& rate, const TestFunction& f, double a, double b);

CadlagPath quadratic_variation(const CadlagPath& path);

CadlagPath jump_integral(const CadlagPath& path, const TestFunction& f);

/// F * nu at time t, or a tagged infinity.
CompensatorValue compensator_value(const CompensatorSpec& comp, const TestFunction& f, double t,
                                   const CadlagPath& path);

/// As compensator_value, but divergence is an IntegrabilityError.
double compensator_integral(const CompensatorSpec& comp, const TestFunction& f, double t, const CadlagPath& path);

/// The whole process t -> F * nu_t on the path's domain. Atom contributions
/// appear as jumps, the Cox part as drift on the shared Cox grid. When an
/// atom integral diverges the path stops just before it and the divergence
/// time is reported.
struct CompensatorPath {
    CadlagPath path;
    std::optional<double> divergence_time;
};
CompensatorPath compensator_path(const CompensatorSpec& comp, const TestFunction& f, const CadlagPath& path);

/// gamma_t = -integral of log(1+x) against nu({t}, .).
double gamma_process(const CompensatorSpec& comp, double t);

/// [X^c,X^c]_t + (x^2 ^ |x|) * nu_t + A_t.
double convergence_functional_c(const CadlagPath& path, const CompensatorSpec& comp, const CadlagPath& a_path,
                                double t);

}  // namespace lmconv
