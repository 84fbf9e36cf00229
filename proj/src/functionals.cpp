#include "lmconv/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lmconv/error.hpp"

namespace lmconv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1+x), preferring the separately supplied 1+x away from zero.
double log_gap(double x, double one_plus) { return std::abs(x) < 0.5 ? std::log1p(x) : std::log(one_plus); }

double xm_log(double x, double one_plus) {
    if (std::abs(x) < 1e-4) return x * x * (0.5 - x * (1.0 / 3.0 - x * (0.25 - 0.2 * x)));
    return x - log_gap(x, one_plus);
}

double entropy(double x, double one_plus) {
    if (std::abs(x) < 1e-4) return x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 12.0 - x / 20.0)));
    return one_plus * log_gap(x, one_plus) - x;
}

double expm(double x) {
    if (std::abs(x) < 1e-4) return x * x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)));
    return std::expm1(x) - x;
}

double phi(double x) { return -x / (1.0 + x); }

}  // namespace

double TestFunction::eval(double x, double one_plus) const {
    if (through_phi) {
        if (!(one_plus > 0.0)) fail(ErrorCode::DomainError, "phi needs x > -1");
        x = -x / one_plus;
        one_plus = 1.0 / one_plus;
    }
    if (log_family() && !(one_plus > 0.0))
        fail(ErrorCode::DomainError, name() + " needs jump sizes above -1");
    switch (tag) {
        case FunctionTag::Identity: return x;
        case FunctionTag::Square: return x * x;
        case FunctionTag::TruncatedSquare: return std::abs(x) <= kappa ? x * x : 0.0;
        case FunctionTag::TruncatedAbs: return std::min(x * x, std::abs(x));
        case FunctionTag::PosTail: return x > kappa ? x : 0.0;
        case FunctionTag::Log1p: return log_gap(x, one_plus);
        case FunctionTag::XmLog: return xm_log(x, one_plus);
        case FunctionTag::Entropy: return entropy(x, one_plus);
        case FunctionTag::Expm: return expm(x);
        case FunctionTag::One: return 1.0;
        case FunctionTag::Custom: {
            if (table.empty()) return 0.0;
            if (x <= table.front().first) return table.front().second;
            if (x >= table.back().first) return table.back().second;
            const auto it = std::upper_bound(table.begin(), table.end(), x,
                                             [](double v, const std::pair<double, double>& p) { return v < p.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            return lo.second + (hi.second - lo.second) * (x - lo.first) / (hi.first - lo.first);
        }
    }
    return 0.0;
}

bool TestFunction::log_family() const {
    return tag == FunctionTag::Log1p || tag == FunctionTag::XmLog || tag == FunctionTag::Entropy;
}

std::string TestFunction::name() const {
    std::string base;
    switch (tag) {
        case FunctionTag::Identity: base = "identity"; break;
        case FunctionTag::Square: base = "square"; break;
        case FunctionTag::TruncatedSquare: base = "truncated_square"; break;
        case FunctionTag::TruncatedAbs: base = "truncated_abs"; break;
        case FunctionTag::PosTail: base = "pos_tail"; break;
        case FunctionTag::Log1p: base = "log1p"; break;
        case FunctionTag::XmLog: base = "xm_log"; break;
        case FunctionTag::Entropy: base = "entropy"; break;
        case FunctionTag::Expm: base = "expm"; break;
        case FunctionTag::One: base = "one"; break;
        case FunctionTag::Custom: base = "custom"; break;
    }
    if (tag == FunctionTag::TruncatedSquare || tag == FunctionTag::PosTail) {
        std::ostringstream os;
        os.precision(17);
        os << base << "[kappa=" << kappa << "]";
        base = os.str();
    }
    return through_phi ? base + "@phi" : base;
}

TailGrowth TestFunction::growth() const {
    if (through_phi) return TailGrowth::Bounded;
    switch (tag) {
        case FunctionTag::Identity:
        case FunctionTag::TruncatedAbs:
        case FunctionTag::PosTail:
        case FunctionTag::XmLog: return TailGrowth::Linear;
        case FunctionTag::Square:
        case FunctionTag::Entropy:
        case FunctionTag::Expm: return TailGrowth::Superlinear;
        default: return TailGrowth::Bounded;
    }
}

TestFunction TestFunction::of(FunctionTag tag, double kappa) {
    if (!(kappa > 0.0)) fail(ErrorCode::InvalidParameters, "kappa must be positive");
    TestFunction f;
    f.tag = tag;
    f.kappa = kappa;
    return f;
}

TestFunction TestFunction::parse(const std::string& name, double kappa) {
    static const std::map<std::string, FunctionTag> names = {
        {"identity", FunctionTag::Identity}, {"square", FunctionTag::Square},
        {"truncated_square", FunctionTag::TruncatedSquare}, {"truncated_abs", FunctionTag::TruncatedAbs},
        {"pos_tail", FunctionTag::PosTail}, {"log1p", FunctionTag::Log1p},
        {"xm_log", FunctionTag::XmLog}, {"entropy", FunctionTag::Entropy},
        {"expm", FunctionTag::Expm}, {"one", FunctionTag::One},
    };
    const auto it = names.find(name);
    if (it == names.end()) fail(ErrorCode::ConfigError, "unknown test function '" + name + "'");
    return of(it->second, kappa);
}

TestFunction compose_with_phi(TestFunction f) {
    f.through_phi = !f.through_phi;
    return f;
}

double AtomPoint::contribution(const TestFunction& f) const {
    if (mass == 0.0) return 0.0;
    if (scale == 0) return mass * f.eval(size, gap());
    const double x = true_size();
    const double m = true_mass();
    if (std::abs(x) <= 1e250 && m >= 1e-250) return m * f(x);
    // |x| is astronomically large and m correspondingly small.
    const double sm = size * mass;
    if (f.through_phi) {
        if (size < 0.0) fail(ErrorCode::DomainError, "phi needs x > -1");
        return 0.0;
    }
    switch (f.tag) {
        case FunctionTag::Identity: return sm;
        case FunctionTag::TruncatedAbs: return std::abs(sm);
        case FunctionTag::PosTail: return size > 0.0 ? sm : 0.0;
        case FunctionTag::XmLog:
            if (size < 0.0) fail(ErrorCode::DomainError, f.name() + " needs jump sizes above -1");
            return sm;
        case FunctionTag::Log1p:
        case FunctionTag::Entropy:
            if (size < 0.0) fail(ErrorCode::DomainError, f.name() + " needs jump sizes above -1");
            return f.tag == FunctionTag::Log1p ? 0.0 : kInf;
        case FunctionTag::Square: return kInf;
        case FunctionTag::Expm: return size > 0.0 ? kInf : -sm;
        default: return 0.0;
    }
}

double Atom::total_mass() const {
    double m = heavy_mass;
    for (const auto& p : points) m += p.true_mass();
    return m;
}

CompensatorValue Atom::integrate(const TestFunction& f) const {
    double v = 0.0;
    for (const auto& p : points) v += p.contribution(f);
    if (std::isinf(v)) return {kInf, true};
    if (heavy_mass > 0.0) {
        const auto& law = HeavyTailLaw::instance();
        const auto e = law.expectation([&](double y) { return f(y); }, f.growth());
        if (e.diverges) return {kInf, true};
        v += heavy_mass * e.value;
    }
    return {v, false};
}

const Atom* CompensatorSpec::atom_at(double t) const {
    const auto it = std::lower_bound(atoms.begin(), atoms.end(), t, [](const Atom& a, double v) { return a.time < v; });
    if (it != atoms.end() && it->time == t) return &*it;
    return nullptr;
}

double CompensatorSpec::cox_jump_time(const CadlagPath& path) const {
    if (!cox) return kInf;
    for (const auto& j : path.jumps())
        if (atom_at(j.time) == nullptr) return j.time;
    return kInf;
}

CompensatorValue cox_integral(const CoxRate& rate, const TestFunction& f, double a, double b) {
    if (!(b > a)) return {0.0, false};
    if (!f.through_phi && f.tag == FunctionTag::One) {
        const double v = rate.cumulative(b) - rate.cumulative(a);
        return {v, std::isinf(v)};
    }
    if (!f.through_phi && f.tag == FunctionTag::Identity) {
        const double v = rate.mark_integral(b) - rate.mark_integral(a);
        return {v, std::isinf(v)};
    }
    return integrate_range([&](double s) { return f(rate.mark(s)) * rate.intensity(s); }, a, b);
}

CadlagPath quadratic_variation(const CadlagPath& path) {
    PathBuilder b(path.horizon());
    for (const auto& j : path.jumps()) b.add_jump(j.time, j.size * j.size);
    b.add_scaled_qv(path, 1.0);
    b.set_absorption(path.absorption_time());
    b.set_explosion(path.explosion_time());
    return b.build();
}

CadlagPath jump_integral(const CadlagPath& path, const TestFunction& f) {
    PathBuilder b(path.horizon());
    for (const auto& j : path.jumps()) b.add_jump(j.time, f(j.size));
    b.set_absorption(path.absorption_time());
    b.set_explosion(path.explosion_time());
    return b.build();
}

namespace {

// End of the stretch on which the compensator accumulates.
double active_end(const CadlagPath& path) {
    double end = path.domain_end();
    if (path.absorption_time()) end = std::min(end, *path.absorption_time());
    return end;
}

// Integrals of F against the Cox part over the full-horizon grid pieces.
// Only the last piece depends on rho, so the rest is shared across paths.
const std::vector<double>& cox_piece_integrals(const CoxRate& rate, const TestFunction& f, double horizon) {
    thread_local std::map<std::string, std::vector<double>> cache;
    std::ostringstream key;
    key.precision(17);
    key << rate.name() << ':' << rate.scale << ':' << rate.decay << ':' << rate.mark_value << ':' << rate.mark_scale << ':' << f.name() << ':'
        << horizon;
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
    const auto grid = cox_grid(horizon, kInf);
    std::vector<double> pieces;
    pieces.reserve(grid.size());
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) pieces.push_back(cox_integral(rate, f, grid[k], grid[k + 1]).value);
    return cache.emplace(key.str(), std::move(pieces)).first->second;
}

}  // namespace

CompensatorValue compensator_value(const CompensatorSpec& comp, const TestFunction& f, double t,
                                   const CadlagPath& path) {
    // Analytic queries may look past the simulated horizon; only absorption
    // and explosion stop the compensator.
    double end = path.absorption_time() ? *path.absorption_time() : kInf;
    if (path.explodes_within_horizon()) end = std::min(end, *path.explosion_time());
    double v = 0.0;
    for (const auto& a : comp.atoms) {
        if (a.time > t || a.time > end) break;
        const auto c = a.integrate(f);
        if (c.diverges) return {kInf, true};
        v += c.value;
    }
    if (comp.cox) {
        const double stop = std::min({t, comp.cox_jump_time(path), end});
        const auto c = cox_integral(*comp.cox, f, 0.0, stop);
        if (c.diverges) return c;
        v += c.value;
    }
    return {v, false};
}

double compensator_integral(const CompensatorSpec& comp, const TestFunction& f, double t, const CadlagPath& path) {
    const auto v = compensator_value(comp, f, t, path);
    if (v.diverges) {
        std::ostringstream os;
        os << f.name() << " * nu diverges by time " << t;
        fail(ErrorCode::IntegrabilityError, os.str());
    }
    return v.value;
}

CompensatorPath compensator_path(const CompensatorSpec& comp, const TestFunction& f, const CadlagPath& path) {
    const double end = active_end(path);
    const bool open_end = path.explodes_within_horizon() && !(path.absorption_time() && *path.absorption_time() < end);
    PathBuilder b(path.horizon());
    CompensatorPath out;
    for (const auto& a : comp.atoms) {
        if (a.time > end || (open_end && a.time >= end)) break;
        const auto c = a.integrate(f);
        if (c.diverges) {
            out.divergence_time = a.time;
            break;
        }
        b.add_jump(a.time, c.value);
    }
    if (comp.cox) {
        const double rho = comp.cox_jump_time(path);
        double stop = std::min(rho, end);
        if (out.divergence_time) stop = std::min(stop, *out.divergence_time);
        const auto grid = cox_grid(path.horizon(), stop);
        const bool closed = !f.through_phi && (f.tag == FunctionTag::One || f.tag == FunctionTag::Identity);
        const std::vector<double>* pieces = closed ? nullptr : &cox_piece_integrals(*comp.cox, f, path.horizon());
        const auto full = cox_grid(path.horizon(), kInf);
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            const double a = grid[k], c = grid[k + 1];
            double integral;
            if (pieces != nullptr && k < pieces->size() && full[k + 1] == c) integral = (*pieces)[k];
            else integral = cox_integral(*comp.cox, f, a, c).value;
            b.add_drift(a, c, integral / (c - a));
        }
    }
    if (path.absorption_time()) b.set_absorption(path.absorption_time());
    std::optional<double> stop = path.explosion_time();
    if (out.divergence_time) stop = stop ? std::min(*stop, *out.divergence_time) : *out.divergence_time;
    b.set_explosion(stop);
    out.path = b.build();
    return out;
}

double gamma_process(const CompensatorSpec& comp, double t) {
    const Atom* a = comp.atom_at(t);
    if (a == nullptr) return 0.0;
    const auto v = a->integrate(TestFunction::of(FunctionTag::Log1p));
    return -v.value;
}

double convergence_functional_c(const CadlagPath& path, const CompensatorSpec& comp, const CadlagPath& a_path,
                                double t) {
    const double qv = path.continuous_qv(t);
    const double nu = compensator_integral(comp, TestFunction::of(FunctionTag::TruncatedAbs), t, path);
    return qv + nu + value_at(a_path, t);
}

}  // namespace lmconv
