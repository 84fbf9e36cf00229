#include "lmconv/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "lmconv/error.hpp"
#include "lmconv/heavy_tail.hpp"

namespace lmconv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;

int steps_in(double horizon) { return static_cast<int>(std::floor(horizon + 1e-9)); }

// Signs s_n of the oscillating harmonic sequence: climb to +j, then fall to
// -j, then raise the level. Partial sums therefore reach every level.
double harmonic_oscillating(int n) {
    static std::mutex mutex;
    static std::vector<double> signs{0.0};
    static double sum = 0.0;
    static double level = 1.0;
    static double direction = 1.0;
    std::lock_guard<std::mutex> lock(mutex);
    while (static_cast<int>(signs.size()) <= n) {
        const int m = static_cast<int>(signs.size());
        signs.push_back(direction);
        sum += direction / m;
        if (direction > 0.0 && sum >= level) {
            direction = -1.0;
        } else if (direction < 0.0 && sum <= -level) {
            direction = 1.0;
            level += 1.0;
        }
    }
    return signs[static_cast<std::size_t>(n)] / n;
}

double alternating(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

void require(bool ok, const std::string& message) {
    if (!ok) fail(ErrorCode::InvalidParameters, message);
}

double law_mean(const StepLaw& law) {
    double m = 0.0;
    for (const auto& p : law.points) m += p.contribution(TestFunction::of(FunctionTag::Identity));
    if (law.heavy_mass > 0.0) m += law.heavy_mass * HeavyTailLaw::instance().mean();
    return m;
}

double law_mass(const StepLaw& law) {
    double m = law.heavy_mass;
    for (const auto& p : law.points) m += p.true_mass();
    return m;
}

// The two-point law of a ui-sequence step.
StepLaw two_point_law(int n) {
    const int k = ui_sequence_exponent(n);
    const double p = std::ldexp(1.0, -k);
    StepLaw law;
    AtomPoint up{1.0, 0.5 * (1.0 - p)};
    AtomPoint down{-(1.0 - p) / (1.0 + p), 0.5 * (1.0 + p)};
    down.one_plus = 2.0 * p / (1.0 + p);
    law.points = {up, down};
    return law;
}

StepLaw step_law(const StepsParams& steps, int n) {
    if (steps.family == "two-point") return two_point_law(n);
    if (n <= static_cast<int>(steps.laws.size())) return steps.laws[static_cast<std::size_t>(n - 1)];
    return StepLaw{{AtomPoint{0.0, 1.0}}, 0.0};
}

double sample_law(const StepLaw& law, Substream& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (const auto& p : law.points) {
        cumulative += p.true_mass();
        if (u < cumulative) return p.true_size();
    }
    if (law.heavy_mass > 0.0) return HeavyTailLaw::instance().quantile_upper(rng.uniform());
    return law.points.empty() ? 0.0 : law.points.back().true_size();
}

double series_size(const SeriesParams& series, int n) {
    if (series.sizes == "zero") return 0.0;
    return alternating(n) / n;
}

void sample_into(const ModelSpec& model, Substream& rng, const SampleOverrides& overrides, PathBuilder& b,
                 SampleInfo& info) {
    const double h = model.horizon;
    switch (model.kind) {
        case ModelKind::RandomWalkLargeJumps: {
            for (int n = 1; n <= steps_in(h); ++n) {
                const int k = walk_exponent(model.walk, n);
                const bool rare = rng.dyadic(k) && !overrides.no_rare_events;
                const double x = walk_size(model.walk, n);
                if (rare) info.rare_indices.push_back(n);
                const double size = rare ? x - std::ldexp(x, k) : x;
                if (!std::isfinite(size)) fail(ErrorCode::InvalidParameters, "rare jump overflows at n=" + std::to_string(n));
                b.add_jump(static_cast<double>(n), size);
            }
            break;
        }
        case ModelKind::CoxOneJump: {
            const CoxRate& rate = model.cox.rate;
            const double draw = overrides.cox_draw ? *overrides.cox_draw : rng.exponential();
            const double rho = rate.inverse_cumulative(draw);
            info.rho = rho;
            if (rho <= h) b.add_jump(rho, rate.mark(rho));
            if (model.cox.compensated) {
                const auto grid = cox_grid(h, rho);
                for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
                    const double a = grid[k], c = grid[k + 1];
                    b.add_drift(a, c, -(rate.mark_integral(c) - rate.mark_integral(a)) / (c - a));
                }
            }
            break;
        }
        case ModelKind::DiscreteDensitySteps: {
            for (int n = 1; n <= steps_in(h); ++n) {
                const double size = sample_law(step_law(model.steps, n), rng);
                b.add_jump(static_cast<double>(n), size);
            }
            break;
        }
        case ModelKind::GridDiffusion: {
            const auto& d = model.diffusion;
            const double span = h - d.start;
            if (!(span > 0.0)) break;
            const auto m = std::max<long>(1, std::lround(span / d.step));
            DiffusionGrid grid;
            grid.start = d.start;
            grid.step = span / static_cast<double>(m);
            grid.increments.resize(static_cast<std::size_t>(m));
            const double sd = std::sqrt(d.qv_rate * grid.step);
            for (auto& inc : grid.increments) inc = sd * rng.normal();
            b.set_continuous_part(d.qv_rate, d.start, std::move(grid));
            if (d.drift != 0.0) b.add_drift(d.start, h, d.drift);
            break;
        }
        case ModelKind::Composite: {
            for (auto component : model.components) {
                component.horizon = h;
                PathBuilder part(h);
                sample_into(component, rng, overrides, part, info);
                b.add_scaled(part.build(), 1.0);
            }
            break;
        }
        case ModelKind::DeterministicSeries: {
            for (int n = 1; n <= steps_in(h); ++n) b.add_jump(static_cast<double>(n), series_size(model.series, n));
            break;
        }
    }
}

void collect_atoms(const ModelSpec& model, CompensatorSpec& comp) {
    const int steps = steps_in(model.horizon);
    switch (model.kind) {
        case ModelKind::RandomWalkLargeJumps: {
            for (int n = 1; n <= steps; ++n) {
                const int k = walk_exponent(model.walk, n);
                const double x = walk_size(model.walk, n);
                Atom a;
                a.time = n;
                const double p = std::ldexp(1.0, -k);
                AtomPoint common{x, 1.0 - p};
                common.one_plus = 1.0 + x;
                AtomPoint rare;
                if (k <= 900) {
                    rare = AtomPoint{x - std::ldexp(x, k), p};
                } else {
                    // Store x (2^-k - 1) scaled by 2^k so that size * mass stays exact.
                    rare = AtomPoint{std::ldexp(x, -k) - x, 1.0, k};
                }
                a.points = {common, rare};
                comp.atoms.push_back(std::move(a));
            }
            break;
        }
        case ModelKind::DiscreteDensitySteps: {
            for (int n = 1; n <= steps; ++n) {
                const StepLaw law = step_law(model.steps, n);
                comp.atoms.push_back(Atom{static_cast<double>(n), law.points, law.heavy_mass});
            }
            break;
        }
        case ModelKind::DeterministicSeries: {
            for (int n = 1; n <= steps; ++n) {
                const double x = series_size(model.series, n);
                if (x != 0.0) comp.atoms.push_back(Atom{static_cast<double>(n), {AtomPoint{x, 1.0}}, 0.0});
            }
            break;
        }
        case ModelKind::CoxOneJump:
            if (comp.cox) fail(ErrorCode::UnsupportedModel, "at most one Cox component per model");
            comp.cox = model.cox.rate;
            break;
        case ModelKind::GridDiffusion: break;
        case ModelKind::Composite:
            for (auto component : model.components) {
                component.horizon = model.horizon;
                collect_atoms(component, comp);
            }
            break;
    }
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::RandomWalkLargeJumps: return "RandomWalkLargeJumps";
        case ModelKind::CoxOneJump: return "CoxOneJump";
        case ModelKind::DiscreteDensitySteps: return "DiscreteDensitySteps";
        case ModelKind::GridDiffusion: return "GridDiffusion";
        case ModelKind::Composite: return "Composite";
        case ModelKind::DeterministicSeries: return "DeterministicSeries";
    }
    return "";
}

ModelKind parse_model_kind(const std::string& name) {
    for (auto k : {ModelKind::RandomWalkLargeJumps, ModelKind::CoxOneJump, ModelKind::DiscreteDensitySteps,
                   ModelKind::GridDiffusion, ModelKind::Composite, ModelKind::DeterministicSeries})
        if (model_kind_name(k) == name) return k;
    fail(ErrorCode::ConfigError, "unknown model kind '" + name + "'");
}

double walk_size(const RandomWalkParams& walk, int n) {
    if (n < 1) fail(ErrorCode::InvalidParameters, "sequence index starts at 1");
    if (walk.zero_first && n == 1) return 0.0;
    const double s = walk.size_scale;
    const auto& f = walk.sizes;
    if (f == "alt-sqrt") return s * alternating(n) / std::sqrt(static_cast<double>(n));
    if (f == "ones") return s;
    if (f == "harmonic-osc") return s * harmonic_oscillating(n);
    if (f == "exp-alt-sqrt") return s * std::expm1(alternating(n) / std::sqrt(static_cast<double>(n)));
    if (f == "neg-harmonic") return -s / n;
    if (f == "alt-harmonic") return s * alternating(n) / n;
    if (f == "constant") return s;
    if (f == "geometric") return std::ldexp(s, -n);
    if (f == "explicit") {
        if (n > static_cast<int>(walk.explicit_sizes.size()))
            fail(ErrorCode::InvalidParameters, "explicit sizes end before n=" + std::to_string(n));
        return walk.explicit_sizes[static_cast<std::size_t>(n - 1)];
    }
    fail(ErrorCode::InvalidParameters, "unknown size family '" + f + "'");
}

namespace {

int search_ui_exponent(int n) {
    const double dn = n;
    const double first_bound = -3.0 * std::log(dn);
    const double second_bound = -dn * kLn2 + dn * std::log(std::expm1(1.0 / (dn * dn)));
    // Both conditions are monotone in k, so the first admissible k is the
    // largest admissible p.
    for (int k = 1; k < 10000000; ++k) {
        const double log_p = -k * kLn2;
        // log(p log(1 + 1/p)) with log(1 + 2^k) = k ln 2 + log1p(2^-k).
        const double first = log_p + std::log(k * kLn2 + std::log1p(std::ldexp(1.0, -k)));
        if (first <= first_bound && log_p <= second_bound) return k;
    }
    fail(ErrorCode::InvalidParameters, "no dyadic probability found");
}

}  // namespace

int ui_sequence_exponent(int n) {
    if (n < 1) fail(ErrorCode::InvalidParameters, "sequence index starts at 1");
    static const std::vector<int> table = [] {
        std::vector<int> t(257, 0);
        for (int i = 1; i <= 256; ++i) t[static_cast<std::size_t>(i)] = search_ui_exponent(i);
        return t;
    }();
    if (n <= 256) return table[static_cast<std::size_t>(n)];
    return search_ui_exponent(n);
}

int walk_exponent(const RandomWalkParams& walk, int n) {
    if (walk.probabilities == "dyadic") return n;
    if (walk.probabilities == "ui-sequence") return ui_sequence_exponent(n);
    if (walk.probabilities == "explicit") {
        if (n > static_cast<int>(walk.explicit_exponents.size()))
            fail(ErrorCode::InvalidParameters, "explicit probabilities end before n=" + std::to_string(n));
        return walk.explicit_exponents[static_cast<std::size_t>(n - 1)];
    }
    fail(ErrorCode::InvalidParameters, "unknown probability family '" + walk.probabilities + "'");
}

SeriesFacts series_facts(const RandomWalkParams& walk) {
    const auto& f = walk.sizes;
    if (f == "alt-sqrt") return {true, false, false};
    if (f == "ones") return {false, false, false};
    if (f == "harmonic-osc") return {false, true, false};
    // e^y - 1 = y + y^2/2 + ..., and the y^2/2 terms sum to infinity.
    if (f == "exp-alt-sqrt") return {false, false, false};
    if (f == "neg-harmonic") return {false, true, false};
    if (f == "alt-harmonic") return {true, true, false};
    if (f == "constant") {
        const bool zero = walk.size_scale == 0.0;
        return {zero, zero, zero};
    }
    if (f == "geometric") return {true, true, true};
    if (f == "explicit") return {true, true, true};
    fail(ErrorCode::OracleUnavailable, "no closed-form series test for '" + f + "'");
}

void ModelSpec::validate() const {
    require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive and finite");
    switch (kind) {
        case ModelKind::RandomWalkLargeJumps: {
            const auto& p = walk.probabilities;
            require(p == "dyadic" || p == "ui-sequence" || p == "explicit", "unknown probability family '" + p + "'");
            if (p == "explicit") {
                require(static_cast<int>(walk.explicit_exponents.size()) >= steps_in(horizon),
                        "explicit probabilities must cover the horizon");
                for (int k : walk.explicit_exponents) require(k >= 1, "probability exponents must be >= 1");
            }
            if (walk.sizes == "explicit")
                require(static_cast<int>(walk.explicit_sizes.size()) >= steps_in(horizon),
                        "explicit sizes must cover the horizon");
            (void)walk_size(walk, 1);
            require(std::isfinite(walk.size_scale), "size scale must be finite");
            break;
        }
        case ModelKind::CoxOneJump: cox.rate.validate(); break;
        case ModelKind::DiscreteDensitySteps: {
            require(steps.family == "two-point" || steps.family == "explicit",
                    "unknown step family '" + steps.family + "'");
            for (const auto& law : steps.laws) {
                require(std::abs(law_mass(law) - 1.0) <= 1e-12, "step law masses must sum to 1");
                require(law.heavy_mass >= 0.0, "heavy mass must be nonnegative");
                for (const auto& pt : law.points) require(pt.mass >= 0.0, "masses must be nonnegative");
            }
            break;
        }
        case ModelKind::GridDiffusion:
            require(diffusion.qv_rate > 0.0 && std::isfinite(diffusion.qv_rate), "qv rate must be positive");
            require(diffusion.step > 0.0, "grid step must be positive");
            require(diffusion.start >= 0.0 && std::isfinite(diffusion.drift), "invalid diffusion start or drift");
            break;
        case ModelKind::Composite: {
            require(!components.empty(), "composite needs components");
            int diffusions = 0;
            for (const auto& c : components) {
                require(c.kind != ModelKind::Composite, "composites do not nest");
                if (c.kind == ModelKind::GridDiffusion) ++diffusions;
                auto copy = c;
                copy.horizon = horizon;
                copy.validate();
            }
            require(diffusions <= 1, "at most one diffusion component");
            CompensatorSpec probe;
            collect_atoms(*this, probe);
            for (std::size_t i = 1; i < probe.atoms.size(); ++i)
                if (probe.atoms[i].time == probe.atoms[i - 1].time)
                    fail(ErrorCode::UnsupportedModel, "components share a jump time");
            break;
        }
        case ModelKind::DeterministicSeries:
            require(series.sizes == "alt-harmonic" || series.sizes == "zero",
                    "unknown series family '" + series.sizes + "'");
            break;
    }
}

bool ModelSpec::is_martingale() const {
    switch (kind) {
        case ModelKind::RandomWalkLargeJumps: return true;
        case ModelKind::CoxOneJump: return cox.compensated;
        case ModelKind::DiscreteDensitySteps: {
            if (steps.family == "two-point") return true;
            for (const auto& law : steps.laws)
                if (std::abs(law_mean(law)) > 1e-12) return false;
            return true;
        }
        case ModelKind::GridDiffusion: return diffusion.drift == 0.0;
        case ModelKind::Composite:
            return std::all_of(components.begin(), components.end(), [](const ModelSpec& c) { return c.is_martingale(); });
        case ModelKind::DeterministicSeries: return series.sizes == "zero";
    }
    return false;
}

bool ModelSpec::jumps_above_minus_one() const {
    switch (kind) {
        case ModelKind::RandomWalkLargeJumps: {
            for (int n = 1; n <= std::min(steps_in(horizon), 4000); ++n) {
                const double x = walk_size(walk, n);
                const int k = walk_exponent(walk, n);
                if (x <= -1.0) return false;
                if (x > 0.0 && !(k < 1000 && x * (std::ldexp(1.0, k) - 1.0) < 1.0)) return false;
            }
            return true;
        }
        case ModelKind::CoxOneJump: return cox.rate.mark_scale == 1.0;
        case ModelKind::DiscreteDensitySteps:
            for (const auto& law : steps.laws)
                for (const auto& p : law.points)
                    if (!(p.gap() > 0.0)) return false;
            return true;
        case ModelKind::GridDiffusion: return true;
        case ModelKind::Composite:
            return std::all_of(components.begin(), components.end(),
                               [](const ModelSpec& c) { return c.jumps_above_minus_one(); });
        case ModelKind::DeterministicSeries: return series.sizes == "zero";
    }
    return false;
}

SampledPath sample_path(const ModelSpec& model, Substream& rng, const SampleOverrides& overrides) {
    PathBuilder b(model.horizon);
    SampledPath out;
    sample_into(model, rng, overrides, b, out.info);
    out.path = b.build();
    return out;
}

SampledPath sample_path(const ModelSpec& model, std::uint64_t seed, std::uint64_t index, StreamId stream) {
    Substream rng(seed, index, stream);
    return sample_path(model, rng);
}

CompensatorSpec compensator(const ModelSpec& model) {
    CompensatorSpec comp;
    collect_atoms(model, comp);
    std::stable_sort(comp.atoms.begin(), comp.atoms.end(), [](const Atom& a, const Atom& b) { return a.time < b.time; });
    return comp;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Yes: return "yes";
        case Verdict::No: return "no";
        case Verdict::Mixed: return "mixed";
        case Verdict::Unknown: return "unknown";
    }
    return "";
}

namespace {

Ternary of(bool b) { return b ? Ternary::yes() : Ternary::no(); }

EventOracle walk_oracle(const ModelSpec& m) {
    const auto f = series_facts(m.walk);
    EventOracle o;
    // Finitely many rare jumps, so the walk behaves like its partial sums.
    o.converges = of(f.sum_converges);
    o.qv_finite = of(f.square_summable);
    o.special_semimartingale_on_closure = of(f.abs_summable);
    o.sup_finite = f.sum_converges ? Ternary::yes() : Ternary::unknown();
    o.limsup_minus_infinity = f.sum_converges ? Ternary::no() : Ternary::unknown();
    o.notes = "partial sums of x_n decide convergence; squares decide [X,X]; absolute values decide the closure";
    const auto& s = m.walk.sizes;
    if (s == "ones" || s == "exp-alt-sqrt" || s == "harmonic-osc") o.limsup_minus_infinity = Ternary::no();
    if (s == "ones" || s == "exp-alt-sqrt" || s == "harmonic-osc") o.sup_finite = Ternary::no();
    if (s == "neg-harmonic" || (s == "constant" && m.walk.size_scale < 0.0)) {
        o.limsup_minus_infinity = Ternary::yes();
        o.sup_finite = Ternary::yes();
    }
    return o;
}

EventOracle cox_oracle(const CoxParams& c) {
    EventOracle o;
    const double total = c.rate.total();
    const double jumps = std::isinf(total) ? 1.0 : -std::expm1(-total);
    if (!c.compensated) {
        o.converges = o.qv_finite = o.special_semimartingale_on_closure = Ternary::yes();
        o.sup_finite = Ternary::yes();
        o.limsup_minus_infinity = Ternary::no();
        o.notes = "a single jump and nothing else";
        return o;
    }
    const bool drift_diverges = std::isinf(c.rate.mark_integral(kInf));
    if (drift_diverges && jumps < 1.0) {
        o.converges = Ternary::mixed(jumps);
        o.special_semimartingale_on_closure = Ternary::mixed(jumps);
        o.limsup_minus_infinity = Ternary::mixed(1.0 - jumps);
    } else {
        o.converges = o.special_semimartingale_on_closure = Ternary::yes();
        o.limsup_minus_infinity = Ternary::no();
    }
    o.qv_finite = Ternary::yes();
    o.sup_finite = Ternary::yes();
    o.notes = "P(rho = inf) = exp(-total intensity); without the jump the compensator drift runs off";
    return o;
}

}  // namespace

EventOracle analytic_oracle(const ModelSpec& model) {
    const std::string& id = model.preset_id;
    EventOracle o;
    if (id == "zero") {
        o.converges = o.qv_finite = o.special_semimartingale_on_closure = o.sup_finite = Ternary::yes();
        o.ui_martingale_of_exponential = Ternary::yes();
        o.limsup_minus_infinity = Ternary::no();
        o.notes = "constant path";
        return o;
    }
    if (id == "bm") {
        o.converges = o.qv_finite = o.special_semimartingale_on_closure = o.sup_finite = Ternary::no();
        o.limsup_minus_infinity = Ternary::no();
        o.ui_martingale_of_exponential = Ternary::no();
        o.notes = "Brownian motion oscillates; its exponential tends to zero";
        return o;
    }
    if (id == "remark-4.3") {
        o.converges = o.qv_finite = o.sup_finite = Ternary::yes();
        o.special_semimartingale_on_closure = Ternary::no();
        o.limsup_minus_infinity = Ternary::no();
        o.notes = "alternating harmonic series converges while its total variation is infinite";
        return o;
    }
    if (id == "ex-6.6") {
        const double p = -std::expm1(-model.components.at(0).cox.rate.total());
        o.converges = o.qv_finite = o.special_semimartingale_on_closure = o.sup_finite = Ternary::no();
        o.limsup_minus_infinity = Ternary::mixed(1.0 - p);
        o.notes = "with the Brownian part [X,X] is infinite; on rho = inf the drift -t dominates B_t";
        return o;
    }
    if (id == "ex-6.3-1") {
        o.converges = o.qv_finite = o.special_semimartingale_on_closure = o.sup_finite = Ternary::no();
        o.limsup_minus_infinity = Ternary::no();
        o.ui_martingale_of_exponential = Ternary::no();
        o.notes = "steps of size about one never settle; the dual N explodes, so Z is not uniformly integrable";
        return o;
    }
    if (id == "ex-5.9") {
        o.converges = o.qv_finite = o.special_semimartingale_on_closure = o.sup_finite = Ternary::no();
        o.limsup_minus_infinity = Ternary::no();
        o.ui_martingale_of_exponential = Ternary::no();
        o.notes = "Brownian motion after time 1; Z tends to zero";
        return o;
    }
    if (id == "ex-5.16-part-2") {
        o.converges = o.qv_finite = o.special_semimartingale_on_closure = o.sup_finite = Ternary::yes();
        o.limsup_minus_infinity = Ternary::no();
        o.ui_martingale_of_exponential = Ternary::yes();
        o.notes = "one step, then constant";
        return o;
    }
    switch (model.kind) {
        case ModelKind::RandomWalkLargeJumps: {
            o = walk_oracle(model);
            if (id == "ex-6.2-1") o.ui_martingale_of_exponential = Ternary::no();
            if (id == "ui-geometric") o.ui_martingale_of_exponential = Ternary::yes();
            return o;
        }
        case ModelKind::CoxOneJump: {
            o = cox_oracle(model.cox);
            if (id == "ex-6.3-2") o.ui_martingale_of_exponential = Ternary::no();
            return o;
        }
        default: break;
    }
    fail(ErrorCode::OracleUnavailable, "no analytic oracle for this model");
}

PathTruth path_truth(const ModelSpec& model, const SampleInfo& info) {
    PathTruth t;
    EventOracle o;
    try {
        o = analytic_oracle(model);
    } catch (const Error&) {
        return t;
    }
    auto resolve = [&](const Ternary& v, bool when_jumped) -> std::optional<bool> {
        if (v.verdict == Verdict::Yes) return true;
        if (v.verdict == Verdict::No) return false;
        if (v.verdict == Verdict::Mixed) return std::isfinite(info.rho) ? when_jumped : !when_jumped;
        return std::nullopt;
    };
    t.converges = resolve(o.converges, true);
    t.qv_finite = resolve(o.qv_finite, true);
    t.limsup_minus_infinity = resolve(o.limsup_minus_infinity, false);
    return t;
}

std::vector<std::string> preset_ids() {
    return {"ex-6.2-1", "ex-6.2-2", "ex-6.2-3", "ex-6.2-4", "ex-6.2-5", "ex-6.2-6", "ex-6.4",
            "ex-6.5",   "ex-6.6",   "ex-6.7",   "ex-6.8",   "ex-6.3-1", "ex-6.3-2", "ex-5.9",
            "ex-5.16-part-2", "remark-4.3", "bm", "zero", "ui-geometric"};
}

ModelSpec preset(const std::string& requested) {
    const std::string id = requested == "ex-5.16" ? "ex-5.9" : requested;
    ModelSpec m;
    m.preset_id = id;
    auto walk = [&](const std::string& sizes, double horizon, const std::string& text) {
        m.kind = ModelKind::RandomWalkLargeJumps;
        m.walk.sizes = sizes;
        m.walk.probabilities = "dyadic";
        m.horizon = horizon;
        m.description = text;
    };
    auto cox = [&](CoxFamily family, double horizon, const std::string& text) {
        m.kind = ModelKind::CoxOneJump;
        m.cox.rate = CoxRate{};
        m.cox.rate.family = family;
        m.horizon = horizon;
        m.description = text;
    };
    if (id == "ex-6.2-1") {
        walk("alt-sqrt", 1e4, "x_n = (-1)^n / sqrt(n) with x_1 = 0, p_n = 2^-n");
        m.walk.zero_first = true;
        m.epsilon = 2e-2;
    } else if (id == "ex-6.2-2") {
        walk("ones", 256, "x_n = 1, p_n = 2^-n");
    } else if (id == "ex-6.2-3") {
        walk("harmonic-osc", 1e4, "|x_n| = 1/n with signs steering the partial sums to every level, p_n = 2^-n");
    } else if (id == "ex-6.2-4") {
        walk("exp-alt-sqrt", 1e4, "x_n = exp((-1)^n / sqrt(n)) - 1, p_n = 2^-n");
    } else if (id == "ex-6.2-5") {
        walk("neg-harmonic", 1e3, "x_n = -1/n, p_n = 2^-n");
        // X drifts like -log n; at this horizon only levels of order one separate it.
        m.limsup_level = 1.0;
    } else if (id == "ex-6.2-6") {
        walk("alt-harmonic", 1e3, "x_n = (-1)^n / n, p_n = 2^-n");
    } else if (id == "ui-geometric") {
        walk("geometric", 32, "x_n = 2^-n, p_n = 2^-n; the exponential is bounded in L^2");
    } else if (id == "ex-6.5") {
        walk("constant", 32, "x_n = -1/2 with the ui-sequence p_n");
        m.walk.size_scale = -0.5;
        m.walk.probabilities = "ui-sequence";
        m.limsup_level = 5.0;
    } else if (id == "ex-6.4") {
        cox(CoxFamily::Decay2Linear, 1e8, "Cox jump, intensity (1+s)^-2, mark s, compensated");
        m.limsup_level = 10.0;
    } else if (id == "ex-6.8") {
        cox(CoxFamily::Decay2Linear, 1e8, "Cox jump, intensity (1+s)^-2, mark s, compensated");
        m.limsup_level = 10.0;
    } else if (id == "ex-6.7") {
        cox(CoxFamily::Decay2Linear, 1e8, "negative Cox jump -s at rho without compensation");
        m.cox.rate.mark_scale = -1.0;
        m.cox.compensated = false;
    } else if (id == "ex-6.3-2") {
        cox(CoxFamily::HarmonicShrink, 1e4, "Cox jump, intensity 1/(1+s), mark -s/(1+s), compensated");
    } else if (id == "ex-6.6") {
        m.kind = ModelKind::Composite;
        m.horizon = 100.0;
        m.description = "Cox jump with intensity (1+s)^-2 and mark (1+s)^2 plus an independent Brownian motion";
        ModelSpec c;
        c.kind = ModelKind::CoxOneJump;
        c.cox.rate.family = CoxFamily::Decay2Reciprocal;
        ModelSpec w;
        w.kind = ModelKind::GridDiffusion;
        w.diffusion.step = 100.0 / 4096.0;
        m.components = {c, w};
        m.limsup_level = 10.0;
    } else if (id == "ex-6.3-1") {
        m.kind = ModelKind::DiscreteDensitySteps;
        m.steps.family = "two-point";
        m.horizon = 32;
        m.description = "steps 1 or -(1-p_n)/(1+p_n) with the ui-sequence p_n";
    } else if (id == "ex-5.9" || id == "ex-5.16-part-2") {
        const double q = 1.0 / (1.0 + 2.0 * HeavyTailLaw::instance().mean());
        ModelSpec step;
        step.kind = ModelKind::DiscreteDensitySteps;
        step.steps.family = "explicit";
        step.steps.laws = {StepLaw{{AtomPoint{-0.5, 1.0 - q}}, q}};
        m.horizon = 2.0;
        if (id == "ex-5.9") {
            m.kind = ModelKind::Composite;
            ModelSpec w;
            w.kind = ModelKind::GridDiffusion;
            w.diffusion.start = 1.0;
            w.diffusion.step = 1.0 / 1024.0;
            m.components = {step, w};
            m.description = "one heavy-tailed step at time 1, then Brownian motion";
        } else {
            m.kind = ModelKind::DiscreteDensitySteps;
            m.steps = step.steps;
            m.description = "one heavy-tailed step at time 1, then constant";
        }
    } else if (id == "remark-4.3") {
        m.kind = ModelKind::DeterministicSeries;
        m.series.sizes = "alt-harmonic";
        m.horizon = 1e3;
        m.description = "deterministic alternating harmonic partial sums";
    } else if (id == "bm") {
        m.kind = ModelKind::GridDiffusion;
        m.horizon = 1.0;
        m.description = "standard Brownian motion on a grid of step 0.01";
    } else if (id == "zero") {
        m.kind = ModelKind::DeterministicSeries;
        m.series.sizes = "zero";
        m.horizon = 1.0;
        m.description = "the zero martingale";
    } else {
        fail(ErrorCode::UnknownPreset, "unknown preset '" + requested + "'");
    }
    m.signed_exponential = !m.jumps_above_minus_one() && m.kind != ModelKind::DeterministicSeries;
    m.validate();
    return m;
}

}  // namespace lmconv
