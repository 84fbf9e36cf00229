#include "lmconv/follmer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lmconv/ensemble.hpp"
#include "lmconv/error.hpp"
#include "lmconv/stochexp.hpp"

namespace lmconv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPruneWeight = 1e-30;

int steps_in(double horizon) { return static_cast<int>(std::floor(horizon + 1e-9)); }

ModelSpec tilt_component(const ModelSpec& p, std::vector<TiltRow>& rows,
                         std::optional<std::pair<CoxRate, CoxRate>>& cox_tilt) {
    ModelSpec q;
    q.horizon = p.horizon;
    switch (p.kind) {
        case ModelKind::RandomWalkLargeJumps:
        case ModelKind::DiscreteDensitySteps:
        case ModelKind::DeterministicSeries: {
            q.kind = ModelKind::DiscreteDensitySteps;
            q.steps.family = "explicit";
            const CompensatorSpec comp = compensator(p);
            const int steps = steps_in(p.horizon);
            q.steps.laws.assign(static_cast<std::size_t>(steps), StepLaw{{AtomPoint{0.0, 1.0}}, 0.0});
            for (const auto& atom : comp.atoms) {
                if (atom.heavy_mass > 0.0)
                    fail(ErrorCode::UnsupportedModel, "tilting a heavy-tailed jump law is not supported");
                const int n = static_cast<int>(atom.time);
                if (static_cast<double>(n) != atom.time || n < 1 || n > steps)
                    fail(ErrorCode::UnsupportedModel, "atoms must sit at integer times within the horizon");
                TiltRow row;
                row.time = atom.time;
                row.p_points = atom.points;
                row.q_points = tilt_law(atom.points);
                for (const auto& pt : row.q_points) row.q_mass += pt.true_mass();
                q.steps.laws[static_cast<std::size_t>(n - 1)] = StepLaw{row.q_points, 0.0};
                rows.push_back(std::move(row));
            }
            break;
        }
        case ModelKind::CoxOneJump:
            q.kind = ModelKind::CoxOneJump;
            q.cox.rate = p.cox.rate.tilted();
            q.cox.compensated = true;
            cox_tilt = std::make_pair(p.cox.rate, q.cox.rate);
            break;
        case ModelKind::GridDiffusion:
            // -M^c + [M^c] is a driftless Brownian motion under the tilted law.
            q.kind = ModelKind::GridDiffusion;
            q.diffusion = p.diffusion;
            break;
        case ModelKind::Composite:
            q.kind = ModelKind::Composite;
            for (auto c : p.components) {
                c.horizon = p.horizon;
                q.components.push_back(tilt_component(c, rows, cox_tilt));
            }
            break;
    }
    return q;
}

double max_log(const ExponentialPath& z, double sign) {
    double best = -kInf;
    for (const auto& k : z.exp_knots()) {
        if (k.sign_left == 0 || k.sign == 0) return sign > 0 ? best : kInf;
        best = std::max({best, sign * k.log_left, sign * k.log_value});
    }
    return best;
}

// Both sides compute the same atoms of log Z along different routes; rounding
// keeps last-bit differences from splitting ties in the KS statistic.
double quantize(double v) { return std::round(v * 1e9) / 1e9; }

double parse_number(const std::string& s, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) fail(ErrorCode::ConfigError, "bad number in statistic '" + text + "'");
    return v;
}

}  // namespace

AtomPoint tilt_point(const AtomPoint& p) {
    AtomPoint q;
    if (p.scale == 0) {
        const double g = p.gap();
        if (!(g > 0.0)) fail(ErrorCode::DomainError, "tilting needs jump sizes above -1");
        if (g >= std::ldexp(1.0, -900)) {
            q.size = -p.size / g;
            q.mass = p.mass * g;
            q.one_plus = 1.0 / g;
            return q;
        }
        // phi(x) is about 1/g and may not be a double: keep it scaled.
        int e = 0;
        const double gm = std::frexp(g, &e);
        q.size = -p.size / gm;
        q.scale = -e;
        q.mass = p.mass * gm;
        return q;
    }
    if (p.scale < 0 || !(p.size > 0.0)) fail(ErrorCode::DomainError, "tilting needs jump sizes above -1");
    const double tiny = std::ldexp(1.0, -p.scale);
    q.size = -p.size / (tiny + p.size);
    q.one_plus = tiny / (tiny + p.size);
    q.mass = p.mass * tiny + p.mass * p.size;
    if (!(q.one_plus > 0.0)) fail(ErrorCode::UnsupportedModel, "tilted jump too close to -1 to represent");
    return q;
}

std::vector<AtomPoint> tilt_law(const std::vector<AtomPoint>& points) {
    std::vector<AtomPoint> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(tilt_point(p));
    return out;
}

DualModelPair tilt_model(const ModelSpec& p_model) {
    p_model.validate();
    if (!p_model.is_martingale()) fail(ErrorCode::UnsupportedModel, "tilting needs a martingale");
    if (!p_model.jumps_above_minus_one()) fail(ErrorCode::UnsupportedModel, "tilting needs jumps above -1");
    DualModelPair pair;
    pair.p_model = p_model;
    pair.q_model = tilt_component(p_model, pair.tilt_certificate, pair.cox_tilt);
    const std::string origin = p_model.preset_id.empty() ? p_model.description : p_model.preset_id;
    pair.q_model.description = "tilted dual of " + origin;
    pair.q_model.validate();
    return pair;
}

double Statistic::operator()(double x) const {
    switch (kind) {
        case Kind::One: return 1.0;
        case Kind::AtMost: return x <= hi ? 1.0 : 0.0;
        case Kind::AtLeast: return x >= lo ? 1.0 : 0.0;
        case Kind::Box: return (x >= lo && x <= hi) ? 1.0 : 0.0;
        case Kind::Logistic: return 1.0 / (1.0 + std::exp(-x / lo));
        case Kind::Cosine: return 0.5 * (1.0 + std::cos(lo * x));
    }
    return 0.0;
}

std::string Statistic::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case Kind::One: os << "one"; break;
        case Kind::AtMost: os << "indicator:X<=" << hi; break;
        case Kind::AtLeast: os << "indicator:X>=" << lo; break;
        case Kind::Box: os << "box:" << lo << ',' << hi; break;
        case Kind::Logistic: os << "logistic:" << lo; break;
        case Kind::Cosine: os << "cos:" << lo; break;
    }
    return os.str();
}

Statistic Statistic::parse(const std::string& text) {
    Statistic s;
    if (text == "one") return s;
    const auto colon = text.find(':');
    if (colon == std::string::npos) fail(ErrorCode::ConfigError, "unknown statistic '" + text + "'");
    const std::string head = text.substr(0, colon);
    const std::string body = text.substr(colon + 1);
    if (head == "indicator") {
        if (body.rfind("X<=", 0) == 0) {
            s.kind = Kind::AtMost;
            s.hi = parse_number(body.substr(3), text);
        } else if (body.rfind("X>=", 0) == 0) {
            s.kind = Kind::AtLeast;
            s.lo = parse_number(body.substr(3), text);
        } else {
            fail(ErrorCode::ConfigError, "indicator needs X<=c or X>=c in '" + text + "'");
        }
    } else if (head == "box") {
        const auto comma = body.find(',');
        if (comma == std::string::npos) fail(ErrorCode::ConfigError, "box needs a,b in '" + text + "'");
        s.kind = Kind::Box;
        s.lo = parse_number(body.substr(0, comma), text);
        s.hi = parse_number(body.substr(comma + 1), text);
        if (!(s.lo <= s.hi)) fail(ErrorCode::ConfigError, "box bounds out of order in '" + text + "'");
    } else if (head == "logistic" || head == "cos") {
        s.kind = head == "cos" ? Kind::Cosine : Kind::Logistic;
        s.lo = parse_number(body, text);
        if (s.kind == Kind::Logistic && !(s.lo > 0.0)) fail(ErrorCode::ConfigError, "logistic scale must be positive");
    } else {
        fail(ErrorCode::ConfigError, "unknown statistic '" + text + "'");
    }
    return s;
}

DualSample sample_dual(const DualModelPair& pair, std::uint64_t seed, std::uint64_t index) {
    const auto sp = sample_path(pair.q_model, seed, index, StreamId::Dual);
    DualSample out;
    out.n_path = sp.path;
    const CadlagPath alive = before_absorption(sp.path);
    std::optional<double> boom = alive.absorption_time();
    const auto en = stoch_exp(alive).exponential;
    if (en.numeric_zero_time() && (!boom || *en.numeric_zero_time() < *boom)) boom = en.numeric_zero_time();
    PathData d = reciprocal_log(alive).data();
    d.absorption_time.reset();
    if (boom) {
        d.jumps.erase(std::remove_if(d.jumps.begin(), d.jumps.end(), [&](const JumpEvent& j) { return j.time >= *boom; }),
                      d.jumps.end());
        d.explosion_time = boom;
    }
    out.m_path = CadlagPath(std::move(d));
    if (boom && *boom <= pair.q_model.horizon) out.explosion_time = boom;
    return out;
}

DualityResult duality_check(const DualModelPair& pair, const StoppingRule& sigma, const Statistic& g,
                            std::size_t n_paths, std::uint64_t seed, std::size_t threads) {
    if (n_paths < 2) fail(ErrorCode::InvalidParameters, "duality check needs at least two paths");
    const double h = pair.p_model.horizon;
    const auto lhs = parallel_map<double>(n_paths, threads, [&](std::size_t i) {
        const auto sp = sample_path(pair.p_model, seed, i, StreamId::Primary);
        const auto ze = stoch_exp(sp.path);
        PathTrajectory view(sp.path);
        const auto stop = evaluate_rule(sigma, RuleTargets{&view, &ze.exponential, nullptr}, h, Monitoring::Knots);
        const double z = ze.exponential.value_at(stop.time);
        return z == 0.0 ? 0.0 : z * g(value_at(sp.path, stop.time));
    });
    struct QValue {
        double value = 0.0;
        bool exploded = false;
    };
    const auto rhs = parallel_map<QValue>(n_paths, threads, [&](std::size_t i) {
        const auto ds = sample_dual(pair, seed, i);
        const auto ze = stoch_exp(ds.m_path);
        PathTrajectory view(ds.m_path);
        const auto stop = evaluate_rule(sigma, RuleTargets{&view, &ze.exponential, nullptr}, h, Monitoring::Knots);
        if (ds.explosion_time && stop.time >= *ds.explosion_time) return QValue{0.0, true};
        return QValue{g(value_at(ds.m_path, stop.time)), false};
    });
    DualityResult r;
    r.lhs = mean_estimate(lhs);
    std::vector<double> values(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        values[i] = rhs[i].value;
        if (rhs[i].exploded) ++r.q_explosions;
    }
    r.rhs = mean_estimate(values);
    r.z_score = r.lhs.mean == r.rhs.mean ? 0.0 : z_score(r.lhs, r.rhs);
    r.consistent = r.z_score <= 4.0;
    return r;
}

UiProbeTable ui_probe(const ModelSpec& p_model, const std::vector<double>& horizons, std::size_t n_paths,
                      std::uint64_t seed, double level, std::size_t threads) {
    if (!(level > 1.0)) fail(ErrorCode::InvalidParameters, "explosion level must exceed 1");
    if (n_paths < 2) fail(ErrorCode::InvalidParameters, "ui probe needs at least two paths");
    const double log_level = std::log(level);
    UiProbeTable table;
    table.level = level;
    bool stable = true;
    for (double horizon : horizons) {
        ModelSpec m = p_model;
        m.horizon = horizon;
        const DualModelPair pair = tilt_model(m);
        struct PValue {
            double z = 0.0;
            double truncated = 0.0;
        };
        const auto ps = parallel_map<PValue>(n_paths, threads, [&](std::size_t i) {
            const auto sp = sample_path(pair.p_model, seed, i, StreamId::Primary);
            const auto ze = stoch_exp(sp.path).exponential;
            const double z = ze.value_at(horizon);
            return PValue{z, max_log(ze, 1.0) < log_level ? z : 0.0};
        });
        const auto qs = parallel_map<double>(n_paths, threads, [&](std::size_t i) {
            const auto sp = sample_path(pair.q_model, seed, i, StreamId::Dual);
            // log Z = -log E(N); an absorbed E(N) is an exploded Z.
            const auto en = stoch_exp(sp.path).exponential;
            return max_log(en, -1.0) < log_level ? 1.0 : 0.0;
        });
        std::vector<double> z(n_paths), truncated(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) {
            z[i] = ps[i].z;
            truncated[i] = ps[i].truncated;
        }
        UiProbeRow row;
        row.horizon = horizon;
        row.p_mean = mean_estimate(z);
        row.p_truncated = mean_estimate(truncated);
        row.q_survival = mean_estimate(qs);
        row.z_score = row.p_truncated.mean == row.q_survival.mean ? 0.0 : z_score(row.p_truncated, row.q_survival);
        if (1.0 - row.q_survival.mean > 4.0 * row.q_survival.se + 1e-3) stable = false;
        table.rows.push_back(row);
    }
    table.trend = stable ? "stable" : "decaying";
    return table;
}

TwoPointOracle two_point_truncated_mass(int horizon, double level) {
    if (horizon < 0) fail(ErrorCode::InvalidParameters, "horizon must be nonnegative");
    TwoPointOracle out;
    std::map<double, double> p_states{{1.0, 1.0}};
    std::map<double, double> q_states{{1.0, 1.0}};
    double p_pruned = 0.0, q_pruned = 0.0;
    for (int n = 1; n <= horizon; ++n) {
        const double p = std::ldexp(1.0, -ui_sequence_exponent(n));
        const double down = 2.0 * p / (1.0 + p);
        std::map<double, double> p_next, q_next;
        for (const auto& [z, w] : p_states) {
            if (2.0 * z < level) {
                const double wu = w * 0.5 * (1.0 - p);
                if (wu * 2.0 * z >= kPruneWeight) p_next[2.0 * z] += wu;
                else p_pruned += wu * 2.0 * z;
            }
            const double wd = w * 0.5 * (1.0 + p);
            if (wd * z * down >= kPruneWeight) p_next[z * down] += wd;
            else p_pruned += wd * z * down;
        }
        for (const auto& [z, w] : q_states) {
            if (2.0 * z < level) {
                const double wu = w * (1.0 - p);
                if (wu >= kPruneWeight) q_next[2.0 * z] += wu;
                else q_pruned += wu;
            }
            const double wd = w * p;
            if (wd >= kPruneWeight) q_next[z * down] += wd;
            else q_pruned += wd;
        }
        p_states = std::move(p_next);
        q_states = std::move(q_next);
    }
    for (const auto& [z, w] : p_states) out.p_side += w * z;
    for (const auto& [z, w] : q_states) out.q_side += w;
    out.pruned = std::max(p_pruned, q_pruned);
    return out;
}

LocalizationDiagnostic extended_local_diag(const ModelSpec& model, const std::optional<CriterionSpec>& target,
                                           const std::vector<double>& levels, std::size_t n_paths,
                                           std::uint64_t seed, bool z_weighted, std::size_t threads) {
    if (levels.empty()) fail(ErrorCode::InvalidParameters, "need at least one level");
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (!(levels[i] > 0.0) || (i > 0 && !(levels[i] > levels[i - 1])))
            fail(ErrorCode::InvalidParameters, "levels must be positive and strictly increasing");
    if (n_paths < 2) fail(ErrorCode::InvalidParameters, "need at least two paths");
    model.validate();
    const CompensatorSpec comp = compensator(model);
    const double h = model.horizon;
    ExpOptions exp_options;
    exp_options.allow_signed = model.signed_exponential;
    struct Row {
        std::vector<double> sup;
        std::vector<double> covered;
    };
    const std::size_t L = levels.size();
    const auto rows = parallel_map<Row>(n_paths, threads, [&](std::size_t i) {
        const auto sp = sample_path(model, seed, i);
        CadlagPath x = sp.path;
        std::optional<double> diverges;
        if (target) {
            const auto c = criterion_path(*target, sp.path, comp);
            x = c.path;
            diverges = c.divergence_time;
        }
        const auto ze = stoch_exp(sp.path, exp_options).exponential;
        const auto kv = knot_values(x);
        PathTrajectory view(x);
        Row row;
        row.sup.resize(L);
        row.covered.resize(L);
        for (std::size_t l = 0; l < L; ++l) {
            const auto hit = first_crossing(view, levels[l], CrossingDirection::Abs);
            if (!hit && diverges && *diverges <= h) {
                // The criterion is infinite before it reaches the level.
                row.sup[l] = kInf;
                continue;
            }
            const double stop = hit ? *hit : h;
            double sup = 0.0;
            for (const auto& k : kv) {
                if (k.time > stop) break;
                sup = std::max(sup, std::abs(k.left));
                if (k.time < stop) sup = std::max(sup, std::abs(k.value));
            }
            // The overshoot at tau_n counts: X_{tau_n} may jump far past the level.
            sup = std::max(sup, std::abs(value_at(x, stop)));
            row.covered[l] = hit ? 0.0 : 1.0;
            row.sup[l] = z_weighted ? sup * std::abs(ze.value_at(stop)) : sup;
        }
        return row;
    });
    LocalizationDiagnostic out;
    out.target = target ? target->name() : "X";
    out.levels = levels;
    out.z_weighted = z_weighted;
    std::vector<double> col(n_paths);
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t i = 0; i < n_paths; ++i) col[i] = rows[i].sup[l];
        out.sup_estimate.push_back(mean_estimate(col));
        for (std::size_t i = 0; i < n_paths; ++i) col[i] = rows[i].covered[l];
        out.coverage.push_back(mean_estimate(col));
    }
    return out;
}

ReciprocalConsistency reciprocal_consistency(const DualModelPair& pair, std::size_t n_paths, std::uint64_t seed,
                                             std::size_t threads) {
    if (n_paths < 2) fail(ErrorCode::InvalidParameters, "need at least two paths");
    const double h = pair.p_model.horizon;
    const auto pz = parallel_map<double>(n_paths, threads, [&](std::size_t i) {
        const auto sp = sample_path(pair.p_model, seed, i, StreamId::Primary);
        return stoch_exp(sp.path).exponential.value_at(h);
    });
    const auto qz = parallel_map<double>(n_paths, threads, [&](std::size_t i) {
        const auto sp = sample_path(pair.q_model, seed, i, StreamId::Dual);
        const auto en = stoch_exp(sp.path).exponential;
        if (en.sign_at(h) == 0) return kInf;
        return -en.log_abs_at(h);
    });
    std::vector<double> cumulative(n_paths);
    double total = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) cumulative[i] = total += pz[i];
    if (!(total > 0.0)) fail(ErrorCode::InvalidParameters, "every P-side exponential vanished");
    ReciprocalConsistency out;
    std::vector<double> resampled;
    Substream rng(seed, 0, StreamId::Bootstrap);
    for (std::size_t k = 0; k < n_paths; ++k) {
        const double u = rng.uniform() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), n_paths - 1);
        resampled.push_back(quantize(std::log(pz[i])));
    }
    std::vector<double> kept;
    for (double v : qz)
        if (v < -kNumericZeroLog) kept.push_back(quantize(v));
    out.p_resampled = resampled.size();
    out.q_kept = kept.size();
    out.ks = ks_two_sample(std::move(resampled), std::move(kept));
    return out;
}

}  // namespace lmconv
