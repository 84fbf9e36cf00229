#include "lmconv/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "lmconv/ensemble.hpp"
#include "lmconv/error.hpp"
#include "lmconv/stats.hpp"
#include "lmconv/stochexp.hpp"

namespace lmconv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::map<std::string, CriterionTag>& tag_names() {
    static const std::map<std::string, CriterionTag> names = {
        {"N", CriterionTag::N},
        {"L", CriterionTag::L},
        {"Aa", CriterionTag::Aa},
        {"Ba", CriterionTag::Ba},
        {"LM_A", CriterionTag::LM_A},
        {"LM_B", CriterionTag::LM_B},
        {"kazamaki_mu", CriterionTag::KazamakiMu},
        {"kazamaki_nu", CriterionTag::KazamakiNu},
        {"novikov_delta", CriterionTag::NovikovDelta},
        {"expm_nu", CriterionTag::ExpmNu},
        {"further_c", CriterionTag::FurtherC},
        {"further_e", CriterionTag::FurtherE},
        {"further_g", CriterionTag::FurtherG},
    };
    return names;
}

// Accumulates a criterion from pieces of M and of its compensator.
class Assembly {
public:
    Assembly(const CadlagPath& m, const CompensatorSpec& comp) : m_(m), comp_(comp), b_(m.horizon()) {}

    void continuous(double c) { b_.add_scaled_continuous(m_, c); }
    void qv(double c) { b_.add_scaled_qv(m_, c); }
    template <class G>
    void jumps(G g) {
        for (const auto& j : m_.jumps()) jumps_.push_back({j.time, g(j.size)});
    }
    void compensated(FunctionTag tag, double c) {
        if (c == 0.0) return;
        const auto cp = compensator_path(comp_, TestFunction::of(tag), m_);
        b_.add_scaled(cp.path, c);
        if (cp.divergence_time) {
            divergence_ = divergence_ ? std::min(*divergence_, *cp.divergence_time) : *cp.divergence_time;
            sign_ = c > 0.0 ? kInf : -kInf;
        }
    }

    CriterionPath finish() {
        b_.set_absorption(m_.absorption_time());
        std::optional<double> stop = m_.explosion_time();
        if (divergence_) stop = stop ? std::min(*stop, *divergence_) : *divergence_;
        b_.set_explosion(stop);
        // The process is infinite from the divergence time on.
        for (const auto& j : jumps_)
            if (!stop || j.time < *stop) b_.add_jump(j.time, j.size);
        CriterionPath out;
        out.path = b_.build();
        out.divergence_time = divergence_;
        out.divergence_value = sign_;
        return out;
    }

private:
    const CadlagPath& m_;
    const CompensatorSpec& comp_;
    PathBuilder b_;
    std::vector<JumpEvent> jumps_;
    std::optional<double> divergence_;
    double sign_ = kInf;
};

void require_above_minus_one(const CadlagPath& m) {
    for (const auto& j : m.jumps())
        if (!(j.size > -1.0)) fail(ErrorCode::DomainError, "criterion processes need jumps above -1");
}

}  // namespace

std::string CriterionSpec::name() const {
    for (const auto& [k, v] : tag_names())
        if (v == tag) {
            std::string s = k;
            if (tag == CriterionTag::Aa || tag == CriterionTag::Ba) s += "[a=" + std::to_string(a) + "]";
            if (tag == CriterionTag::NovikovDelta) s += "[delta=" + std::to_string(delta) + "]";
            if (subtract_u) s += "-U";
            return s;
        }
    return "";
}

CriterionSpec CriterionSpec::parse(const std::string& name, double a, double delta) {
    const auto it = tag_names().find(name);
    if (it == tag_names().end()) fail(ErrorCode::ConfigError, "unknown criterion '" + name + "'");
    if (it->second == CriterionTag::NovikovDelta && !(delta > 0.0))
        fail(ErrorCode::ConfigError, "novikov_delta needs delta > 0");
    CriterionSpec s;
    s.tag = it->second;
    s.a = a;
    s.delta = delta;
    return s;
}

double CriterionPath::value_at(double t) const {
    if (divergence_time && t >= *divergence_time) return divergence_value;
    return lmconv::value_at(path, t);
}

CadlagPath before_absorption(const CadlagPath& m) {
    const auto& js = m.jumps();
    const auto it = std::find_if(js.begin(), js.end(),
                                 [](const JumpEvent& j) { return std::abs(1.0 + j.size) < kAbsorptionTolerance; });
    if (it == js.end()) return m;
    PathBuilder b(m.horizon());
    b.add_scaled_continuous(m, 1.0);
    for (auto j = js.begin(); j != it; ++j) b.add_jump(j->time, j->size);
    std::optional<double> stop = it->time;
    if (m.absorption_time()) stop = std::min(*stop, *m.absorption_time());
    b.set_absorption(stop);
    b.set_explosion(m.explosion_time());
    return b.build();
}

CriterionPath criterion_path(const CriterionSpec& spec, const CadlagPath& m0, const CompensatorSpec& comp) {
    const CadlagPath m = before_absorption(m0);
    require_above_minus_one(m);
    Assembly s(m, comp);
    const double a = spec.a;
    const bool a_family = spec.tag == CriterionTag::Aa || spec.tag == CriterionTag::LM_A;
    const bool b_family = spec.tag == CriterionTag::Ba || spec.tag == CriterionTag::LM_B;
    if (spec.subtract_u && (a_family || b_family)) {
        // Subtracting U = (1-a)N or (1-a)L leaves log Z in both families.
        s.continuous(1.0);
        s.qv(-0.5);
        s.jumps([](double x) { return std::log1p(x); });
        return s.finish();
    }
    switch (spec.tag) {
        case CriterionTag::N: {
            CriterionPath out;
            out.path = reciprocal_log(m);
            return out;
        }
        case CriterionTag::L:
            s.continuous(-1.0);
            s.qv(1.0);
            s.jumps([](double x) { return -std::log1p(x); });
            s.compensated(FunctionTag::Entropy, 1.0);
            break;
        case CriterionTag::Aa:
            s.continuous(a);
            s.qv(0.5 - a);
            s.jumps([a](double x) { return std::log1p(x) - (1.0 - a) * x / (1.0 + x); });
            break;
        case CriterionTag::Ba:
            s.continuous(a);
            s.qv(0.5 - a);
            s.jumps([a](double x) { return a * std::log1p(x); });
            s.compensated(FunctionTag::Entropy, 1.0 - a);
            break;
        case CriterionTag::LM_A:
            s.qv(0.5);
            s.jumps([](double x) { return std::log1p(x) - x / (1.0 + x); });
            break;
        case CriterionTag::LM_B:
            s.qv(0.5);
            s.compensated(FunctionTag::Entropy, 1.0);
            break;
        case CriterionTag::KazamakiMu:
            s.continuous(0.5);
            s.jumps([](double x) {
                const double neg = x < 0.0 ? std::log1p(x) - (x * x + 2.0 * x) / (2.0 * (1.0 + x)) : 0.0;
                return 0.5 * x + neg;
            });
            break;
        case CriterionTag::KazamakiNu:
            s.continuous(0.5);
            s.jumps([](double x) { return 0.5 * x; });
            s.compensated(FunctionTag::Entropy, 0.5);
            break;
        case CriterionTag::NovikovDelta: {
            const double d = spec.delta;
            s.continuous(1.0 / (1.0 + d));
            s.jumps([d](double x) { return x / (1.0 + d); });
            s.qv(-(1.0 - d) / (2.0 + 2.0 * d));
            break;
        }
        case CriterionTag::ExpmNu: s.compensated(FunctionTag::Expm, 1.0); break;
        case CriterionTag::FurtherC:
            s.qv(1.0);
            s.compensated(FunctionTag::TruncatedAbs, 1.0);
            break;
        case CriterionTag::FurtherE:
            s.qv(1.0);
            s.jumps([](double x) {
                const double r = x / (1.0 + x);
                return r * r;
            });
            break;
        case CriterionTag::FurtherG:
            s.qv(1.0);
            s.compensated(FunctionTag::Entropy, 1.0);
            break;
    }
    return s.finish();
}

CadlagPath process_N(const CadlagPath& m) {
    require_above_minus_one(m);
    return reciprocal_log(m);
}

namespace {

CadlagPath finite_or_throw(const CriterionPath& c, const char* what) {
    if (c.divergence_time)
        fail(ErrorCode::CompensatorDiverges,
             std::string(what) + ": entropy compensator diverges at t=" + std::to_string(*c.divergence_time));
    return c.path;
}

}  // namespace

CadlagPath process_L(const CadlagPath& m, const CompensatorSpec& comp) {
    return finite_or_throw(criterion_path(CriterionSpec{CriterionTag::L}, m, comp), "L");
}

CadlagPath process_Aa(double a, const CadlagPath& m) {
    CriterionSpec s;
    s.tag = CriterionTag::Aa;
    s.a = a;
    return criterion_path(s, m, CompensatorSpec{}).path;
}

CadlagPath process_Ba(double a, const CadlagPath& m, const CompensatorSpec& comp) {
    CriterionSpec s;
    s.tag = CriterionTag::Ba;
    s.a = a;
    return finite_or_throw(criterion_path(s, m, comp), "B^a");
}

IdentityDeviation identity_check(double a, const CadlagPath& m0, const CompensatorSpec& comp) {
    const CadlagPath m = before_absorption(m0);
    const auto z = stoch_exp(m).exponential;
    CriterionSpec sa{CriterionTag::Aa, a};
    CriterionSpec sb{CriterionTag::Ba, a};
    const auto A = criterion_path(sa, m, comp);
    const auto B = criterion_path(sb, m, comp);
    const auto N = criterion_path(CriterionSpec{CriterionTag::N}, m, comp);
    const auto L = criterion_path(CriterionSpec{CriterionTag::L}, m, comp);

    std::set<double> times;
    for (double t : m.knot_times()) times.insert(t);
    for (double t : L.path.knot_times()) times.insert(t);
    for (double t : B.path.knot_times()) times.insert(t);
    std::vector<double> probes(times.begin(), times.end());
    const std::size_t knots = probes.size();
    for (std::size_t i = 0; i + 1 < knots; ++i) probes.push_back(0.5 * (probes[i] + probes[i + 1]));

    double end = m.domain_end();
    const bool open_end = m.explodes_within_horizon();
    const std::optional<double> tau0 = m.absorption_time();
    IdentityDeviation dev;
    for (double t : probes) {
        if (tau0 && t >= *tau0) continue;
        if (open_end ? t >= end : t > end) continue;
        const double log_z = z.log_abs_at(t);
        dev.max_dev_A = std::max(dev.max_dev_A, std::abs(A.value_at(t) - (log_z + (1.0 - a) * N.value_at(t))));
        if (L.finite_at(t) && B.finite_at(t))
            dev.max_dev_B = std::max(dev.max_dev_B, std::abs(B.value_at(t) - (log_z + (1.0 - a) * L.value_at(t))));
    }
    return dev;
}

namespace {

struct PathRecord {
    std::vector<double> values;
};

}  // namespace

CriterionVerdict evaluate_condition(const ModelSpec& model, const CriterionSpec& criterion,
                                    const StoppingFamily& family, std::size_t n_paths, std::uint64_t seed,
                                    const ConditionOptions& options) {
    if (family.rules.empty()) fail(ErrorCode::InvalidParameters, "stopping family is empty");
    if (n_paths == 0) fail(ErrorCode::InvalidParameters, "need at least one path");
    model.validate();
    const CompensatorSpec comp = compensator(model);
    const std::size_t r = family.rules.size();
    ExpOptions exp_options;
    exp_options.allow_signed = model.signed_exponential;

    const auto records = parallel_map<PathRecord>(n_paths, options.threads, [&](std::size_t i) {
        const auto sp = sample_path(model, seed, i);
        const auto pair = stoch_exp(sp.path, exp_options);
        const auto c = criterion_path(criterion, sp.path, comp);
        PathTrajectory path_view(sp.path);
        PathTrajectory criterion_view(c.path);
        RuleTargets targets{&path_view, &pair.exponential, &criterion_view};
        PathRecord rec;
        rec.values.resize(r);
        for (std::size_t k = 0; k < r; ++k) {
            const auto stop = evaluate_rule(family.rules[k], targets, model.horizon);
            if (pair.absorption_time && stop.time >= *pair.absorption_time) {
                rec.values[k] = 0.0;
                continue;
            }
            rec.values[k] = std::exp(c.value_at(stop.time));
        }
        return rec;
    });

    CriterionVerdict v;
    v.criterion = criterion.name();
    v.sup_estimate = -kInf;
    std::vector<double> column(n_paths);
    for (std::size_t k = 0; k < r; ++k) {
        RuleEstimate e;
        e.rule = describe(family.rules[k]);
        for (std::size_t i = 0; i < n_paths; ++i) {
            column[i] = records[i].values[k];
            if (!std::isfinite(column[i])) ++e.nonfinite;
        }
        const auto est = mean_estimate(column);
        e.n = n_paths;
        e.mean = e.nonfinite > 0 ? kInf : est.mean;
        e.se = e.nonfinite > 0 ? kInf : est.se;
        e.bootstrap_se = e.nonfinite > 0 ? kInf : bootstrap_se(column, options.bootstrap_resamples, seed, k);
        v.nonfinite_samples += e.nonfinite;
        if (e.mean > v.sup_estimate) {
            v.sup_estimate = e.mean;
            v.sup_rule = e.rule;
        }
        v.per_rule.push_back(e);
    }
    v.diverged = v.nonfinite_samples > 0;

    std::set<std::string> coarse;
    for (const auto& rule : family.coarsened().rules) coarse.insert(describe(rule));
    double coarse_sup = -kInf;
    double sup_se = 0.0;
    for (const auto& e : v.per_rule) {
        if (coarse.count(e.rule) && e.mean > coarse_sup) coarse_sup = e.mean;
        if (e.rule == v.sup_rule) sup_se = std::max(e.se, e.bootstrap_se);
    }
    v.bounded_flag = !v.diverged && v.sup_estimate <= 1.1 * coarse_sup + 4.0 * sup_se;
    v.notes = "estimates over a finite stopping family; the supremum is a lower bound";
    if (v.diverged) v.notes += "; diverged: " + std::to_string(v.nonfinite_samples) + " non-finite samples";
    return v;
}

}  // namespace lmconv
