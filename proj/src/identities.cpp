#include "lmconv/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmconv/ensemble.hpp"
#include "lmconv/error.hpp"
#include "lmconv/models.hpp"
#include "lmconv/rng.hpp"
#include "lmconv/stochexp.hpp"

namespace lmconv {
namespace {

double draw_size(Substream& rng, const JumpCaseOptions& o) {
    const double u = rng.uniform();
    if (rng.uniform() < 0.5) return o.lo * u;
    return o.hi * u;
}

double jump_at(const CadlagPath& p, double t) {
    const auto& js = p.jumps();
    const auto it = std::lower_bound(js.begin(), js.end(), t, [](const JumpEvent& j, double s) { return j.time < s; });
    return (it != js.end() && it->time == t) ? it->size : 0.0;
}

}  // namespace

JumpCase random_jump_case(std::uint64_t seed, std::uint64_t index, const JumpCaseOptions& o) {
    if (o.max_jumps < 1 || !(o.lo > -1.0) || !(o.lo < 0.0) || !(o.hi > 0.0) || !(o.horizon > 0.0))
        fail(ErrorCode::InvalidParameters, "jump case needs max_jumps >= 1 and lo in (-1, 0) < hi");
    Substream rng(seed, index, StreamId::Auxiliary);
    const int count = 1 + static_cast<int>(rng.uniform() * o.max_jumps);
    std::vector<double> times;
    while (static_cast<int>(times.size()) < count) {
        const double t = o.horizon * rng.uniform();
        if (std::find(times.begin(), times.end(), t) == times.end()) times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    PathBuilder b(o.horizon);
    JumpCase c;
    for (double t : times) {
        const double size = draw_size(rng, o);
        b.add_jump(t, size);
        Atom atom;
        atom.time = t;
        atom.points = {AtomPoint{size, 0.5}, AtomPoint{draw_size(rng, o), 0.5}};
        c.comp.atoms.push_back(atom);
    }
    c.path = b.build();
    return c;
}

double reciprocal_deviation(const CadlagPath& m) {
    const auto zm = stoch_exp(m).exponential;
    const auto zn = stoch_exp(reciprocal_log(m)).exponential;
    double worst = 0.0;
    for (const auto& k : zm.exp_knots()) {
        const double left = zm.left_limit(k.time) * zn.left_limit(k.time);
        const double value = zm.value_at(k.time) * zn.value_at(k.time);
        worst = std::max({worst, std::abs(left - 1.0), std::abs(value - 1.0)});
    }
    return worst;
}

double pushforward_deviation(const CadlagPath& m) {
    double worst = 0.0;
    for (auto tag : {FunctionTag::Identity, FunctionTag::Square, FunctionTag::Log1p, FunctionTag::XmLog}) {
        const auto f = TestFunction::of(tag);
        for (const auto& j : m.jumps()) {
            const auto [lhs, rhs] = pushforward_check(m, f, j.time);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        }
    }
    return worst;
}

double round_trip_deviation(const CadlagPath& x) {
    const CadlagPath back = stoch_log(stoch_exp(x).exponential);
    double worst = 0.0;
    for (const auto& k : knot_values(x)) {
        worst = std::max(worst, std::abs(value_at(back, k.time) - k.value));
        if (k.time > 0.0) worst = std::max(worst, std::abs(left_limit(back, k.time) - k.left));
    }
    return worst;
}

double atom_log_jump_deviation(const CadlagPath& x, const CompensatorSpec& comp) {
    const auto lt = log_transform(x, comp);
    double worst = 0.0;
    for (const auto& j : x.jumps()) {
        const double expected = std::log1p(j.size) + gamma_process(comp, j.time);
        worst = std::max(worst, std::abs(jump_at(lt.y, j.time) - expected));
    }
    return worst;
}

double exp_log_transform_deviation(const CadlagPath& x, const CompensatorSpec& comp) {
    const auto lt = log_transform(x, comp);
    const auto z = stoch_exp(x).exponential;
    const double end = z.absorption_time() ? *z.absorption_time() : std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const auto& k : z.exp_knots()) {
        if (k.time >= end) break;
        const double y_minus_v = value_at(lt.y, k.time) - value_at(lt.v, k.time);
        worst = std::max(worst, std::abs(std::expm1(y_minus_v - k.log_value)));
        if (k.time > 0.0) {
            const double left = left_limit(lt.y, k.time) - left_limit(lt.v, k.time);
            worst = std::max(worst, std::abs(std::expm1(left - k.log_left)));
        }
    }
    return worst;
}

IdentitySuiteResult identity_suite(std::size_t n_paths, std::uint64_t seed, std::size_t qlc_paths,
                                   std::size_t threads) {
    IdentitySuiteResult r;
    r.n_paths = n_paths;
    r.a_values = {-1.0, 0.0, 0.5, 2.0};
    struct Row {
        double reciprocal = 0.0, pushforward = 0.0, round_trip = 0.0, atom = 0.0;
        std::vector<IdentityDeviation> lemma;
    };
    const auto rows = parallel_map<Row>(n_paths, threads, [&](std::size_t i) {
        const auto c = random_jump_case(seed, i);
        Row row;
        row.reciprocal = reciprocal_deviation(c.path);
        row.pushforward = pushforward_deviation(c.path);
        row.round_trip = round_trip_deviation(c.path);
        row.atom = atom_log_jump_deviation(c.path, c.comp);
        for (double a : r.a_values) row.lemma.push_back(identity_check(a, c.path, c.comp));
        return row;
    });
    r.lemma.assign(r.a_values.size(), IdentityDeviation{});
    for (const auto& row : rows) {
        r.reciprocal = std::max(r.reciprocal, row.reciprocal);
        r.pushforward = std::max(r.pushforward, row.pushforward);
        r.round_trip = std::max(r.round_trip, row.round_trip);
        r.atom_log_jump = std::max(r.atom_log_jump, row.atom);
        for (std::size_t k = 0; k < row.lemma.size(); ++k) {
            r.lemma[k].max_dev_A = std::max(r.lemma[k].max_dev_A, row.lemma[k].max_dev_A);
            r.lemma[k].max_dev_B = std::max(r.lemma[k].max_dev_B, row.lemma[k].max_dev_B);
        }
    }
    for (const char* id : {"ex-6.4", "ex-6.3-2", "ex-6.6", "bm"}) {
        const ModelSpec m = preset(id);
        const CompensatorSpec comp = compensator(m);
        const auto devs = parallel_map<double>(qlc_paths, threads, [&](std::size_t i) {
            return exp_log_transform_deviation(sample_path(m, seed, i).path, comp);
        });
        for (double d : devs) r.qlc_log_transform = std::max(r.qlc_log_transform, d);
    }
    return r;
}

}  // namespace lmconv
