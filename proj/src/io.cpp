#include "lmconv/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lmconv/error.hpp"

namespace lmconv {
namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    fail(ErrorCode::ConfigError, where + ": " + what);
}

void only_fields(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) bad(where, "expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) bad(where, "unknown field '" + key + "'");
}

double number(const Json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    return j.get<double>();
}

std::string text(const Json& j, const std::string& where) {
    if (!j.is_string()) bad(where, "expected a string");
    return j.get<std::string>();
}

bool flag(const Json& j, const std::string& where) {
    if (!j.is_boolean()) bad(where, "expected true or false");
    return j.get<bool>();
}

template <class F>
void optional_field(const Json& j, const char* key, const std::string& where, F&& apply) {
    if (j.contains(key)) apply(j.at(key), where + "." + key);
}

AtomPoint point_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) bad(where, "expected [size, mass]");
    return AtomPoint{number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

void apply_fields(ModelSpec& m, const Json& j, const std::string& where);

ModelSpec component_from_json(const Json& j, const std::string& where) {
    ModelSpec m;
    if (!j.contains("kind")) bad(where, "missing field 'kind'");
    apply_fields(m, j, where);
    return m;
}

void apply_fields(ModelSpec& m, const Json& j, const std::string& where) {
    only_fields(j, where, {"preset", "kind", "horizon", "walk", "cox", "steps", "diffusion", "series", "components",
                           "limsup_level", "epsilon", "description", "expanded"});
    optional_field(j, "kind", where, [&](const Json& v, const std::string& w) {
        try {
            m.kind = parse_model_kind(text(v, w));
        } catch (const Error& e) {
            bad(w, e.what());
        }
    });
    optional_field(j, "horizon", where, [&](const Json& v, const std::string& w) { m.horizon = number(v, w); });
    optional_field(j, "limsup_level", where, [&](const Json& v, const std::string& w) { m.limsup_level = number(v, w); });
    optional_field(j, "epsilon", where, [&](const Json& v, const std::string& w) { m.epsilon = number(v, w); });
    optional_field(j, "description", where, [&](const Json& v, const std::string& w) { m.description = text(v, w); });
    optional_field(j, "walk", where, [&](const Json& v, const std::string& w) {
        only_fields(v, w, {"sizes", "size_scale", "zero_first", "explicit_sizes", "probabilities", "explicit_exponents"});
        auto& p = m.walk;
        optional_field(v, "sizes", w, [&](const Json& x, const std::string& ww) { p.sizes = text(x, ww); });
        optional_field(v, "size_scale", w, [&](const Json& x, const std::string& ww) { p.size_scale = number(x, ww); });
        optional_field(v, "zero_first", w, [&](const Json& x, const std::string& ww) { p.zero_first = flag(x, ww); });
        optional_field(v, "probabilities", w, [&](const Json& x, const std::string& ww) { p.probabilities = text(x, ww); });
        optional_field(v, "explicit_sizes", w, [&](const Json& x, const std::string& ww) {
            if (!x.is_array()) bad(ww, "expected an array");
            p.explicit_sizes.clear();
            for (std::size_t i = 0; i < x.size(); ++i) p.explicit_sizes.push_back(number(x[i], ww));
        });
        optional_field(v, "explicit_exponents", w, [&](const Json& x, const std::string& ww) {
            if (!x.is_array()) bad(ww, "expected an array");
            p.explicit_exponents.clear();
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (!x[i].is_number_integer()) bad(ww, "expected integers");
                p.explicit_exponents.push_back(x[i].get<int>());
            }
        });
    });
    optional_field(j, "cox", where, [&](const Json& v, const std::string& w) {
        only_fields(v, w, {"family", "scale", "decay", "mark", "mark_scale", "compensated"});
        auto& c = m.cox;
        optional_field(v, "family", w, [&](const Json& x, const std::string& ww) {
            const double ms = c.rate.mark_scale;
            try {
                c.rate = CoxRate::named(text(x, ww));
            } catch (const Error& e) {
                bad(ww, e.what());
            }
            c.rate.mark_scale = ms;
        });
        optional_field(v, "scale", w, [&](const Json& x, const std::string& ww) { c.rate.scale = number(x, ww); });
        optional_field(v, "decay", w, [&](const Json& x, const std::string& ww) { c.rate.decay = number(x, ww); });
        optional_field(v, "mark", w, [&](const Json& x, const std::string& ww) { c.rate.mark_value = number(x, ww); });
        optional_field(v, "mark_scale", w, [&](const Json& x, const std::string& ww) { c.rate.mark_scale = number(x, ww); });
        optional_field(v, "compensated", w, [&](const Json& x, const std::string& ww) { c.compensated = flag(x, ww); });
    });
    optional_field(j, "steps", where, [&](const Json& v, const std::string& w) {
        only_fields(v, w, {"family", "laws"});
        optional_field(v, "family", w, [&](const Json& x, const std::string& ww) { m.steps.family = text(x, ww); });
        optional_field(v, "laws", w, [&](const Json& x, const std::string& ww) {
            if (!x.is_array()) bad(ww, "expected an array");
            m.steps.laws.clear();
            for (std::size_t i = 0; i < x.size(); ++i) {
                const std::string wl = ww + "[" + std::to_string(i) + "]";
                only_fields(x[i], wl, {"points", "heavy_mass"});
                StepLaw law;
                optional_field(x[i], "heavy_mass", wl, [&](const Json& h, const std::string& wh) { law.heavy_mass = number(h, wh); });
                optional_field(x[i], "points", wl, [&](const Json& pts, const std::string& wp) {
                    if (!pts.is_array()) bad(wp, "expected an array");
                    for (std::size_t k = 0; k < pts.size(); ++k)
                        law.points.push_back(point_from_json(pts[k], wp + "[" + std::to_string(k) + "]"));
                });
                m.steps.laws.push_back(std::move(law));
            }
        });
    });
    optional_field(j, "diffusion", where, [&](const Json& v, const std::string& w) {
        only_fields(v, w, {"qv_rate", "drift", "step", "start"});
        auto& d = m.diffusion;
        optional_field(v, "qv_rate", w, [&](const Json& x, const std::string& ww) { d.qv_rate = number(x, ww); });
        optional_field(v, "drift", w, [&](const Json& x, const std::string& ww) { d.drift = number(x, ww); });
        optional_field(v, "step", w, [&](const Json& x, const std::string& ww) { d.step = number(x, ww); });
        optional_field(v, "start", w, [&](const Json& x, const std::string& ww) { d.start = number(x, ww); });
    });
    optional_field(j, "series", where, [&](const Json& v, const std::string& w) {
        only_fields(v, w, {"sizes"});
        optional_field(v, "sizes", w, [&](const Json& x, const std::string& ww) { m.series.sizes = text(x, ww); });
    });
    optional_field(j, "components", where, [&](const Json& v, const std::string& w) {
        if (!v.is_array()) bad(w, "expected an array");
        m.components.clear();
        for (std::size_t i = 0; i < v.size(); ++i)
            m.components.push_back(component_from_json(v[i], w + "[" + std::to_string(i) + "]"));
    });
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json sanitize(const Json& j) {
    if (j.is_number_float()) return finite_or_null(j.get<double>());
    if (j.is_array() || j.is_object()) {
        Json out = j;
        for (auto& v : out) v = sanitize(v);
        return out;
    }
    return j;
}

}  // namespace

ModelSpec model_from_json(const Json& j) {
    if (!j.is_object()) bad("model", "expected an object");
    ModelSpec m;
    if (j.contains("preset")) {
        try {
            m = preset(text(j.at("preset"), "model.preset"));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ConfigError) throw;
            bad("model.preset", e.what());
        }
        if (j.contains("kind")) bad("model.kind", "a preset fixes the model kind");
    } else if (!j.contains("kind")) {
        bad("model", "needs 'preset' or 'kind'");
    }
    apply_fields(m, j, "model");
    m.signed_exponential = !m.jumps_above_minus_one() && m.kind != ModelKind::DeterministicSeries;
    try {
        m.validate();
    } catch (const Error& e) {
        bad("model", e.what());
    }
    return m;
}

Json model_to_json(const ModelSpec& m) {
    Json j;
    if (!m.preset_id.empty()) j["preset"] = m.preset_id;
    j["kind"] = model_kind_name(m.kind);
    j["horizon"] = m.horizon;
    if (!m.description.empty()) j["description"] = m.description;
    switch (m.kind) {
        case ModelKind::RandomWalkLargeJumps: {
            Json w;
            w["sizes"] = m.walk.sizes;
            w["size_scale"] = m.walk.size_scale;
            w["zero_first"] = m.walk.zero_first;
            w["probabilities"] = m.walk.probabilities;
            if (!m.walk.explicit_sizes.empty()) w["explicit_sizes"] = m.walk.explicit_sizes;
            if (!m.walk.explicit_exponents.empty()) w["explicit_exponents"] = m.walk.explicit_exponents;
            j["walk"] = w;
            break;
        }
        case ModelKind::CoxOneJump: {
            Json c;
            c["family"] = m.cox.rate.name();
            if (m.cox.rate.family == CoxFamily::ExpConst) {
                c["scale"] = m.cox.rate.scale;
                c["decay"] = m.cox.rate.decay;
                c["mark"] = m.cox.rate.mark_value;
            }
            c["mark_scale"] = m.cox.rate.mark_scale;
            c["compensated"] = m.cox.compensated;
            j["cox"] = c;
            break;
        }
        case ModelKind::DiscreteDensitySteps: {
            Json s;
            s["family"] = m.steps.family;
            Json laws = Json::array();
            for (const auto& law : m.steps.laws) {
                Json l;
                Json pts = Json::array();
                for (const auto& p : law.points) pts.push_back({p.true_size(), p.true_mass()});
                l["points"] = pts;
                if (law.heavy_mass > 0.0) l["heavy_mass"] = law.heavy_mass;
                laws.push_back(l);
            }
            s["laws"] = laws;
            j["steps"] = s;
            break;
        }
        case ModelKind::GridDiffusion:
            j["diffusion"] = {{"qv_rate", m.diffusion.qv_rate},
                              {"drift", m.diffusion.drift},
                              {"step", m.diffusion.step},
                              {"start", m.diffusion.start}};
            break;
        case ModelKind::Composite: {
            Json cs = Json::array();
            for (const auto& c : m.components) {
                Json cj = model_to_json(c);
                cj.erase("horizon");
                cs.push_back(cj);
            }
            j["components"] = cs;
            break;
        }
        case ModelKind::DeterministicSeries: j["series"] = {{"sizes", m.series.sizes}}; break;
    }
    if (m.limsup_level) j["limsup_level"] = *m.limsup_level;
    if (m.epsilon) j["epsilon"] = *m.epsilon;
    if (!m.preset_id.empty()) {
        // A preset is reproduced from its id; the expanded fields are informative.
        Json out;
        out["preset"] = m.preset_id;
        out["horizon"] = m.horizon;
        out["expanded"] = j;
        return out;
    }
    return j;
}

Json read_json_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail(ErrorCode::ConfigError, "cannot open '" + file.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ConfigError, file.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& file, const Json& j) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) fail(ErrorCode::ConfigError, "cannot write '" + file.string() + "'");
    out << sanitize(j).dump(2) << '\n';
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) fail(ErrorCode::ConfigError, "cannot write '" + file.string() + "'");
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << fields[i];
        }
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
}

Json path_to_json(const CadlagPath& path) {
    Json j;
    j["initial"] = path.initial();
    j["horizon"] = path.horizon();
    Json jumps = Json::array();
    for (const auto& e : path.jumps()) jumps.push_back({e.time, e.size});
    j["jumps"] = jumps;
    Json drift = Json::array();
    for (const auto& s : path.drift()) drift.push_back({s.t0, s.t1, s.rate});
    j["drift"] = drift;
    j["diffusion_qv_rate"] = path.diffusion_qv_rate();
    if (path.diffusion_start() != 0.0) j["diffusion_start"] = path.diffusion_start();
    if (const auto& g = path.data().diffusion_samples)
        j["diffusion_samples"] = {{"start", g->start}, {"step", g->step}, {"increments", g->increments}};
    if (path.absorption_time()) j["absorption_time"] = *path.absorption_time();
    if (path.explosion_time()) j["explosion_time"] = *path.explosion_time();
    return sanitize(j);
}

CadlagPath path_from_json(const Json& j) {
    const std::string where = "path";
    if (!j.is_object()) fail(ErrorCode::ConfigError, where + ": expected an object");
    only_fields(j, where, {"initial", "horizon", "jumps", "drift", "diffusion_qv_rate", "diffusion_start",
                           "diffusion_samples", "absorption_time", "explosion_time", "index", "terminal"});
    PathData d;
    optional_field(j, "initial", where, [&](const Json& v, const std::string& w) { d.initial = number(v, w); });
    if (!j.contains("horizon")) fail(ErrorCode::ConfigError, where + ": missing field 'horizon'");
    d.horizon = number(j["horizon"], where + ".horizon");
    auto tuples = [&](const char* key, std::size_t width, auto&& take) {
        optional_field(j, key, where, [&](const Json& v, const std::string& w) {
            if (!v.is_array()) fail(ErrorCode::ConfigError, w + ": expected an array");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string wi = w + "[" + std::to_string(i) + "]";
                if (!v[i].is_array() || v[i].size() != width)
                    fail(ErrorCode::ConfigError, wi + ": expected " + std::to_string(width) + " numbers");
                std::vector<double> xs;
                for (const auto& x : v[i]) xs.push_back(number(x, wi));
                take(xs);
            }
        });
    };
    tuples("jumps", 2, [&](const std::vector<double>& x) { d.jumps.push_back({x[0], x[1]}); });
    tuples("drift", 3, [&](const std::vector<double>& x) { d.drift.push_back({x[0], x[1], x[2]}); });
    optional_field(j, "diffusion_qv_rate", where,
                   [&](const Json& v, const std::string& w) { d.diffusion_qv_rate = number(v, w); });
    optional_field(j, "diffusion_start", where,
                   [&](const Json& v, const std::string& w) { d.diffusion_start = number(v, w); });
    optional_field(j, "diffusion_samples", where, [&](const Json& v, const std::string& w) {
        only_fields(v, w, {"start", "step", "increments"});
        DiffusionGrid g;
        optional_field(v, "start", w, [&](const Json& x, const std::string& ww) { g.start = number(x, ww); });
        optional_field(v, "step", w, [&](const Json& x, const std::string& ww) { g.step = number(x, ww); });
        optional_field(v, "increments", w, [&](const Json& x, const std::string& ww) {
            if (!x.is_array()) fail(ErrorCode::ConfigError, ww + ": expected an array");
            for (const auto& e : x) g.increments.push_back(number(e, ww));
        });
        d.diffusion_samples = g;
    });
    optional_field(j, "absorption_time", where,
                   [&](const Json& v, const std::string& w) { d.absorption_time = number(v, w); });
    optional_field(j, "explosion_time", where,
                   [&](const Json& v, const std::string& w) { d.explosion_time = number(v, w); });
    try {
        return CadlagPath(std::move(d));
    } catch (const Error& e) {
        fail(ErrorCode::ConfigError, where + ": " + e.what());
    }
}

std::string path_ndjson(const CadlagPath& path, std::uint64_t index) {
    Json j;
    j["index"] = index;
    j.update(path_to_json(path));
    if (!path.explodes_within_horizon()) j["terminal"] = value_at(path, path.domain_end());
    return sanitize(j).dump();
}

}  // namespace lmconv
