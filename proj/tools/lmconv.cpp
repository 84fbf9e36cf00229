// Command-line front end of the lmconv library. Exit codes: 0 pass,
// 1 threshold failure, 2 configuration or input error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lmconv/criteria.hpp"
#include "lmconv/error.hpp"
#include "lmconv/follmer.hpp"
#include "lmconv/identities.hpp"
#include "lmconv/io.hpp"
#include "lmconv/lab.hpp"
#include "lmconv/models.hpp"
#include "lmconv/stochexp.hpp"
#include "lmconv/stopping.hpp"

namespace fs = std::filesystem;
using namespace lmconv;

namespace {

constexpr int kPass = 0;
constexpr int kThresholdFailure = 1;
constexpr int kConfigError = 2;

struct Global {
    std::uint64_t seed = 7;
    std::string out_dir;
    std::size_t threads = 1;
    std::string config_file;
    std::optional<Json> config;
};

/// Model sources in order of precedence: --model file, --preset, the config.
struct ModelSource {
    std::string model_file;
    std::string preset_id;
    double horizon = 0.0;
};

void add_model_options(CLI::App* cmd, ModelSource& src) {
    cmd->add_option("--model", src.model_file, "model JSON file");
    cmd->add_option("--preset", src.preset_id, "preset id");
    cmd->add_option("--horizon", src.horizon, "override the model horizon");
}

ModelSpec resolve_model(const ModelSource& src, const Global& g) {
    ModelSpec m;
    if (!src.model_file.empty()) {
        m = model_from_json(read_json_file(src.model_file));
    } else if (!src.preset_id.empty()) {
        m = preset(src.preset_id);
    } else if (g.config && g.config->contains("model")) {
        m = model_from_json((*g.config)["model"]);
    } else if (g.config && g.config->contains("preset")) {
        m = preset((*g.config)["preset"].get<std::string>());
    } else {
        fail(ErrorCode::ConfigError, "no model: pass --model, --preset or a config with model or preset");
    }
    if (src.horizon > 0.0) {
        m.horizon = src.horizon;
    } else if (g.config && g.config->contains("horizon") && src.model_file.empty() && src.preset_id.empty()) {
        m.horizon = (*g.config)["horizon"].get<double>();
    }
    m.validate();
    return m;
}

std::size_t resolve_paths(std::size_t flag, const Global& g, std::size_t fallback) {
    if (flag > 0) return flag;
    if (g.config && g.config->contains("n_paths")) return (*g.config)["n_paths"].get<std::size_t>();
    return fallback;
}

/// --out wins; otherwise the file goes to --out-dir when one is given.
std::optional<fs::path> output_file(const std::string& out, const Global& g, const std::string& name) {
    if (!out.empty()) return fs::path(out);
    if (!g.out_dir.empty()) {
        fs::create_directories(g.out_dir);
        return fs::path(g.out_dir) / name;
    }
    return std::nullopt;
}

void emit(const Json& j, const std::optional<fs::path>& file) {
    if (file) {
        if (file->has_parent_path()) fs::create_directories(file->parent_path());
        write_json_file(*file, j);
        std::cout << "wrote " << file->string() << '\n';
    } else {
        std::cout << j.dump(2) << '\n';
    }
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(ErrorCode::ConfigError, "not a number list: '" + text + "'");
        }
    }
    if (out.empty()) fail(ErrorCode::ConfigError, "empty number list");
    return out;
}

void print_checks(const std::vector<Check>& checks) {
    for (const auto& c : checks)
        std::cout << (c.pass ? "  ok   " : (c.gating ? "  FAIL " : "  info ")) << c.name << "  value=" << c.value
                  << " target=" << c.target << " tol=" << c.tolerance << '\n';
}

void print_report(const ExperimentReport& r) {
    std::cout << r.id << "  n=" << r.n_paths << "  seed=" << r.seed << "  " << (r.passed() ? "PASS" : "FAIL")
              << '\n';
    for (const auto& f : r.frequencies)
        std::cout << "  " << std::left << std::setw(36) << f.name << std::right << f.frequency.mean << " +- "
                  << f.frequency.se << '\n';
    for (const auto& c : r.confusion) std::cout << "  confusion " << c.event << "  diagonal=" << c.diagonal_mass() << '\n';
    print_checks(r.checks);
    for (const auto& w : r.warnings) std::cout << "  warning: " << w << '\n';
}

int finish_report(const ExperimentReport& r, const Global& g) {
    print_report(r);
    if (!g.out_dir.empty()) {
        write_report(r, g.out_dir);
        std::cout << "wrote " << (fs::path(g.out_dir) / "report.json").string() << '\n';
    }
    return r.passed() ? kPass : kThresholdFailure;
}

Json exponential_json(const ExponentialPath& z) {
    Json knots = Json::array();
    for (const auto& k : z.exp_knots())
        knots.push_back({{"time", k.time},
                         {"log_abs_left", k.log_left},
                         {"sign_left", k.sign_left},
                         {"log_abs", k.log_value},
                         {"sign", k.sign},
                         {"factor", k.factor}});
    Json j{{"horizon", z.horizon()}, {"knots", knots}};
    if (z.absorption_time()) j["absorption_time"] = *z.absorption_time();
    if (z.numeric_zero_time()) j["numeric_zero_time"] = *z.numeric_zero_time();
    return j;
}

/// A single interchange record or NDJSON with one record per line.
std::vector<CadlagPath> read_paths(const std::string& file) {
    std::ifstream in(file);
    if (!in) fail(ErrorCode::ConfigError, "cannot read " + file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::vector<CadlagPath> paths;
    const Json whole = Json::parse(text, nullptr, false);
    if (!whole.is_discarded()) {
        paths.push_back(path_from_json(whole));
        return paths;
    }
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos) paths.push_back(path_from_json(Json::parse(line)));
    return paths;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification of stochastic exponentials, their convergence events and the "
                 "Novikov-Kazamaki criteria."};
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    app.add_option("--seed", g.seed, "run seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for reports");
    app.add_option("--threads", g.threads, "worker threads, 0 for one per core")->capture_default_str();
    app.add_option("--config", g.config_file, "JSON config {model | preset, n_paths, horizon, ...}");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "sample paths as NDJSON records");
    ModelSource sim_src;
    std::size_t sim_n = 0;
    std::string sim_out;
    add_model_options(simulate, sim_src);
    simulate->add_option("--n", sim_n, "number of paths");
    simulate->add_option("--out", sim_out, "NDJSON output file");

    // exponential
    auto* exponential = app.add_subcommand("exponential", "stochastic exponential of a path file");
    std::string exp_path, exp_out;
    bool exp_signed = false;
    exponential->add_option("--path-file", exp_path, "path in the interchange format, or NDJSON from simulate")->required();
    exponential->add_option("--out", exp_out, "output file");
    exponential->add_flag("--signed", exp_signed, "allow jumps below -1");

    // verify-identities
    auto* verify = app.add_subcommand("verify-identities", "maximal deviations of the path identities");
    std::string suite = "all", verify_path;
    std::size_t verify_n = 1000;
    verify->add_option("--suite", suite, "reciprocal|pushforward|roundtrip|logtransform|lemma|all")
        ->check(CLI::IsMember({"reciprocal", "pushforward", "roundtrip", "logtransform", "lemma", "all"}))
        ->capture_default_str();
    verify->add_option("--n", verify_n, "random jump paths")->capture_default_str();
    verify->add_option("--path-file", verify_path, "check one path instead of random ones");

    // nk-check
    auto* nk = app.add_subcommand("nk-check", "Monte Carlo verdict of a Novikov-Kazamaki criterion");
    ModelSource nk_src;
    std::string nk_criterion = "Ba", nk_family = "default", nk_out;
    double nk_a = 0.5, nk_delta = 0.5, nk_cap = 1e6;
    std::size_t nk_n = 0;
    add_model_options(nk, nk_src);
    nk->add_option("--criterion", nk_criterion, "N, L, Aa, Ba, LM_A, LM_B, kazamaki_mu, ...")->capture_default_str();
    nk->add_option("--a", nk_a, "family parameter")->capture_default_str();
    nk->add_option("--delta", nk_delta, "jump floor of the Novikov-type exponent")->capture_default_str();
    nk->add_option("--family", nk_family, "default|coarse")
        ->check(CLI::IsMember({"default", "coarse"}))
        ->capture_default_str();
    nk->add_option("--cap", nk_cap, "estimates at or above the cap fail")->capture_default_str();
    nk->add_option("--n", nk_n, "number of paths");
    nk->add_option("--out", nk_out, "verdict file");

    // follmer-check
    auto* follmer = app.add_subcommand("follmer-check", "E_P[Z_sigma G] against E_Q[G 1{no explosion}]");
    ModelSource fo_src;
    std::string fo_sigma, fo_stat = "one", fo_out;
    std::size_t fo_n = 0;
    add_model_options(follmer, fo_src);
    follmer->add_option("--sigma", fo_sigma, "t=4, cross:Z>=4, cross:|X|>=2, cross:X<=c")->required();
    follmer->add_option("--stat", fo_stat, "one, indicator:X<=c, indicator:X>=c, box:a,b, logistic:s, cos:w")
        ->capture_default_str();
    follmer->add_option("--n", fo_n, "paths per side");
    follmer->add_option("--out", fo_out, "result file");

    // ui-probe
    auto* probe = app.add_subcommand("ui-probe", "truncated P-mass and Q-survival across horizons");
    ModelSource ui_src;
    std::string ui_horizons = "1,2,4,8,16", ui_out;
    double ui_level = 1024.0;
    std::size_t ui_n = 0;
    add_model_options(probe, ui_src);
    probe->add_option("--horizons", ui_horizons, "comma-separated horizons")->capture_default_str();
    probe->add_option("--level", ui_level, "Z reaching this level counts as explosion")->capture_default_str();
    probe->add_option("--n", ui_n, "paths per side");
    probe->add_option("--out", ui_out, "table file");

    // classify
    auto* classify = app.add_subcommand("classify", "event flags, confusion matrices and checks of an ensemble");
    ModelSource cl_src;
    std::size_t cl_n = 0;
    add_model_options(classify, cl_src);
    classify->add_option("--n", cl_n, "number of paths");

    // reproduce
    auto* reproduce_cmd = app.add_subcommand("reproduce", "rerun one registered example");
    std::string rp_id;
    std::size_t rp_n = 0;
    double rp_horizon = 0.0;
    bool rp_quick = false, rp_list = false;
    reproduce_cmd->add_option("example", rp_id, "example id");
    reproduce_cmd->add_option("--n", rp_n, "override the ensemble size");
    reproduce_cmd->add_option("--horizon", rp_horizon, "override the horizon");
    reproduce_cmd->add_flag("--quick", rp_quick, "battery-sized ensembles");
    reproduce_cmd->add_flag("--list", rp_list, "print the example ids");

    // battery
    app.add_subcommand("battery", "quick reproduction of every example");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }

    try {
        if (!g.config_file.empty()) g.config = read_json_file(g.config_file);
        std::cout << std::setprecision(6);

        if (simulate->parsed()) {
            const ModelSpec m = resolve_model(sim_src, g);
            const std::size_t n = resolve_paths(sim_n, g, 1000);
            const auto file = output_file(sim_out, g, "paths.ndjson");
            std::ofstream f;
            if (file) {
                if (file->has_parent_path()) fs::create_directories(file->parent_path());
                f.open(*file);
                if (!f) fail(ErrorCode::ConfigError, "cannot write " + file->string());
            }
            std::ostream& out = file ? static_cast<std::ostream&>(f) : std::cout;
            for (std::size_t i = 0; i < n; ++i) out << path_ndjson(sample_path(m, g.seed, i).path, i) << '\n';
            if (file) std::cout << "wrote " << n << " paths to " << file->string() << '\n';
            return kPass;
        }

        if (exponential->parsed()) {
            const auto paths = read_paths(exp_path);
            ExpOptions options;
            options.allow_signed = exp_signed;
            Json j = Json::array();
            for (const auto& x : paths) j.push_back(exponential_json(stoch_exp(x, options).exponential));
            emit(paths.size() == 1 ? j[0] : j, output_file(exp_out, g, "exponential.json"));
            return kPass;
        }

        if (verify->parsed()) {
            constexpr double kReciprocalTol = 1e-10, kLemmaTol = 1e-9, kExactTol = 1e-12, kLogTol = 1e-10;
            Json j;
            bool ok = true;
            auto report = [&](const char* name, double dev, double tol) {
                j[name] = {{"max_deviation", dev}, {"tolerance", tol}, {"pass", dev <= tol}};
                ok = ok && dev <= tol;
                std::cout << (dev <= tol ? "ok   " : "FAIL ") << std::left << std::setw(16) << name << std::right
                          << dev << " (tol " << tol << ")\n";
            };
            const bool all = suite == "all";
            if (!verify_path.empty()) {
                double reciprocal = 0.0, pushforward = 0.0, roundtrip = 0.0;
                for (const auto& x : read_paths(verify_path)) {
                    if (all || suite == "reciprocal") reciprocal = std::max(reciprocal, reciprocal_deviation(x));
                    if (all || suite == "pushforward") pushforward = std::max(pushforward, pushforward_deviation(x));
                    if (all || suite == "roundtrip") roundtrip = std::max(roundtrip, round_trip_deviation(x));
                }
                if (all || suite == "reciprocal") report("reciprocal", reciprocal, kReciprocalTol);
                if (all || suite == "pushforward") report("pushforward", pushforward, kExactTol);
                if (all || suite == "roundtrip") report("roundtrip", roundtrip, kExactTol);
                if (suite == "logtransform" || suite == "lemma")
                    fail(ErrorCode::ConfigError, "suite '" + suite + "' needs a compensator; run it without --path-file");
            } else {
                const auto r = identity_suite(verify_n, g.seed, 100, g.threads);
                if (all || suite == "reciprocal") report("reciprocal", r.reciprocal, kReciprocalTol);
                if (all || suite == "pushforward") report("pushforward", r.pushforward, kExactTol);
                if (all || suite == "roundtrip") report("roundtrip", r.round_trip, kExactTol);
                if (all || suite == "logtransform") {
                    report("log-jump", r.atom_log_jump, kExactTol);
                    report("exp-log", r.qlc_log_transform, kLogTol);
                }
                if (all || suite == "lemma")
                    for (std::size_t k = 0; k < r.a_values.size(); ++k) {
                        std::ostringstream a;
                        a << r.a_values[k];
                        report(("lemma-A[a=" + a.str() + "]").c_str(), r.lemma[k].max_dev_A, kLemmaTol);
                        report(("lemma-B[a=" + a.str() + "]").c_str(), r.lemma[k].max_dev_B, kLemmaTol);
                    }
            }
            if (!g.out_dir.empty()) emit(j, output_file("", g, "identities.json"));
            return ok ? kPass : kThresholdFailure;
        }

        if (nk->parsed()) {
            const bool custom = !nk_src.model_file.empty() || !nk_src.preset_id.empty() ||
                                (g.config && (g.config->contains("model") || g.config->contains("preset")));
            if (!custom) {
                // Without a model: the two-point steps against the exact oracle.
                NkCheckOptions o;
                o.seed = g.seed;
                o.threads = g.threads;
                if (nk_n > 0) o.criterion_paths = o.probe_paths = nk_n;
                const auto r = nk_check(o);
                print_checks(r.checks);
                Json j = r.verdicts;
                Json checks = Json::array();
                for (const auto& c : r.checks)
                    checks.push_back({{"name", c.name}, {"value", c.value}, {"target", c.target},
                                      {"tolerance", c.tolerance}, {"pass", c.pass}});
                j["checks"] = checks;
                if (!nk_out.empty() || !g.out_dir.empty()) emit(j, output_file(nk_out, g, "nk-check.json"));
                return r.passed() ? kPass : kThresholdFailure;
            }
            const ModelSpec m = resolve_model(nk_src, g);
            const CriterionSpec spec = CriterionSpec::parse(nk_criterion, nk_a, nk_delta);
            StoppingFamily family = StoppingFamily::default_family(m.horizon);
            if (nk_family == "coarse") family = family.coarsened();
            ConditionOptions options;
            options.threads = g.threads;
            const auto v = evaluate_condition(m, spec, family, resolve_paths(nk_n, g, 10000), g.seed, options);
            const bool ok = !v.diverged && v.sup_estimate < nk_cap;
            std::cout << v.criterion << "  sup=" << v.sup_estimate << " at " << v.sup_rule
                      << "  bounded=" << v.bounded_flag << "  diverged=" << v.diverged << "  "
                      << (ok ? "below cap" : "not below cap") << '\n';
            emit(verdict_json(v), output_file(nk_out, g, "verdict.json"));
            return ok ? kPass : kThresholdFailure;
        }

        if (follmer->parsed()) {
            const ModelSpec m = resolve_model(fo_src, g);
            const auto pair = tilt_model(m);
            const auto rule = parse_rule(fo_sigma);
            const auto stat = Statistic::parse(fo_stat);
            const auto d = duality_check(pair, rule, stat, resolve_paths(fo_n, g, 100000), g.seed, g.threads);
            std::cout << "E_P[Z_sigma G] = " << d.lhs.mean << " +- " << d.lhs.se << "\nE_Q[G; no explosion] = "
                      << d.rhs.mean << " +- " << d.rhs.se << "\nz = " << d.z_score
                      << (d.consistent ? "  consistent" : "  inconsistent") << '\n';
            if (!fo_out.empty() || !g.out_dir.empty())
                emit(duality_json(d, describe(rule), stat.describe(), m.horizon),
                     output_file(fo_out, g, "follmer.json"));
            return d.consistent ? kPass : kThresholdFailure;
        }

        if (probe->parsed()) {
            const ModelSpec m = resolve_model(ui_src, g);
            const auto t = ui_probe(m, parse_list(ui_horizons), resolve_paths(ui_n, g, 10000), g.seed, ui_level,
                                    g.threads);
            std::cout << "horizon  E_P[Z_T]  E_P[Z_T; max Z < level]  Q(max Z < level)\n";
            for (const auto& r : t.rows)
                std::cout << r.horizon << "  " << r.p_mean.mean << "  " << r.p_truncated.mean << " +- "
                          << r.p_truncated.se << "  " << r.q_survival.mean << " +- " << r.q_survival.se << '\n';
            std::cout << "trend: " << t.trend << '\n';
            if (!ui_out.empty() || !g.out_dir.empty()) emit(ui_json(t), output_file(ui_out, g, "ui-probe.json"));
            return kPass;
        }

        if (classify->parsed()) {
            Json config = g.config ? *g.config : Json::object();
            if (!cl_src.model_file.empty()) {
                config.erase("preset");
                config["model"] = read_json_file(cl_src.model_file);
            } else if (!cl_src.preset_id.empty()) {
                config.erase("model");
                config["preset"] = cl_src.preset_id;
            }
            if (cl_src.horizon > 0.0) {
                if (config.contains("model")) {
                    config["model"]["horizon"] = cl_src.horizon;
                } else {
                    fail(ErrorCode::ConfigError, "--horizon changes a preset's horizon; use a model file instead");
                }
            }
            if (cl_n > 0) config["n_paths"] = cl_n;
            if (!config.contains("seed")) config["seed"] = g.seed;
            return finish_report(run_experiment(config, g.threads), g);
        }

        if (reproduce_cmd->parsed()) {
            if (rp_list) {
                for (const auto& id : example_ids()) std::cout << id << '\n';
                return kPass;
            }
            if (rp_id.empty()) fail(ErrorCode::ConfigError, "reproduce needs an example id (see --list)");
            ReproduceOverrides o;
            if (rp_n > 0) o.n_paths = rp_n;
            if (rp_horizon > 0.0) o.horizon = rp_horizon;
            o.seed = g.seed;
            o.threads = g.threads;
            o.quick = rp_quick;
            if (g.config && g.config->contains("tolerances"))
                o.tolerances = Tolerances::from_json((*g.config)["tolerances"]);
            return finish_report(reproduce(rp_id, o), g);
        }

        // battery
        const fs::path dir = g.out_dir.empty() ? fs::path("battery-report") : fs::path(g.out_dir);
        const auto result = run_battery(g.seed, g.threads, dir);
        for (const auto& r : result.reports) {
            std::cout << (r.passed() ? "PASS " : "FAIL ") << r.id << '\n';
            for (const auto& c : r.checks)
                if (c.gating && !c.pass) std::cout << "     failed: " << c.name << '\n';
        }
        std::cout << "reports in " << dir.string() << '\n';
        return result.passed() ? kPass : kThresholdFailure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error [ConfigError]: " << e.what() << '\n';
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
}
