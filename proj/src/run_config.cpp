#include "opsplit/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace opsplit {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw RunError(kExitConfig, "config: " + what); }

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) config_error("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& dst) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        config_error(std::string("bad value for '") + key + "': " + e.what());
    }
}

SpectralMode read_spectral(const json& obj) {
    std::string s = "rounded";
    read(obj, "spectral", s);
    if (s == "rounded") return SpectralMode::Rounded;
    if (s == "exact") return SpectralMode::Exact;
    config_error("spectral must be \"rounded\" or \"exact\"");
}

ExperimentSpec read_experiment(const json& root) {
    std::string name;
    read(root, "experiment", name);
    std::uint64_t seed = 1;
    read(root, "seed", seed);
    if (name == "fused-lasso") {
        FusedLassoSpec s;
        const json sec = root.value("fused_lasso", json::object());
        reject_unknown_keys(sec, {"m", "n", "mu1", "mu2", "noise_variance", "spectral"}, "fused_lasso");
        read(sec, "m", s.m);
        read(sec, "n", s.n);
        read(sec, "mu1", s.mu1);
        read(sec, "mu2", s.mu2);
        read(sec, "noise_variance", s.noise_variance);
        s.spectral = read_spectral(sec);
        s.seed = seed;
        return s;
    }
    if (name == "constrained-tv-ct") {
        CtSpec s;
        const json sec = root.value("constrained_tv_ct", json::object());
        reject_unknown_keys(sec, {"side", "views", "rays", "mu", "noise_variance", "tv", "spectral"}, "constrained_tv_ct");
        read(sec, "side", s.side);
        read(sec, "views", s.views);
        read(sec, "rays", s.rays);
        read(sec, "mu", s.mu);
        read(sec, "noise_variance", s.noise_variance);
        std::string tv = "iso";
        read(sec, "tv", tv);
        if (tv == "iso") s.tv = TvKind::Isotropic;
        else if (tv == "aniso") s.tv = TvKind::Anisotropic;
        else config_error("tv must be \"iso\" or \"aniso\"");
        s.spectral = read_spectral(sec);
        s.seed = seed;
        return s;
    }
    if (name == "lrtv-sr") {
        LrtvSpec s;
        const json sec = root.value("lrtv_sr", json::object());
        reject_unknown_keys(sec, {"rows", "cols", "blur_sigma", "factor", "lambda1", "lambda2", "spectral"}, "lrtv_sr");
        read(sec, "rows", s.rows);
        read(sec, "cols", s.cols);
        read(sec, "blur_sigma", s.blur_sigma);
        read(sec, "factor", s.factor);
        read(sec, "lambda1", s.lambda1);
        read(sec, "lambda2", s.lambda2);
        s.spectral = read_spectral(sec);
        s.seed = seed;
        return s;
    }
    config_error("unknown experiment '" + name + "'");
}

PresetChoice read_preset(const json& j) {
    PresetChoice p;
    if (j.is_string()) {
        p.label = j.get<std::string>();
        if (p.label == "type-I") p.base = PresetChoice::Base::TypeI;
        else if (p.label == "type-II") p.base = PresetChoice::Base::TypeII;
        else if (p.label == "imaging") p.base = PresetChoice::Base::Imaging;
        else config_error("unknown preset '" + p.label + "'");
        return p;
    }
    if (!j.is_object()) config_error("preset must be a name or an object");
    reject_unknown_keys(j, {"name", "base", "gamma", "lambda", "sigma", "tau"}, "preset");
    std::string base = "custom";
    read(j, "base", base);
    if (base == "type-I") p.base = PresetChoice::Base::TypeI;
    else if (base == "type-II") p.base = PresetChoice::Base::TypeII;
    else if (base == "imaging") p.base = PresetChoice::Base::Imaging;
    else if (base == "custom") p.base = PresetChoice::Base::Custom;
    else config_error("unknown preset base '" + base + "'");
    p.label = base;
    read(j, "name", p.label);
    auto opt = [&](const char* key, std::optional<double>& dst) {
        if (j.contains(key)) {
            double v = 0;
            read(j, key, v);
            if (!(v > 0)) config_error(std::string("preset ") + key + " must be positive");
            dst = v;
        }
    };
    opt("gamma", p.gamma);
    opt("lambda", p.lambda);
    opt("sigma", p.sigma);
    opt("tau", p.tau);
    if (p.label.empty() || p.label.find('/') != std::string::npos) config_error("preset name must be a plain non-empty name");
    return p;
}

}  // namespace

std::string default_config_text(std::string_view experiment) {
    json j;
    j["experiment"] = experiment;
    j["seed"] = 1;
    j["solvers"] = {"alg1", "alg2", "alg3", "alg4"};
    j["warm_start_dual"] = true;
    if (experiment == "fused-lasso") {
        j["fused_lasso"] = {{"m", 100}, {"n", 200}, {"mu1", 0.2}, {"mu2", 0.8}, {"noise_variance", 0.01},
                            {"spectral", "rounded"}};
        j["presets"] = {"type-I", "type-II"};
        j["inner_iters"] = {1};
        j["eps"] = {1e-4, 1e-8};
        j["max_outer"] = 5000;
    } else if (experiment == "constrained-tv-ct") {
        j["constrained_tv_ct"] = {{"side", 64}, {"views", 20}, {"rays", 96}, {"mu", 0.5}, {"noise_variance", 0.01},
                                  {"tv", "iso"}, {"spectral", "rounded"}};
        j["presets"] = {"imaging"};
        j["inner_iters"] = {1, 2, 10, 20};
        j["eps"] = {1e-6};
        j["max_outer"] = 5000;
    } else if (experiment == "lrtv-sr") {
        j["lrtv_sr"] = {{"rows", 32}, {"cols", 32}, {"blur_sigma", 1.0}, {"factor", 2}, {"lambda1", 0.01},
                        {"lambda2", 0.01}, {"spectral", "rounded"}};
        j["presets"] = {"imaging"};
        j["inner_iters"] = {10};
        j["eps"] = {1e-6};
        j["max_outer"] = 100000;
    } else {
        throw RunError(kExitConfig, "unknown experiment '" + std::string(experiment) +
                                        "' (expected fused-lasso, constrained-tv-ct or lrtv-sr)");
    }
    j["output_dir"] = "results/" + std::string(experiment);
    return j.dump(2) + "\n";
}

RunConfig parse_run_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_error(std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) config_error("top level must be an object");
    reject_unknown_keys(root,
                        {"experiment", "seed", "fused_lasso", "constrained_tv_ct", "lrtv_sr", "solvers", "presets",
                         "inner_iters", "eps", "max_outer", "warm_start_dual", "output_dir", "threads"},
                        "top level");
    RunConfig cfg;
    cfg.experiment = read_experiment(root);
    read(root, "solvers", cfg.solvers);
    read(root, "inner_iters", cfg.inner_iters);
    read(root, "eps", cfg.eps_list);
    read(root, "max_outer", cfg.max_outer);
    read(root, "warm_start_dual", cfg.warm_start_dual);
    read(root, "threads", cfg.threads);
    std::string out = cfg.output_dir.string();
    read(root, "output_dir", out);
    cfg.output_dir = out;
    if (root.contains("presets")) {
        if (!root["presets"].is_array()) config_error("presets must be a list");
        for (const auto& p : root["presets"]) cfg.presets.push_back(read_preset(p));
    }

    if (cfg.solvers.empty()) config_error("at least one solver is required");
    if (cfg.presets.empty()) config_error("at least one preset is required");
    if (cfg.eps_list.empty()) config_error("at least one eps value is required");
    for (double e : cfg.eps_list)
        if (!(e > 0)) config_error("eps values must be positive");
    for (int j : cfg.inner_iters)
        if (j < 1) config_error("inner_iters values must be at least 1");
    if (cfg.inner_iters.empty()) config_error("at least one inner_iters value is required");
    if (cfg.max_outer < 1) config_error("max_outer must be at least 1");
    if (cfg.threads < 0) config_error("threads must be nonnegative");
    std::set<std::string> labels;
    for (const auto& p : cfg.presets)
        if (!labels.insert(p.label).second) config_error("duplicate preset name '" + p.label + "'");
    for (const auto& s : cfg.solvers)
        if (!parse_solver_id(s)) throw RunError(kExitUnknownSolver, "unknown solver id '" + s + "'");
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RunError(kExitConfig, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

SolverConfig<double> resolve_solver_config(const RunConfig& cfg, const PresetChoice& preset, SolverId solver,
                                           const SplitProblem<double>& problem) {
    const double b_sq = problem.b_norm_sq();
    const bool lrtv = std::holds_alternative<LrtvSpec>(cfg.experiment);
    SolverConfig<double> c;
    std::optional<double> lambda, sigma, tau;
    switch (preset.base) {
        case PresetChoice::Base::TypeI:
        case PresetChoice::Base::TypeII: {
            c = SolverConfig<double>::from_preset(
                preset.base == PresetChoice::Base::TypeI ? ParamPreset::TypeI : ParamPreset::TypeII, problem);
            lambda = c.lambda;
            sigma = c.sigma;
            tau = c.tau;
            break;
        }
        case PresetChoice::Base::Imaging:
            lambda = 1.0 / b_sq;
            sigma = 1.0 / b_sq;
            tau = 1.0;
            break;
        case PresetChoice::Base::Custom:
            break;
    }
    const double lip = problem.f.lipschitz();
    c.gamma = preset.gamma.value_or(lrtv ? kLrtvGamma : (lip > 0 ? 1.9 / lip : 1.0));
    if (preset.lambda) lambda = preset.lambda;
    if (preset.sigma) sigma = preset.sigma;
    if (preset.tau) tau = preset.tau;

    auto pairing = [&](const std::string& what) {
        throw RunError(kExitInvalidPairing, "preset '" + preset.label + "' cannot drive solver '" +
                                                std::string(to_string(solver)) + "': " + what);
    };
    if (solver == SolverId::DavisYin) {
        if (problem.B.kind() != MapKind::Identity) pairing("davis-yin needs B = identity");
    } else if (uses_dual_step(solver)) {
        if (!lambda) pairing("no lambda given");
        c.lambda = *lambda;
    } else if (solver == SolverId::CondatVuTau1) {
        if (!sigma) pairing("no sigma given");
        c.sigma = *sigma;
        c.tau = 1.0;
    } else {
        if (!sigma || !tau) pairing("sigma and tau are both required");
        c.sigma = *sigma;
        c.tau = *tau;
    }
    c.max_outer = cfg.max_outer;
    c.warm_start_dual = cfg.warm_start_dual;
    return c;
}

}  // namespace opsplit
