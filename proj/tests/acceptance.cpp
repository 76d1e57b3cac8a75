// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "opsplit/linear_map.hpp"
#include "opsplit/problems.hpp"
#include "opsplit/prox.hpp"
#include "opsplit/reference.hpp"
#include "opsplit/solvers.hpp"
#include "opsplit/verify.hpp"

using namespace opsplit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
    char buf[1024];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

double iterate_gap(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b, std::size_t shift = 0) {
    double worst = 0;
    for (std::size_t k = 0; k + shift < a.size() && k < b.size(); ++k)
        worst = std::max(worst, (a[k + shift] - b[k]).cwiseAbs().maxCoeff());
    return worst;
}

SolverConfig<double> fixed_run(const SplitProblem<double>& p, ParamPreset preset, int iterations) {
    auto c = SolverConfig<double>::from_preset(preset, p);
    c.max_outer = iterations;
    c.outer_eps = 1e-300;
    c.keep_iterates = true;
    return c;
}

// 1. exact-arithmetic identities between solver pairs
Outcome identities() {
    const int iters = 120;
    std::map<std::string, double> worst;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto p = build_fused_lasso(30, 60, 0.2, 0.8, 0.01, seed);
        for (ParamPreset preset : {ParamPreset::TypeI, ParamPreset::TypeII}) {
            const auto c = fixed_run(p, preset, iters);
            auto track = [&](const std::string& name, double gap) { worst[name] = std::max(worst[name], gap); };
            track("alg1=pdfp", iterate_gap(solve_alg1_dual_fbs(p, c).iterates, solve_pdfp(p, c).iterates));
            track("alg3=pd3o", iterate_gap(solve_alg3_dual_three_op(p, c).iterates, solve_pd3o(p, c).iterates));
            track("alg4=new", iterate_gap(solve_alg4_pd_three_op(p, c).iterates, solve_new_scheme(p, c).iterates));
            track("alg2=condat-vu",
                  iterate_gap(solve_alg2_pd_fbs(p, c).iterates, solve_condat_vu(p, condat_vu_steps_from_alg2(c)).iterates));

            // B = I with lambda = 1
            const SplitProblem<double> q{p.f, p.g, make_l1(0.8), make_identity<double>(60), 1.0,
                                         std::nullopt, std::nullopt, std::nullopt};
            auto cq = fixed_run(q, preset, iters);
            cq.lambda = 1.0;
            track("pd3o=davis-yin", iterate_gap(solve_pd3o(q, cq).iterates, solve_davis_yin(q, cq).iterates));

            // PDFP from x0 = 0, y0 = 0 against PD3O from z0 = x0 - gamma grad f(x0) - gamma B^T y0
            const auto pdfp = solve_pdfp(p, c);
            auto cm = c;
            const VectorXd x0 = VectorXd::Zero(p.dim());
            cm.initial_shadow = VectorXd(x0 - c.gamma * p.f.gradient(x0));
            const auto pd3o = solve_pd3o(p, cm);
            track("pdfp=pd3o", std::min(iterate_gap(pdfp.iterates, pd3o.iterates),
                                        iterate_gap(pdfp.iterates, pd3o.iterates, 1)));
        }
    }
    Outcome o{true, ""};
    for (const auto& [name, gap] : worst) {
        o.pass = o.pass && gap < 1e-12;
        o.detail += fmt("%s %.2e; ", name.c_str(), gap);
    }
    return o;
}

// 2. Moreau and conjugate-scaling identities against closed-form conjugate proxes
Outcome moreau_scaling() {
    Rng rng(20);
    double moreau = 0, scaling = 0;
    int kinds = 0;
    for (auto [rows, cols] : {std::pair{2, 3}, std::pair{4, 4}}) {
        for (const auto& [name, f] : sample_prox_functions(rows, cols, rng)) {
            ++kinds;
            for (int trial = 0; trial < 100; ++trial) {
                const double lambda = std::pow(10.0, rng.uniform(-1.5, 1.5));
                const VectorXd u = 2.0 * rng.normal_vector(rows * cols);
                const VectorXd conj = reference::conjugate_prox(f, 1.0 / lambda, VectorXd(u / lambda));
                moreau = std::max(moreau, (prox(f, lambda, u) + lambda * conj - u).cwiseAbs().maxCoeff());
                const VectorXd direct = reference::conjugate_prox(reference::scaled_function(f, lambda), 1.0, u);
                scaling = std::max(scaling, (scaled_conjugate_prox(f, lambda, u) - direct).cwiseAbs().maxCoeff());
            }
        }
    }
    return {moreau < 1e-10 && scaling < 1e-10,
            fmt("%d function/shape pairs x 100 draws, moreau %.2e, scaling %.2e", kinds, moreau, scaling)};
}

// 3. envelope gradient by central differences
Outcome envelope_gradient() {
    Rng rng(30);
    double worst = 0;
    for (const auto& [name, f] : sample_prox_functions(2, 3, rng)) {
        if (f.kind() != ProxKind::L1 && f.kind() != ProxKind::IndicatorNonneg && f.kind() != ProxKind::Nuclear) continue;
        for (int trial = 0; trial < 50; ++trial) {
            const double lambda = rng.uniform(0.2, 2.0);
            const VectorXd x = 3.0 * rng.normal_vector(6);
            const VectorXd g = moreau_envelope_grad(f, lambda, x);
            VectorXd fd(6);
            const double h = 1e-6;
            for (int i = 0; i < 6; ++i) {
                VectorXd xp = x, xm = x;
                xp(i) += h;
                xm(i) -= h;
                fd(i) = (moreau_envelope(f, lambda, xp) - moreau_envelope(f, lambda, xm)) / (2 * h);
            }
            const double err = g.norm() > 0 ? (g - fd).norm() / g.norm() : fd.norm();
            worst = std::max(worst, err);
        }
    }
    return {worst < 1e-5, fmt("l1/nonneg/nuclear, worst relative error %.2e", worst)};
}

// 4. spectral constants
Outcome spectral() {
    const double d = power_iteration(make_difference_1d<double>(200)).eigenvalue;
    const double exact = 2.0 - 2.0 * std::cos(199.0 * M_PI / 200.0);
    const double g = power_iteration(make_gradient_2d<double>(64, 64)).eigenvalue;
    return {std::abs(d - exact) < 1e-4 && g >= 7.9 && g <= 8.0,
            fmt("DD^T %.9f vs %.9f (err %.1e), gradient-2d %.6f", d, exact, std::abs(d - exact), g)};
}

const SolverId kFour[] = {SolverId::Alg1, SolverId::Alg2, SolverId::Alg3, SolverId::Alg4};

std::vector<SolveTrace<double>> run_four(const SplitProblem<double>& p, const SolverConfig<double>& c) {
    std::vector<std::future<SolveTrace<double>>> jobs;
    for (SolverId id : kFour) jobs.push_back(std::async(std::launch::async, [&p, &c, id] { return solve(id, p, c); }));
    std::vector<SolveTrace<double>> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

// 5. fused lasso at the default size
Outcome fused_lasso() {
    const auto p = build_fused_lasso(FusedLassoSpec{});
    auto c = SolverConfig<double>::from_preset(ParamPreset::TypeII, p);
    c.outer_eps = 1e-8;
    c.max_outer = 5000;
    const auto traces = run_four(p, c);
    bool pass = true;
    double lo = 1e300, hi = -1e300, snr_lo = 1e300, snr_hi = -1e300;
    std::string iters;
    for (const auto& t : traces) {
        pass = pass && t.converged;
        const double n = *t.records.back().nmsd, s = *t.records.back().snr;
        lo = std::min(lo, n);
        hi = std::max(hi, n);
        snr_lo = std::min(snr_lo, s);
        snr_hi = std::max(snr_hi, s);
        iters += (t.converged ? std::to_string(t.total_outer) : std::string("MAXITER")) + " ";
    }
    pass = pass && hi - lo <= 1e-5 && snr_lo >= 40.0 && snr_hi <= 50.0;

    auto ci = SolverConfig<double>::from_preset(ParamPreset::TypeI, p);
    ci.outer_eps = 1e-8;
    ci.max_outer = 5000;
    std::string type1;
    for (SolverId id : {SolverId::Alg1, SolverId::Alg3}) {
        const auto t = solve(id, p, ci);
        type1 += std::string(to_string(id)) + "=" + (t.converged ? std::to_string(t.total_outer) : "MAXITER") + " ";
    }
    return {pass, fmt("type-II iterations %s| NMSD spread %.2e, SNR %.4f..%.4f dB | type-I %s", iters.c_str(), hi - lo,
                      snr_lo, snr_hi, type1.c_str())};
}

// 6. inner-iteration trend under type-I
Outcome inner_trend() {
    const auto p = build_fused_lasso(FusedLassoSpec{});
    bool pass = true;
    std::string detail;
    for (SolverId id : {SolverId::Alg1, SolverId::Alg3}) {
        std::map<int, int> count;
        for (int j : {1, 2, 10, 20}) {
            auto c = SolverConfig<double>::from_preset(ParamPreset::TypeI, p);
            c.outer_eps = 1e-8;
            c.max_outer = 5000;
            c.inner_iters = j;
            const auto t = solve(id, p, c);
            count[j] = t.converged ? t.total_outer : -1;
            if (j > 1) pass = pass && t.converged;
        }
        const double spread = std::abs(count[10] - count[20]) / double(std::max(count[10], count[20]));
        pass = pass && spread <= 0.05;
        detail += fmt("%s J1=%s J2=%d J10=%d J20=%d (10/20 spread %.1f%%); ", std::string(to_string(id)).c_str(),
                      count[1] < 0 ? "MAXITER" : std::to_string(count[1]).c_str(), count[2], count[10], count[20],
                      100 * spread);
    }
    return {pass, detail};
}

SolverConfig<double> image_config(const SplitProblem<double>& p, double gamma) {
    SolverConfig<double> c;
    c.gamma = gamma;
    c.lambda = c.sigma = 1.0 / p.b_norm_sq();
    c.tau = 1.0;
    c.inner_iters = 10;
    c.outer_eps = 1e-6;
    c.max_outer = 100000;
    return c;
}

// 7. CT reconstruction agreement
Outcome ct() {
    const auto p = build_ct_problem(CtSpec{});
    const auto traces = run_four(p, image_config(p, 1.9 / p.f.lipschitz()));
    double obj_lo = 1e300, obj_hi = -1e300, snr_lo = 1e300, snr_hi = -1e300;
    bool converged = true;
    for (const auto& t : traces) {
        converged = converged && t.converged;
        const double o = objective(p, t.final_x), s = *t.records.back().snr;
        obj_lo = std::min(obj_lo, o);
        obj_hi = std::max(obj_hi, o);
        snr_lo = std::min(snr_lo, s);
        snr_hi = std::max(snr_hi, s);
    }
    const double rel = (obj_hi - obj_lo) / std::abs(obj_lo);
    return {converged && rel <= 1e-5 && snr_hi - snr_lo <= 0.1,
            fmt("objective %.10g, relative spread %.2e, SNR %.4f..%.4f dB", obj_lo, rel, snr_lo, snr_hi)};
}

// 8. super-resolution agreement
Outcome lrtv() {
    const auto p = build_lrtv_problem(LrtvSpec{});
    const auto traces = run_four(p, image_config(p, kLrtvGamma));
    double lo = 1e300, hi = -1e300, ssim_lo = 1e300;
    bool converged = true;
    for (const auto& t : traces) {
        converged = converged && t.converged;
        lo = std::min(lo, *t.records.back().nmsd);
        hi = std::max(hi, *t.records.back().nmsd);
        ssim_lo = std::min(ssim_lo, *t.records.back().ssim);
    }
    return {converged && hi - lo <= 1e-4 && ssim_lo >= 0.9,
            fmt("NMSD %.6f, spread %.2e, min SSIM %.5f", lo, hi - lo, ssim_lo)};
}

// 9. prox against random search and brute force
Outcome prox_oracles() {
    Rng rng(90);
    double brute = 0, margin = -1e300;
    int cases = 0;
    auto exercise = [&](const ProxFunction<double>& f, Eigen::Index dim) {
        for (int trial = 0; trial < 20; ++trial) {
            const double step = std::pow(10.0, rng.uniform(-1.0, 1.0));
            const VectorXd v = 2.0 * rng.normal_vector(dim);
            const VectorXd p = prox(f, step, v);
            brute = std::max(brute, (p - reference::brute_force_prox(f, step, v)).cwiseAbs().maxCoeff());
            const double best = reference::random_search_best(f, step, v, 1000, rng);
            margin = std::max(margin, reference::prox_objective(f, step, v, p) - best);
            ++cases;
        }
    };
    for (auto [rows, cols] : {std::pair{1, 4}, std::pair{2, 2}, std::pair{1, 2}}) {
        for (const auto& [name, f] : sample_prox_functions(rows, cols, rng)) exercise(f, rows * cols);
    }
    for (auto [rows, cols] : {std::pair{3, 4}, std::pair{4, 4}, std::pair{4, 2}})
        exercise(make_nuclear(rng.uniform(0.2, 2.0), rows, cols), rows * cols);
    return {brute <= 1e-6 && margin <= 1e-12,
            fmt("%d cases, max brute-force gap %.2e, worst objective minus best random candidate %.2e", cases, brute,
                margin)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 10. two CLI runs of one config give byte-identical CSVs
Outcome determinism() {
    const auto dir = fs::temp_directory_path() / "opsplit_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = std::string("env -u OPSPLIT_OUTPUT_DIR '") + OPSPLIT_CLI_PATH + "'";
    if (shell(cli + " print-default-config fused-lasso > '" + (dir / "cfg.json").string() + "'") != 0)
        return {false, "print-default-config failed"};
    auto cfg = nlohmann::json::parse(slurp(dir / "cfg.json"));
    cfg["solvers"] = {"alg1", "alg2", "alg3", "alg4", "pdfp", "condat-vu", "pd3o", "new-scheme"};
    std::ofstream(dir / "cfg.json") << cfg.dump(2);
    for (const char* run : {"a", "b"}) {
        const std::string threads = run[0] == 'a' ? "1" : "4";
        if (shell(cli + " run '" + (dir / "cfg.json").string() + "' -o '" + (dir / run).string() + "' -j " + threads +
                  " > /dev/null") != 0)
            return {false, std::string("run ") + run + " failed"};
    }
    int files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        ++files;
        const auto other = dir / "b" / fs::relative(e.path(), dir / "a");
        differing += (!fs::exists(other) || slurp(e.path()) != slurp(other)) ? 1 : 0;
    }
    int files_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir / "b"))
        files_b += e.is_regular_file() && e.path().extension() == ".csv" ? 1 : 0;
    fs::remove_all(dir);
    return {files > 1 && files == files_b && differing == 0,
            fmt("%d CSV files compared (1 thread vs 4), %d differ", files, differing)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double time_limit;  // seconds, 0 for none
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria{
        {1, "solver identities over 120 iterations", 10, identities},
        {2, "Moreau and conjugate scaling identities", 5, moreau_scaling},
        {3, "Moreau envelope gradient vs finite differences", 0, envelope_gradient},
        {4, "spectral constants by power iteration", 0, spectral},
        {5, "fused lasso, four algorithms", 120, fused_lasso},
        {6, "inner-iteration trend under type-I", 0, inner_trend},
        {7, "CT reconstruction agreement", 300, ct},
        {8, "LRTV super-resolution agreement", 300, lrtv},
        {9, "prox vs random search and brute force", 0, prox_oracles},
        {10, "deterministic CLI output", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit > 0 && secs > c.time_limit) {
            o.pass = false;
            o.detail += fmt(" [over the %.0f s limit]", c.time_limit);
        }
        std::printf("%s criterion %d: %s (%.1f s) -- %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
