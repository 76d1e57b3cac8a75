#include "opsplit/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace opsplit {

namespace {

struct Cell {
    std::size_t preset;
    SolverId solver;
    int inner_iters;
    double eps;
};

const char* status_marker(CellResult::Status s) {
    switch (s) {
        case CellResult::Status::MaxIter: return "MAXITER";
        case CellResult::Status::Diverged: return "DIVERGED";
        case CellResult::Status::Failed: return "ERROR";
        default: return "";
    }
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_atomically(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw RunError(kExitOutputDir, "cannot write " + tmp.string());
        os << content;
        if (!os) throw RunError(kExitOutputDir, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw RunError(kExitOutputDir, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw RunError(kExitOutputDir, "cannot create output directory " + dir.string());
    const std::filesystem::path probe = dir / ".opsplit_write_probe";
    {
        std::ofstream os(probe);
        if (!os) throw RunError(kExitOutputDir, "output directory " + dir.string() + " is not writable");
    }
    std::filesystem::remove(probe, ec);
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string eps_tag(double eps) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", eps);
    return buf;
}

std::string trace_file_name(const std::string& experiment, const std::string& solver, int inner_iters, double eps) {
    return experiment + "_" + solver + "_J" + std::to_string(inner_iters) + "_eps" + eps_tag(eps) + ".csv";
}

std::filesystem::path effective_output_dir(const RunConfig& cfg) {
    const char* env = std::getenv(kOutputDirEnv);
    if (env != nullptr && *env != '\0') return env;
    return cfg.output_dir;
}

void write_trace_csv(std::ostream& os, const SolveTrace<double>& trace, bool with_ssim) {
    os << "iter,objective,rel_change,snr,nmsd" << (with_ssim ? ",ssim" : "") << '\n';
    for (const auto& r : trace.records) {
        os << r.k << ',' << format_double(r.objective) << ',' << format_double(r.rel_change) << ','
           << optional_cell(r.snr) << ',' << optional_cell(r.nmsd);
        if (with_ssim) os << ',' << optional_cell(r.ssim);
        os << '\n';
    }
}

RunOutcome run_experiment(const RunConfig& cfg, std::ostream& log) {
    const std::string exp = experiment_name(cfg.experiment);
    const SplitProblem<double> problem = build_problem(cfg.experiment);
    const bool with_ssim = problem.image_shape.has_value();

    std::vector<Cell> cells;
    std::vector<SolverConfig<double>> configs;
    for (std::size_t pi = 0; pi < cfg.presets.size(); ++pi) {
        for (const auto& name : cfg.solvers) {
            const auto id = parse_solver_id(name);
            if (!id) throw RunError(kExitUnknownSolver, "unknown solver id '" + name + "'");
            const SolverConfig<double> base = resolve_solver_config(cfg, cfg.presets[pi], *id, problem);
            // inner iterations only matter for Algorithms 1-4
            const std::vector<int> js = has_inner_loop(*id) ? cfg.inner_iters : std::vector<int>{1};
            for (int j : js) {
                for (double eps : cfg.eps_list) {
                    SolverConfig<double> c = base;
                    c.inner_iters = j;
                    c.outer_eps = eps;
                    cells.push_back({pi, *id, j, eps});
                    configs.push_back(std::move(c));
                }
            }
        }
    }

    const std::filesystem::path out_dir = effective_output_dir(cfg);
    prepare_dir(out_dir);
    for (const auto& p : cfg.presets) prepare_dir(out_dir / p.label);

    RunOutcome outcome;
    outcome.cells.resize(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::optional<RunError> io_error;

    auto worker = [&]() {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& cell = cells[i];
            CellResult& res = outcome.cells[i];
            res.preset = cfg.presets[cell.preset].label;
            res.solver = std::string(to_string(cell.solver));
            res.inner_iters = cell.inner_iters;
            res.eps = cell.eps;
            res.trace_path = out_dir / res.preset / trace_file_name(exp, res.solver, cell.inner_iters, cell.eps);
            SolveTrace<double> trace;
            try {
                trace = solve(cell.solver, problem, configs[i]);
                res.status = trace.converged ? CellResult::Status::Converged : CellResult::Status::MaxIter;
            } catch (const DivergenceError& e) {
                res.status = CellResult::Status::Diverged;
                res.iterations = e.iteration();
                res.message = e.what();
            } catch (const std::exception& e) {
                res.status = CellResult::Status::Failed;
                res.message = e.what();
            }
            if (!trace.records.empty()) {
                const auto& last = trace.records.back();
                res.iterations = trace.total_outer;
                res.objective = last.objective;
                res.nmsd = last.nmsd;
                res.snr = last.snr;
                res.ssim = last.ssim;
            }
            std::ostringstream csv;
            write_trace_csv(csv, trace, with_ssim);
            try {
                write_atomically(res.trace_path, csv.str());
            } catch (const RunError& e) {
                std::lock_guard lock(err_mutex);
                if (!io_error) io_error = e;
            }
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads =
        std::min<std::size_t>(cells.size(), cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (io_error) throw *io_error;

    std::ostringstream summary;
    summary << "experiment,preset,solver,J,eps,iter,objective,nmsd,snr,ssim\n";
    for (const auto& r : outcome.cells) {
        const std::string iter =
            r.status == CellResult::Status::Converged ? std::to_string(r.iterations) : status_marker(r.status);
        summary << exp << ',' << r.preset << ',' << r.solver << ',' << r.inner_iters << ',' << eps_tag(r.eps) << ','
                << iter << ',' << format_double(r.objective) << ',' << optional_cell(r.nmsd) << ','
                << optional_cell(r.snr) << ',' << optional_cell(r.ssim) << '\n';
        log << exp << " preset=" << r.preset << " solver=" << r.solver << " J=" << r.inner_iters
            << " eps=" << eps_tag(r.eps) << " iter=" << iter;
        if (r.status == CellResult::Status::Converged || r.status == CellResult::Status::MaxIter)
            log << " objective=" << format_double(r.objective) << (r.snr ? " snr=" + format_double(*r.snr) : "");
        if (!r.message.empty()) log << " (" << r.message << ")";
        log << '\n';
        if (r.status == CellResult::Status::Diverged && outcome.exit_code == kExitOk) outcome.exit_code = kExitDivergence;
        if (r.status == CellResult::Status::Failed) outcome.exit_code = kExitConfig;
    }
    outcome.summary_path = out_dir / "summary.csv";
    write_atomically(outcome.summary_path, summary.str());
    return outcome;
}

}  // namespace opsplit
