#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "opsplit/run_config.hpp"

namespace opsplit {

/// Environment variable that, when set and non-empty, replaces the config's output_dir.
inline constexpr const char* kOutputDirEnv = "OPSPLIT_OUTPUT_DIR";

struct CellResult {
    enum class Status { Converged, MaxIter, Diverged, Failed };

    std::string preset;
    std::string solver;
    int inner_iters = 1;
    double eps = 0;
    Status status = Status::Failed;
    int iterations = 0;
    double objective = 0;
    std::optional<double> nmsd;
    std::optional<double> snr;
    std::optional<double> ssim;
    std::string message;
    std::filesystem::path trace_path;
};

struct RunOutcome {
    std::vector<CellResult> cells;
    std::filesystem::path summary_path;
    int exit_code = kExitOk;
};

/// "%.17g", with "inf", "-inf" and "nan" spelled out.
std::string format_double(double v);

/// ε as it appears in trace file names ("%g": 1e-08, 0.0001).
std::string eps_tag(double eps);

/// `<experiment>_<solver>_J<j>_eps<e>.csv`, placed under `<output_dir>/<preset>/`.
std::string trace_file_name(const std::string& experiment, const std::string& solver, int inner_iters, double eps);

std::filesystem::path effective_output_dir(const RunConfig& cfg);

void write_trace_csv(std::ostream& os, const SolveTrace<double>& trace, bool with_ssim);

/// Builds the instance, solves every (preset, solver, J, eps) cell, writes one trace per
/// cell and summary.csv. Pairing and output-directory problems abort before any solve
/// (RunError); divergence of a cell is reported in its summary row and in exit_code.
RunOutcome run_experiment(const RunConfig& cfg, std::ostream& log);

}  // namespace opsplit
