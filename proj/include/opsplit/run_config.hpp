#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "opsplit/problems.hpp"
#include "opsplit/solvers.hpp"

namespace opsplit {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitDivergence = 2,
    kExitVerification = 3,
    kExitUnknownSolver = 4,
    kExitInvalidPairing = 5,
    kExitOutputDir = 6,
};

class RunError : public std::runtime_error {
public:
    RunError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

/// A step-size choice. "type-I" and "type-II" are the standard presets, "imaging" the
/// per-experiment parameters (lambda = sigma = 1/lambda_max(BB^T), tau = 1), "custom"
/// takes explicit values. Any field given explicitly overrides the preset; gamma defaults
/// to 1.9/L (0.1 for super-resolution).
struct PresetChoice {
    std::string label;
    enum class Base { TypeI, TypeII, Imaging, Custom } base = Base::TypeII;
    std::optional<double> gamma;
    std::optional<double> lambda;
    std::optional<double> sigma;
    std::optional<double> tau;
};

struct RunConfig {
    ExperimentSpec experiment;
    std::vector<std::string> solvers;
    std::vector<PresetChoice> presets;
    std::vector<int> inner_iters{1};
    std::vector<double> eps_list;
    int max_outer = 5000;
    bool warm_start_dual = true;
    std::filesystem::path output_dir = "results";
    int threads = 0;  // 0: hardware concurrency
};

/// JSON text of the default configuration for "fused-lasso", "constrained-tv-ct" or "lrtv-sr".
std::string default_config_text(std::string_view experiment);

/// Parses and validates a JSON configuration. Throws RunError with kExitConfig on
/// malformed input and kExitUnknownSolver on an unrecognized solver id.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Solver parameters for one (preset, solver) cell of a run. Throws RunError with
/// kExitInvalidPairing when the preset lacks a parameter the solver needs or the solver
/// cannot handle the problem's B.
SolverConfig<double> resolve_solver_config(const RunConfig& cfg, const PresetChoice& preset, SolverId solver,
                                           const SplitProblem<double>& problem);

}  // namespace opsplit
