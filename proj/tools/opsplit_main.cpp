#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "opsplit/matrix_io.hpp"
#include "opsplit/run_config.hpp"
#include "opsplit/runner.hpp"
#include "opsplit/verify.hpp"

namespace {

int do_run(const std::string& config_path, const std::string& output_dir, int threads) {
    opsplit::RunConfig cfg = opsplit::load_run_config(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (threads > 0) cfg.threads = threads;
    const auto outcome = opsplit::run_experiment(cfg, std::cout);
    std::cout << "summary: " << outcome.summary_path.string() << '\n';
    return outcome.exit_code;
}

int do_verify(const std::string& suite_name, std::uint64_t seed) {
    const auto suite = opsplit::parse_suite(suite_name);
    if (!suite) {
        std::cerr << "unknown suite '" << suite_name << "' (expected prox, operators, equivalence or all)\n";
        return opsplit::kExitConfig;
    }
    int failed = 0;
    const auto results = opsplit::run_verification(*suite, seed);
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.suite << ' ' << r.name << "  " << r.detail << '\n';
        failed += r.passed ? 0 : 1;
    }
    std::cout << results.size() - static_cast<std::size_t>(failed) << '/' << results.size() << " properties passed\n";
    return failed == 0 ? opsplit::kExitOk : opsplit::kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Operator-splitting solvers for min f(x) + g(x) + h(Bx) and their benchmark experiments"};
    app.require_subcommand(0, 1);

    std::string print_default;
    app.add_option("--print-default-config", print_default, "Print the default config of an experiment and exit");

    std::string config_path, output_dir;
    int threads = 0;
    auto* run = app.add_subcommand("run", "Run every (preset, solver, J, eps) cell of a config");
    run->add_option("config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output-dir", output_dir, "Override output_dir (" + std::string(opsplit::kOutputDirEnv) +
                                                       " takes precedence)");
    run->add_option("-j,--threads", threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

    std::string suite;
    std::uint64_t seed = 2024;
    auto* verify = app.add_subcommand("verify", "Run property suites: prox, operators, equivalence or all");
    verify->add_option("suite", suite, "Suite name")->required();
    verify->add_option("--seed", seed, "Seed for the random test inputs");

    std::string experiment;
    auto* print = app.add_subcommand("print-default-config", "Print the default config of an experiment");
    print->add_option("experiment", experiment, "fused-lasso, constrained-tv-ct or lrtv-sr")->required();

    std::string export_config, export_dir;
    auto* exp = app.add_subcommand("export-instance", "Write a config's problem instance as Matrix Market files");
    exp->add_option("config", export_config, "JSON config file")->required()->check(CLI::ExistingFile);
    exp->add_option("dir", export_dir, "Destination directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : opsplit::kExitConfig;
    }

    try {
        if (!print_default.empty() || *print) {
            std::cout << opsplit::default_config_text(print_default.empty() ? experiment : print_default);
            return opsplit::kExitOk;
        }
        if (*run) return do_run(config_path, output_dir, threads);
        if (*verify) return do_verify(suite, seed);
        if (*exp) {
            const auto cfg = opsplit::load_run_config(export_config);
            opsplit::export_problem(opsplit::build_problem(cfg.experiment), export_dir);
            return opsplit::kExitOk;
        }
        std::cout << app.help();
        return opsplit::kExitConfig;
    } catch (const opsplit::RunError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return opsplit::kExitConfig;
    }
}
