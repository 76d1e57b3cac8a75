#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opsplit/prox.hpp"
#include "opsplit/rng.hpp"
#include "opsplit/solvers.hpp"

namespace opsplit {

enum class Suite { Prox, Operators, Equivalence, All };

std::optional<Suite> parse_suite(std::string_view name);

struct PropertyResult {
    std::string suite;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Runs the property checks of one suite (or all three) with seeded random inputs.
std::vector<PropertyResult> run_verification(Suite suite, std::uint64_t seed = 2024);

/// One instance of every prox kind on vectors of length rows*cols (rows*cols even), with
/// seeded weights, box bounds and quadratic centers. Nuclear uses the rows x cols shape.
std::vector<std::pair<std::string, ProxFunction<double>>> sample_prox_functions(Eigen::Index rows, Eigen::Index cols,
                                                                                Rng& rng);

/// Largest per-coordinate difference between the stored iterates of two traces.
double max_iterate_gap(const SolveTrace<double>& a, const SolveTrace<double>& b);

}  // namespace opsplit
