#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "opsplit/types.hpp"

namespace opsplit {

/// Deterministic random source used by every instance builder.
///
/// Generator "opsplit-rng-v1": std::mt19937_64 (whose output sequence is fixed by the
/// C++ standard) seeded through splitmix64 from (seed, stream). Uniform doubles take the
/// top 53 bits; normals use the Marsaglia polar method. No std::*_distribution is used,
/// since their output is implementation-defined.
class Rng {
public:
    static constexpr std::string_view kVersion = "opsplit-rng-v1";

    /// Named streams keep components independent: changing how many numbers one
    /// component draws never shifts another component's draws.
    enum class Stream : std::uint64_t {
        Matrix = 0x6d61747269780001ULL,
        Noise = 0x6e6f697365000002ULL,
        Geometry = 0x67656f6d00000003ULL,
        Image = 0x696d616765000004ULL,
        Probe = 0x70726f6265000005ULL,
    };

    Rng(std::uint64_t seed, Stream stream);
    explicit Rng(std::uint64_t seed) : Rng(seed, Stream::Probe) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    /// Integer uniform on [0, n).
    std::uint64_t below(std::uint64_t n);

    VectorXd normal_vector(Eigen::Index n);
    VectorXd uniform_vector(Eigen::Index n, double lo, double hi);
    MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace opsplit
