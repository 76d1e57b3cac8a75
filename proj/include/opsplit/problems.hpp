#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "opsplit/problem.hpp"

namespace opsplit {

/// Where ||B|| comes from. Rounded: the closed-form bounds (||D|| = 2 for the 1D
/// difference, ||D||^2 = 8 for the 2D gradient). Exact: power iteration on B.
enum class SpectralMode { Rounded, Exact };

enum class TvKind { Isotropic, Anisotropic };

struct FusedLassoSpec {
    Eigen::Index m = 100;
    Eigen::Index n = 200;
    double mu1 = 0.2;
    double mu2 = 0.8;
    // Gaussian noise of standard deviation 0.1
    double noise_variance = 0.01;
    std::uint64_t seed = 1;
    SpectralMode spectral = SpectralMode::Rounded;
};

struct CtSpec {
    Eigen::Index side = 64;
    Eigen::Index views = 20;
    Eigen::Index rays = 96;
    double mu = 0.5;
    double noise_variance = 0.01;
    TvKind tv = TvKind::Isotropic;
    std::uint64_t seed = 1;
    SpectralMode spectral = SpectralMode::Rounded;
};

struct LrtvSpec {
    Eigen::Index rows = 32;
    Eigen::Index cols = 32;
    double blur_sigma = 1.0;
    Eigen::Index factor = 2;
    double lambda1 = 0.01;
    double lambda2 = 0.01;
    std::uint64_t seed = 1;
    SpectralMode spectral = SpectralMode::Rounded;
};

/// gamma used for the super-resolution problem in place of 1.9/L.
inline constexpr double kLrtvGamma = 0.1;

using ExperimentSpec = std::variant<FusedLassoSpec, CtSpec, LrtvSpec>;

/// "fused-lasso", "constrained-tv-ct" or "lrtv-sr".
std::string experiment_name(const ExperimentSpec& spec);

/// Piecewise-constant coefficients: 2 on entries 1-20 and 121-125, 3 on entry 41, 1 on
/// entries 71-85 (1-based, n = 200), 0 elsewhere. Other n rescale the index blocks.
VectorXd fused_lasso_truth(Eigen::Index n);

/// f = (1/2)||Ax - b||^2 with standard Gaussian A, g = mu1 ||x||_1, h = mu2 ||.||_1, B = D.
SplitProblem<double> build_fused_lasso(const FusedLassoSpec& spec);
SplitProblem<double> build_fused_lasso(Eigen::Index m, Eigen::Index n, double mu1, double mu2, double noise_variance,
                                       std::uint64_t seed);

/// f = (1/2)||Ax - b||^2 with a fan-beam projector, g = nonnegativity, h = mu * TV, B = grad.
SplitProblem<double> build_ct_problem(const CtSpec& spec);
SplitProblem<double> build_ct_problem(Eigen::Index side, Eigen::Index views, Eigen::Index rays, double mu,
                                      double noise_variance, TvKind tv, std::uint64_t seed);

/// Seeded sum of at most four rectangle indicators, scaled into [0, 1]; rank <= 4.
VectorXd lrtv_truth(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

/// Replicates each pixel of a row-major low_rows x low_cols image into a factor x factor block.
VectorXd upsample_nearest(const VectorXd& low, Eigen::Index low_rows, Eigen::Index low_cols, Eigen::Index factor);

/// f = (1/2)||DS x - T||^2 with T = DS x_true, g = lambda1 ||X||_*, h = lambda2 TV_iso,
/// B = grad; initial point is the nearest-neighbour upsample of T.
SplitProblem<double> build_lrtv_problem(const LrtvSpec& spec);
SplitProblem<double> build_lrtv_problem(Eigen::Index rows, Eigen::Index cols, double blur_sigma, Eigen::Index factor,
                                        double lambda1, double lambda2, std::uint64_t seed);

SplitProblem<double> build_problem(const ExperimentSpec& spec);

}  // namespace opsplit
