#include "opsplit/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "opsplit/phantom.hpp"
#include "opsplit/projector.hpp"
#include "opsplit/rng.hpp"

namespace opsplit {

namespace {

double b_norm_for(const LinearMap<double>& b, SpectralMode mode, double rounded_value) {
    return mode == SpectralMode::Rounded ? rounded_value : estimate_norm(b);
}

void require_nonneg(double v, const char* name) {
    if (!(v >= 0)) throw std::invalid_argument(std::string(name) + " must be nonnegative");
}

}  // namespace

std::string experiment_name(const ExperimentSpec& spec) {
    switch (spec.index()) {
        case 0: return "fused-lasso";
        case 1: return "constrained-tv-ct";
        default: return "lrtv-sr";
    }
}

VectorXd fused_lasso_truth(Eigen::Index n) {
    if (n < 2) throw std::invalid_argument("fused lasso: n must be at least 2");
    auto reference = [](Eigen::Index i) {  // 1-based position in the length-200 recipe
        if ((i >= 1 && i <= 20) || (i >= 121 && i <= 125)) return 2.0;
        if (i == 41) return 3.0;
        if (i >= 71 && i <= 85) return 1.0;
        return 0.0;
    };
    VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = reference(i * 200 / n + 1);
    return x;
}

SplitProblem<double> build_fused_lasso(const FusedLassoSpec& s) {
    if (s.m < 1) throw std::invalid_argument("fused lasso: m must be positive");
    require_nonneg(s.mu1, "mu1");
    require_nonneg(s.mu2, "mu2");
    require_nonneg(s.noise_variance, "noise variance");
    const VectorXd truth = fused_lasso_truth(s.n);
    Rng matrix_rng(s.seed, Rng::Stream::Matrix);
    MatrixXd a = matrix_rng.normal_matrix(s.m, s.n);
    Rng noise_rng(s.seed, Rng::Stream::Noise);
    const VectorXd b = a * truth + std::sqrt(s.noise_variance) * noise_rng.normal_vector(s.m);

    auto d = make_difference_1d<double>(s.n);
    const double b_norm = b_norm_for(d, s.spectral, 2.0);
    SplitProblem<double> p{
        SmoothFunction<double>::least_squares(make_dense<double>(std::move(a)), b),
        make_l1(s.mu1),
        make_l1(s.mu2),
        std::move(d),
        b_norm,
        truth,
        std::nullopt,
        std::nullopt,
    };
    p.validate();
    return p;
}

SplitProblem<double> build_fused_lasso(Eigen::Index m, Eigen::Index n, double mu1, double mu2, double noise_variance,
                                       std::uint64_t seed) {
    return build_fused_lasso(FusedLassoSpec{m, n, mu1, mu2, noise_variance, seed, SpectralMode::Rounded});
}

SplitProblem<double> build_ct_problem(const CtSpec& s) {
    if (s.side < 16) throw std::invalid_argument("ct: image side must be at least 16");
    require_nonneg(s.mu, "mu");
    require_nonneg(s.noise_variance, "noise variance");
    const FanBeamGeometry geom = FanBeamGeometry::random_views(s.side, s.views, s.rays, s.seed);
    SparseMatrix<double> a = fan_beam_matrix(geom);
    const VectorXd truth = shepp_logan(s.side);
    Rng noise_rng(s.seed, Rng::Stream::Noise);
    const VectorXd b = a * truth + std::sqrt(s.noise_variance) * noise_rng.normal_vector(a.rows());

    const Eigen::Index n = s.side * s.side;
    auto grad = make_gradient_2d<double>(s.side, s.side);
    const double b_norm = b_norm_for(grad, s.spectral, std::sqrt(8.0));
    ProxFunction<double> tv = s.tv == TvKind::Isotropic ? make_group_l21(s.mu, n, 2) : make_l1(s.mu);
    SplitProblem<double> p{
        SmoothFunction<double>::least_squares(make_sparse<double>(std::move(a)), b),
        make_nonneg_indicator<double>(),
        std::move(tv),
        std::move(grad),
        b_norm,
        truth,
        std::nullopt,
        std::make_pair(s.side, s.side),
    };
    p.validate();
    return p;
}

SplitProblem<double> build_ct_problem(Eigen::Index side, Eigen::Index views, Eigen::Index rays, double mu,
                                      double noise_variance, TvKind tv, std::uint64_t seed) {
    return build_ct_problem(CtSpec{side, views, rays, mu, noise_variance, tv, seed, SpectralMode::Rounded});
}

VectorXd lrtv_truth(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    if (rows < 4 || cols < 4) throw std::invalid_argument("lrtv: image must be at least 4 x 4");
    Rng rng(seed, Rng::Stream::Image);
    RowMajorMatrix<double> img = RowMajorMatrix<double>::Zero(rows, cols);
    auto span = [&rng](Eigen::Index len) {
        const Eigen::Index width = len / 4 + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(len / 4 + 1)));
        const Eigen::Index start = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(len - width + 1)));
        return std::make_pair(start, width);
    };
    for (int k = 0; k < 4; ++k) {
        const auto [r0, h] = span(rows);
        const auto [c0, w] = span(cols);
        img.block(r0, c0, h, w).array() += rng.uniform(0.3, 1.0);
    }
    const double peak = img.maxCoeff();
    if (peak > 0) img /= peak;
    return Eigen::Map<const VectorXd>(img.data(), img.size());
}

VectorXd upsample_nearest(const VectorXd& low, Eigen::Index low_rows, Eigen::Index low_cols, Eigen::Index factor) {
    if (low.size() != low_rows * low_cols) throw DimensionError("upsample: size does not match shape");
    if (factor < 1) throw std::invalid_argument("upsample: factor must be positive");
    const Eigen::Index cols = low_cols * factor;
    VectorXd out(low.size() * factor * factor);
    for (Eigen::Index r = 0; r < low_rows * factor; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) out(r * cols + c) = low((r / factor) * low_cols + c / factor);
    return out;
}

SplitProblem<double> build_lrtv_problem(const LrtvSpec& s) {
    require_nonneg(s.lambda1, "lambda1");
    require_nonneg(s.lambda2, "lambda2");
    auto ds = make_blur_downsample<double>(s.rows, s.cols, s.blur_sigma, s.factor);
    const VectorXd truth = lrtv_truth(s.rows, s.cols, s.seed);
    VectorXd t = ds.apply(truth);
    VectorXd init = upsample_nearest(t, s.rows / s.factor, s.cols / s.factor, s.factor);

    auto grad = make_gradient_2d<double>(s.rows, s.cols);
    const double b_norm = b_norm_for(grad, s.spectral, std::sqrt(8.0));
    SplitProblem<double> p{
        SmoothFunction<double>::least_squares(std::move(ds), std::move(t)),
        make_nuclear(s.lambda1, s.rows, s.cols),
        make_group_l21(s.lambda2, s.rows * s.cols, 2),
        std::move(grad),
        b_norm,
        truth,
        std::move(init),
        std::make_pair(s.rows, s.cols),
    };
    p.validate();
    return p;
}

SplitProblem<double> build_lrtv_problem(Eigen::Index rows, Eigen::Index cols, double blur_sigma, Eigen::Index factor,
                                        double lambda1, double lambda2, std::uint64_t seed) {
    return build_lrtv_problem(LrtvSpec{rows, cols, blur_sigma, factor, lambda1, lambda2, seed, SpectralMode::Rounded});
}

SplitProblem<double> build_problem(const ExperimentSpec& spec) {
    if (const auto* f = std::get_if<FusedLassoSpec>(&spec)) return build_fused_lasso(*f);
    if (const auto* c = std::get_if<CtSpec>(&spec)) return build_ct_problem(*c);
    return build_lrtv_problem(std::get<LrtvSpec>(spec));
}

}  // namespace opsplit
