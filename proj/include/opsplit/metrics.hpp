#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "opsplit/types.hpp"

namespace opsplit {

// Reconstruction-quality measures. All take Eigen expressions of any shape; images may be
// passed flattened or as matrices, only the coefficients matter.

/// ||x - x_r|| / ||x - mean(x)||. Zero on exact recovery; +infinity for a constant x_true
/// reconstructed inexactly.
template <typename DerivedA, typename DerivedB>
auto nmsd(const Eigen::MatrixBase<DerivedA>& x_true, const Eigen::MatrixBase<DerivedB>& x_rec) {
    using Scalar = typename DerivedA::Scalar;
    if (x_true.size() != x_rec.size()) throw std::invalid_argument("nmsd: size mismatch");
    const Scalar mean = x_true.mean();
    const Scalar spread = (x_true.array() - mean).matrix().norm();
    const Scalar err = (x_true - x_rec).norm();
    if (err == Scalar(0)) return Scalar(0);
    if (spread == Scalar(0)) return kInfinity<Scalar>;
    return err / spread;
}

/// 20 log10(||x - mean(x)|| / ||x - x_r||) in dB; +infinity on exact recovery.
template <typename DerivedA, typename DerivedB>
auto snr(const Eigen::MatrixBase<DerivedA>& x_true, const Eigen::MatrixBase<DerivedB>& x_rec) {
    using Scalar = typename DerivedA::Scalar;
    const Scalar d = nmsd(x_true, x_rec);
    if (d == Scalar(0)) return kInfinity<Scalar>;
    return Scalar(-20) * std::log10(d);
}

/// Single-window SSIM over the whole image with c1 = (0.01 L)^2, c2 = (0.03 L)^2 and
/// population (1/N) moments. The variance factor of the denominator uses c2.
template <typename DerivedA, typename DerivedB>
auto ssim_global(const Eigen::MatrixBase<DerivedA>& f, const Eigen::MatrixBase<DerivedB>& g,
                 typename DerivedA::Scalar dynamic_range) {
    using Scalar = typename DerivedA::Scalar;
    if (f.size() != g.size()) throw std::invalid_argument("ssim_global: size mismatch");
    if (!(dynamic_range > 0)) throw std::invalid_argument("ssim_global: dynamic range must be positive");
    const Scalar n = static_cast<Scalar>(f.size());
    const Scalar c1 = Scalar(0.01) * dynamic_range * Scalar(0.01) * dynamic_range;
    const Scalar c2 = Scalar(0.03) * dynamic_range * Scalar(0.03) * dynamic_range;
    const Scalar mu_f = f.mean();
    const Scalar mu_g = g.mean();
    const auto df = f.array() - mu_f;
    const auto dg = g.array() - mu_g;
    const Scalar var_f = df.square().sum() / n;
    const Scalar var_g = dg.square().sum() / n;
    const Scalar cov = (df * dg).sum() / n;
    return ((Scalar(2) * mu_f * mu_g + c1) * (Scalar(2) * cov + c2)) /
           ((mu_f * mu_f + mu_g * mu_g + c1) * (var_f + var_g + c2));
}

template <typename Scalar>
struct MetricReport {
    Scalar snr_db;
    Scalar nmsd;
    std::optional<Scalar> ssim;
};

}  // namespace opsplit
