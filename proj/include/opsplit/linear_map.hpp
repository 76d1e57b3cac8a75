#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "opsplit/rng.hpp"
#include "opsplit/types.hpp"

namespace opsplit {

enum class MapKind {
    DenseMatrix,
    SparseMatrix,
    Difference1d,
    Gradient2d,
    GaussianBlur,
    DownsampleAverage,
    Composite,
    Identity,
    Scaled,
};

const char* to_string(MapKind kind);

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

template <typename Scalar>
struct MapImpl {
    virtual ~MapImpl() = default;
    virtual void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const = 0;
    virtual void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const = 0;
};

}  // namespace detail

/// Bounded linear operator B : R^in_dim -> R^out_dim with forward and adjoint action.
///
/// Instances are immutable handles over shared state, so copies are cheap and
/// apply/adjoint_apply may be called concurrently.
template <typename Scalar>
class LinearMap {
public:
    using VectorType = Vector<Scalar>;

    LinearMap(MapKind kind, Eigen::Index in_dim, Eigen::Index out_dim,
              std::shared_ptr<const detail::MapImpl<Scalar>> impl)
        : kind_(kind), in_dim_(in_dim), out_dim_(out_dim), impl_(std::move(impl)) {}

    MapKind kind() const { return kind_; }
    Eigen::Index in_dim() const { return in_dim_; }
    Eigen::Index out_dim() const { return out_dim_; }

    template <typename Derived>
    VectorType apply(const Eigen::MatrixBase<Derived>& x) const {
        check_dim("apply", x.size(), in_dim_);
        VectorType out(out_dim_);
        impl_->apply(x.derived().eval(), out);
        return out;
    }

    template <typename Derived>
    VectorType adjoint_apply(const Eigen::MatrixBase<Derived>& y) const {
        check_dim("adjoint_apply", y.size(), out_dim_);
        VectorType out(in_dim_);
        impl_->adjoint(y.derived().eval(), out);
        return out;
    }

    template <typename Derived>
    VectorType operator*(const Eigen::MatrixBase<Derived>& x) const {
        return apply(x);
    }

private:
    void check_dim(const char* what, Eigen::Index got, Eigen::Index want) const {
        if (got != want) {
            std::ostringstream msg;
            msg << to_string(kind_) << "::" << what << ": expected vector of length " << want
                << ", got " << got << " (operator is " << out_dim_ << "x" << in_dim_ << ")";
            throw DimensionError(msg.str());
        }
    }

    MapKind kind_;
    Eigen::Index in_dim_;
    Eigen::Index out_dim_;
    std::shared_ptr<const detail::MapImpl<Scalar>> impl_;
};

inline const char* to_string(MapKind kind) {
    switch (kind) {
        case MapKind::DenseMatrix: return "dense-matrix";
        case MapKind::SparseMatrix: return "sparse-matrix";
        case MapKind::Difference1d: return "difference-1d";
        case MapKind::Gradient2d: return "gradient-2d";
        case MapKind::GaussianBlur: return "gaussian-blur";
        case MapKind::DownsampleAverage: return "downsample-average";
        case MapKind::Composite: return "composite";
        case MapKind::Identity: return "identity";
        case MapKind::Scaled: return "scaled";
    }
    return "unknown";
}

namespace detail {

template <typename Scalar>
struct IdentityImpl final : MapImpl<Scalar> {
    void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const override { out = x; }
    void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const override { out = y; }
};

template <typename Scalar>
struct DenseImpl final : MapImpl<Scalar> {
    explicit DenseImpl(Matrix<Scalar> m) : mat(std::move(m)) {}
    void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const override { out.noalias() = mat * x; }
    void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const override {
        out.noalias() = mat.transpose() * y;
    }
    Matrix<Scalar> mat;
};

template <typename Scalar>
struct SparseImpl final : MapImpl<Scalar> {
    explicit SparseImpl(SparseMatrix<Scalar> m) : mat(std::move(m)) { mat.makeCompressed(); }
    void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const override { out.noalias() = mat * x; }
    void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const override {
        out.noalias() = mat.transpose() * y;
    }
    SparseMatrix<Scalar> mat;
};

// Rows (-1, 1) on adjacent entries: (Dx)_i = x_{i+1} - x_i, i = 0..n-2.
template <typename Scalar>
struct Difference1dImpl final : MapImpl<Scalar> {
    explicit Difference1dImpl(Eigen::Index n) : n(n) {}
    void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const override {
        out = x.tail(n - 1) - x.head(n - 1);
    }
    void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const override {
        out.setZero(n);
        out.head(n - 1) -= y;
        out.tail(n - 1) += y;
    }
    Eigen::Index n;
};

// Stacked forward differences (horizontal block, then vertical block) of a row-major
// image; the last difference along each line is zero.
template <typename Scalar>
struct Gradient2dImpl final : MapImpl<Scalar> {
    Gradient2dImpl(Eigen::Index rows, Eigen::Index cols) : rows(rows), cols(cols) {}

    void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const override {
        const Eigen::Index n = rows * cols;
        out.setZero(2 * n);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Eigen::Index base = r * cols;
            for (Eigen::Index c = 0; c + 1 < cols; ++c) out(base + c) = x(base + c + 1) - x(base + c);
        }
        for (Eigen::Index r = 0; r + 1 < rows; ++r) {
            const Eigen::Index base = r * cols;
            for (Eigen::Index c = 0; c < cols; ++c)
                out(n + base + c) = x(base + cols + c) - x(base + c);
        }
    }

    void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const override {
        const Eigen::Index n = rows * cols;
        out.setZero(n);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Eigen::Index base = r * cols;
            for (Eigen::Index c = 0; c + 1 < cols; ++c) {
                const Scalar h = y(base + c);
                out(base + c + 1) += h;
                out(base + c) -= h;
            }
        }
        for (Eigen::Index r = 0; r + 1 < rows; ++r) {
            const Eigen::Index base = r * cols;
            for (Eigen::Index c = 0; c < cols; ++c) {
                const Scalar v = y(n + base + c);
                out(base + cols + c) += v;
                out(base + c) -= v;
            }
        }
    }

    Eigen::Index rows, cols;
};

// Half-sample symmetric extension: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
    const Eigen::Index period = 2 * n;
    Eigen::Index m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

template <typename Scalar>
std::vector<Scalar> gaussian_kernel(double sigma) {
    if (sigma <= 0.0) return {Scalar(1)};
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<Scalar> w(2 * radius + 1);
    Scalar total = 0;
    for (int k = -radius; k <= radius; ++k) {
        w[k + radius] = static_cast<Scalar>(std::exp(-0.5 * k * k / (sigma * sigma)));
        total += w[k + radius];
    }
    for (auto& v : w) v /= total;
    return w;
}

// Separable Gaussian convolution with symmetric boundary. The adjoint scatters with the
// same weights, so it is the exact transpose including the folded boundary terms.
template <typename Scalar>
struct GaussianBlurImpl final : MapImpl<Scalar> {
    GaussianBlurImpl(Eigen::Index rows, Eigen::Index cols, double sigma)
        : rows(rows), cols(cols), weights(gaussian_kernel<Scalar>(sigma)) {}

    void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const override {
        Vector<Scalar> tmp(rows * cols);
        filter(x, tmp, cols, 1, rows, cols);  // along each row
        filter(tmp, out, rows, cols, cols, 1);  // along each column
    }

    void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const override {
        Vector<Scalar> tmp(rows * cols);
        scatter(y, tmp, rows, cols, cols, 1);
        scatter(tmp, out, cols, 1, rows, cols);
    }

    // `len` samples per line with element stride `stride`; `lines` lines with line stride `lstride`.
    void filter(const Vector<Scalar>& in, Vector<Scalar>& out, Eigen::Index len, Eigen::Index stride,
                Eigen::Index lines, Eigen::Index lstride) const {
        const Eigen::Index radius = static_cast<Eigen::Index>(weights.size() / 2);
        out.resize(in.size());
        for (Eigen::Index l = 0; l < lines; ++l) {
            const Eigen::Index base = l * lstride;
            for (Eigen::Index i = 0; i < len; ++i) {
                Scalar acc = 0;
                for (Eigen::Index k = -radius; k <= radius; ++k)
                    acc += weights[k + radius] * in(base + reflect_index(i + k, len) * stride);
                out(base + i * stride) = acc;
            }
        }
    }

    void scatter(const Vector<Scalar>& in, Vector<Scalar>& out, Eigen::Index len, Eigen::Index stride,
                 Eigen::Index lines, Eigen::Index lstride) const {
        const Eigen::Index radius = static_cast<Eigen::Index>(weights.size() / 2);
        out.setZero(in.size());
        for (Eigen::Index l = 0; l < lines; ++l) {
            const Eigen::Index base = l * lstride;
            for (Eigen::Index i = 0; i < len; ++i) {
                const Scalar v = in(base + i * stride);
                for (Eigen::Index k = -radius; k <= radius; ++k)
                    out(base + reflect_index(i + k, len) * stride) += weights[k + radius] * v;
            }
        }
    }

    Eigen::Index rows, cols;
    std::vector<Scalar> weights;
};

// Mean over non-overlapping factor x factor blocks; adjoint replicates and divides by factor^2.
template <typename Scalar>
struct BlockAverageImpl final : MapImpl<Scalar> {
    BlockAverageImpl(Eigen::Index rows, Eigen::Index cols, Eigen::Index factor)
        : rows(rows), cols(cols), factor(factor) {}

    void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const override {
        const Eigen::Index lc = cols / factor;
        const Scalar scale = Scalar(1) / static_cast<Scalar>(factor * factor);
        out.setZero((rows / factor) * lc);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) out((r / factor) * lc + c / factor) += x(r * cols + c);
        out *= scale;
    }

    void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const override {
        const Eigen::Index lc = cols / factor;
        const Scalar scale = Scalar(1) / static_cast<Scalar>(factor * factor);
        out.resize(rows * cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) out(r * cols + c) = scale * y((r / factor) * lc + c / factor);
    }

    Eigen::Index rows, cols, factor;
};

// outer(inner(x)); the adjoint runs the component adjoints in reverse order.
template <typename Scalar>
struct CompositeImpl final : MapImpl<Scalar> {
    CompositeImpl(LinearMap<Scalar> outer, LinearMap<Scalar> inner)
        : outer(std::move(outer)), inner(std::move(inner)) {}
    void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const override {
        out = outer.apply(inner.apply(x));
    }
    void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const override {
        out = inner.adjoint_apply(outer.adjoint_apply(y));
    }
    LinearMap<Scalar> outer, inner;
};

template <typename Scalar>
struct ScaledImpl final : MapImpl<Scalar> {
    ScaledImpl(Scalar alpha, LinearMap<Scalar> op) : alpha(alpha), op(std::move(op)) {}
    void apply(const Vector<Scalar>& x, Vector<Scalar>& out) const override { out = alpha * op.apply(x); }
    void adjoint(const Vector<Scalar>& y, Vector<Scalar>& out) const override {
        out = alpha * op.adjoint_apply(y);
    }
    Scalar alpha;
    LinearMap<Scalar> op;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail

template <typename Scalar = double>
LinearMap<Scalar> make_identity(Eigen::Index n) {
    detail::require(n > 0, "identity: dimension must be positive");
    return {MapKind::Identity, n, n, std::make_shared<detail::IdentityImpl<Scalar>>()};
}

template <typename Scalar>
LinearMap<Scalar> make_dense(Matrix<Scalar> m) {
    detail::require(m.rows() > 0 && m.cols() > 0, "dense-matrix: empty matrix");
    const auto rows = m.rows(), cols = m.cols();
    return {MapKind::DenseMatrix, cols, rows, std::make_shared<detail::DenseImpl<Scalar>>(std::move(m))};
}

template <typename Scalar>
LinearMap<Scalar> make_sparse(SparseMatrix<Scalar> m) {
    detail::require(m.rows() > 0 && m.cols() > 0, "sparse-matrix: empty matrix");
    const auto rows = m.rows(), cols = m.cols();
    return {MapKind::SparseMatrix, cols, rows, std::make_shared<detail::SparseImpl<Scalar>>(std::move(m))};
}

/// (n-1) x n forward-difference matrix.
template <typename Scalar = double>
LinearMap<Scalar> make_difference_1d(Eigen::Index n) {
    detail::require(n >= 2, "difference-1d: n must be at least 2, got " + std::to_string(n));
    return {MapKind::Difference1d, n, n - 1, std::make_shared<detail::Difference1dImpl<Scalar>>(n)};
}

/// Discrete gradient (I (x) B ; B (x) I) of a rows x cols image, where B is the square
/// forward-difference matrix with a zero last row. Output length is 2 * rows * cols.
template <typename Scalar = double>
LinearMap<Scalar> make_gradient_2d(Eigen::Index rows, Eigen::Index cols) {
    detail::require(rows >= 2 && cols >= 2, "gradient-2d: image must be at least 2x2, got " +
                                                std::to_string(rows) + "x" + std::to_string(cols));
    return {MapKind::Gradient2d, rows * cols, 2 * rows * cols,
            std::make_shared<detail::Gradient2dImpl<Scalar>>(rows, cols)};
}

/// Gaussian blur truncated at radius ceil(3 sigma), kernel normalized to unit sum,
/// symmetric boundary. sigma == 0 gives the identity blur.
template <typename Scalar = double>
LinearMap<Scalar> make_gaussian_blur(Eigen::Index rows, Eigen::Index cols, double sigma) {
    detail::require(rows > 0 && cols > 0, "gaussian-blur: empty image");
    detail::require(sigma >= 0.0 && std::isfinite(sigma), "gaussian-blur: sigma must be finite and >= 0");
    return {MapKind::GaussianBlur, rows * cols, rows * cols,
            std::make_shared<detail::GaussianBlurImpl<Scalar>>(rows, cols, sigma)};
}

template <typename Scalar = double>
LinearMap<Scalar> make_block_average(Eigen::Index rows, Eigen::Index cols, Eigen::Index factor) {
    detail::require(factor >= 1, "downsample-average: factor must be positive");
    if (rows <= 0 || cols <= 0 || rows % factor != 0 || cols % factor != 0) {
        throw std::invalid_argument("downsample-average: image " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + " not divisible by factor " +
                                    std::to_string(factor));
    }
    return {MapKind::DownsampleAverage, rows * cols, (rows / factor) * (cols / factor),
            std::make_shared<detail::BlockAverageImpl<Scalar>>(rows, cols, factor)};
}

/// outer o inner.
template <typename Scalar>
LinearMap<Scalar> compose(const LinearMap<Scalar>& outer, const LinearMap<Scalar>& inner) {
    if (outer.in_dim() != inner.out_dim()) {
        throw DimensionError("compose: inner output dimension " + std::to_string(inner.out_dim()) +
                             " does not match outer input dimension " + std::to_string(outer.in_dim()));
    }
    return {MapKind::Composite, inner.in_dim(), outer.out_dim(),
            std::make_shared<detail::CompositeImpl<Scalar>>(outer, inner)};
}

template <typename Scalar>
LinearMap<Scalar> scaled(Scalar alpha, const LinearMap<Scalar>& op) {
    return {MapKind::Scaled, op.in_dim(), op.out_dim(), std::make_shared<detail::ScaledImpl<Scalar>>(alpha, op)};
}

/// Blur followed by block-average downsampling.
template <typename Scalar = double>
LinearMap<Scalar> make_blur_downsample(Eigen::Index rows, Eigen::Index cols, double sigma, Eigen::Index factor) {
    auto down = make_block_average<Scalar>(rows, cols, factor);
    return compose(down, make_gaussian_blur<Scalar>(rows, cols, sigma));
}

/// Materializes the operator column by column. Intended for small operators and export.
template <typename Scalar>
Matrix<Scalar> to_dense(const LinearMap<Scalar>& op) {
    Matrix<Scalar> m(op.out_dim(), op.in_dim());
    Vector<Scalar> e = Vector<Scalar>::Zero(op.in_dim());
    for (Eigen::Index j = 0; j < op.in_dim(); ++j) {
        e(j) = 1;
        m.col(j) = op.apply(e);
        e(j) = 0;
    }
    return m;
}

struct PowerIterationOptions {
    double tol = 1e-10;
    int max_iters = 100000;
    std::uint64_t seed = 0x5eed;
};

template <typename Scalar>
struct PowerIterationResult {
    Scalar norm = 0;        // sqrt(lambda_max(B^T B))
    Scalar eigenvalue = 0;  // lambda_max(B^T B)
    int iterations = 0;
    bool converged = false;
};

/// Power iteration on B^T B from a seeded uniform start. Stops once the relative change
/// of the Rayleigh quotient ||Bv||^2 drops below tol.
template <typename Scalar>
PowerIterationResult<Scalar> power_iteration(const LinearMap<Scalar>& op, const PowerIterationOptions& opts = {}) {
    detail::require(opts.tol > 0, "estimate_norm: tol must be positive");
    PowerIterationResult<Scalar> res;
    Rng rng(opts.seed, Rng::Stream::Probe);
    Vector<Scalar> v = rng.uniform_vector(op.in_dim(), -1.0, 1.0).template cast<Scalar>();
    v.normalize();
    Scalar prev = 0;
    for (int it = 1; it <= opts.max_iters; ++it) {
        const Vector<Scalar> bv = op.apply(v);
        const Scalar rayleigh = bv.squaredNorm();
        res.eigenvalue = rayleigh;
        res.iterations = it;
        if (rayleigh == Scalar(0)) {
            res.converged = true;
            break;
        }
        Vector<Scalar> w = op.adjoint_apply(bv);
        v = w / w.norm();
        if (it > 1 && std::abs(rayleigh - prev) < Scalar(opts.tol) * rayleigh) {
            res.converged = true;
            break;
        }
        prev = rayleigh;
    }
    // the last normalized iterate is at least as good as the one used for the quotient
    res.eigenvalue = std::max(res.eigenvalue, op.apply(v).squaredNorm());
    res.norm = std::sqrt(res.eigenvalue);
    return res;
}

template <typename Scalar>
Scalar estimate_norm(const LinearMap<Scalar>& op, double tol = 1e-10, int max_iters = 100000,
                     std::uint64_t seed = 0x5eed) {
    return power_iteration(op, PowerIterationOptions{tol, max_iters, seed}).norm;
}

}  // namespace opsplit
