#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "opsplit/linear_map.hpp"
#include "opsplit/prox.hpp"

namespace opsplit {

enum class SmoothKind { LeastSquares, Zero };

/// Differentiable convex term with L-Lipschitz gradient: either (1/2)||Ax - b||^2 for
/// any linear map A (a dense matrix, a projector, or a blur-downsample composite), or zero.
template <typename Scalar>
class SmoothFunction {
public:
    using VectorType = Vector<Scalar>;

    static SmoothFunction least_squares(LinearMap<Scalar> a, VectorType b, Scalar lipschitz) {
        if (b.size() != a.out_dim())
            throw DimensionError("least-squares: data length " + std::to_string(b.size()) +
                                 " does not match operator output " + std::to_string(a.out_dim()));
        if (!(lipschitz > 0)) throw std::invalid_argument("least-squares: lipschitz bound must be positive");
        const Eigen::Index dim = a.in_dim();
        return SmoothFunction(SmoothKind::LeastSquares, std::move(a), std::move(b), lipschitz, dim);
    }

    /// Lipschitz bound taken as the squared power-iteration estimate of ||A||.
    static SmoothFunction least_squares(LinearMap<Scalar> a, VectorType b) {
        const Scalar norm = estimate_norm(a);
        return least_squares(std::move(a), std::move(b), norm * norm);
    }

    static SmoothFunction zero(Eigen::Index dim) {
        return SmoothFunction(SmoothKind::Zero, make_identity<Scalar>(dim), VectorType::Zero(dim), Scalar(0), dim);
    }

    SmoothKind kind() const { return kind_; }
    Eigen::Index dim() const { return dim_; }
    Scalar lipschitz() const { return lipschitz_; }
    const LinearMap<Scalar>& op() const { return op_; }
    const VectorType& data() const { return data_; }

    template <typename Derived>
    Scalar value(const Eigen::MatrixBase<Derived>& x) const {
        if (kind_ == SmoothKind::Zero) return Scalar(0);
        return Scalar(0.5) * (op_.apply(x) - data_).squaredNorm();
    }

    template <typename Derived>
    VectorType gradient(const Eigen::MatrixBase<Derived>& x) const {
        if (kind_ == SmoothKind::Zero) return VectorType::Zero(dim_);
        return op_.adjoint_apply(op_.apply(x) - data_);
    }

private:
    SmoothFunction(SmoothKind kind, LinearMap<Scalar> op, VectorType data, Scalar lipschitz, Eigen::Index dim)
        : kind_(kind), op_(std::move(op)), data_(std::move(data)), lipschitz_(lipschitz), dim_(dim) {}

    SmoothKind kind_;
    LinearMap<Scalar> op_;
    VectorType data_;
    Scalar lipschitz_;
    Eigen::Index dim_;
};

/// min_x f(x) + g(x) + h(Bx).
template <typename Scalar>
struct SplitProblem {
    SmoothFunction<Scalar> f;
    ProxFunction<Scalar> g;
    ProxFunction<Scalar> h;
    LinearMap<Scalar> B;
    // ||B|| used for step-size presets and validation; lambda_max(BB^T) is its square.
    Scalar b_norm;
    std::optional<Vector<Scalar>> ground_truth;
    std::optional<Vector<Scalar>> initial_point;
    // Image shape when x is a flattened row-major image (enables SSIM reporting).
    std::optional<std::pair<Eigen::Index, Eigen::Index>> image_shape;

    Eigen::Index dim() const { return B.in_dim(); }
    Scalar b_norm_sq() const { return b_norm * b_norm; }

    void validate() const {
        if (f.dim() != B.in_dim())
            throw DimensionError("SplitProblem: f has dimension " + std::to_string(f.dim()) +
                                 " but B expects " + std::to_string(B.in_dim()));
        if (!(b_norm > 0)) throw std::invalid_argument("SplitProblem: b_norm must be positive");
        if (ground_truth && ground_truth->size() != dim())
            throw DimensionError("SplitProblem: ground truth length mismatch");
        if (initial_point && initial_point->size() != dim())
            throw DimensionError("SplitProblem: initial point length mismatch");
    }
};

/// f(x) + g(x) + h(Bx); +infinity when x or Bx leaves an indicator's set.
template <typename Scalar, typename Derived>
Scalar objective(const SplitProblem<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
    const Scalar gx = value(p.g, x);
    if (is_infinite(gx)) return gx;
    const Scalar hx = value(p.h, p.B.apply(x));
    if (is_infinite(hx)) return hx;
    return p.f.value(x) + gx + hx;
}

}  // namespace opsplit
