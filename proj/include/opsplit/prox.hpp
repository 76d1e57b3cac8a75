#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include <Eigen/SVD>

#include "opsplit/types.hpp"

namespace opsplit {

enum class ProxKind { L1, GroupL21, IndicatorNonneg, IndicatorBox, Nuclear, QuadraticDistance, Zero };

const char* to_string(ProxKind kind);

namespace terms {

struct L1 {};

/// Groups {i, i + n, ..., i + (size-1) n} for i < n; with size 2 this pairs the two
/// halves of a stacked 2D gradient, giving the isotropic TV norm.
struct GroupL21 {
    Eigen::Index group_count;
    Eigen::Index group_size;
};

struct IndicatorNonneg {};

template <typename Scalar>
struct IndicatorBox {
    Scalar lower;
    Scalar upper;
};

/// Nuclear norm of a vector reinterpreted as a row-major rows x cols matrix.
struct Nuclear {
    Eigen::Index rows;
    Eigen::Index cols;
};

/// (1/2) ||x - center||^2.
template <typename Scalar>
struct QuadraticDistance {
    Vector<Scalar> center;
};

struct Zero {};

}  // namespace terms

/// A closed convex function with a closed-form proximity operator, scaled by `weight`.
template <typename Scalar>
class ProxFunction {
public:
    using VectorType = Vector<Scalar>;
    using Term = std::variant<terms::L1, terms::GroupL21, terms::IndicatorNonneg, terms::IndicatorBox<Scalar>,
                              terms::Nuclear, terms::QuadraticDistance<Scalar>, terms::Zero>;

    ProxFunction(Term term, Scalar weight) : term_(std::move(term)), weight_(weight) {
        if (!(weight >= 0) || !std::isfinite(weight))
            throw std::invalid_argument("ProxFunction: weight must be finite and nonnegative");
        if (auto* box = std::get_if<terms::IndicatorBox<Scalar>>(&term_); box && !(box->lower <= box->upper))
            throw std::invalid_argument("ProxFunction: box lower bound exceeds upper bound");
    }

    ProxKind kind() const { return static_cast<ProxKind>(term_.index()); }
    Scalar weight() const { return weight_; }
    const Term& term() const { return term_; }

    /// Indicators ignore the weight; zero-weight functions and Zero have identity prox.
    bool is_indicator() const {
        return kind() == ProxKind::IndicatorNonneg || kind() == ProxKind::IndicatorBox;
    }

private:
    Term term_;
    Scalar weight_;
};

static_assert(static_cast<int>(ProxKind::Zero) == 6);

inline const char* to_string(ProxKind kind) {
    switch (kind) {
        case ProxKind::L1: return "l1";
        case ProxKind::GroupL21: return "group-l21";
        case ProxKind::IndicatorNonneg: return "indicator-nonneg";
        case ProxKind::IndicatorBox: return "indicator-box";
        case ProxKind::Nuclear: return "nuclear";
        case ProxKind::QuadraticDistance: return "quadratic-distance";
        case ProxKind::Zero: return "zero";
    }
    return "unknown";
}

template <typename Scalar = double>
ProxFunction<Scalar> make_l1(Scalar weight) {
    return {terms::L1{}, weight};
}

template <typename Scalar = double>
ProxFunction<Scalar> make_group_l21(Scalar weight, Eigen::Index group_count, Eigen::Index group_size = 2) {
    if (group_count <= 0 || group_size <= 0) throw std::invalid_argument("group-l21: empty group layout");
    return {terms::GroupL21{group_count, group_size}, weight};
}

template <typename Scalar = double>
ProxFunction<Scalar> make_nonneg_indicator() {
    return {terms::IndicatorNonneg{}, Scalar(1)};
}

template <typename Scalar = double>
ProxFunction<Scalar> make_box_indicator(Scalar lower, Scalar upper) {
    return {terms::IndicatorBox<Scalar>{lower, upper}, Scalar(1)};
}

template <typename Scalar = double>
ProxFunction<Scalar> make_nuclear(Scalar weight, Eigen::Index rows, Eigen::Index cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("nuclear: matrix shape must be positive");
    return {terms::Nuclear{rows, cols}, weight};
}

template <typename Scalar>
ProxFunction<Scalar> make_quadratic_distance(Scalar weight, Vector<Scalar> center) {
    return {terms::QuadraticDistance<Scalar>{std::move(center)}, weight};
}

template <typename Scalar = double>
ProxFunction<Scalar> make_zero() {
    return {terms::Zero{}, Scalar(0)};
}

namespace detail {

template <typename Scalar>
void check_length(const char* what, Eigen::Index got, Eigen::Index want) {
    if (got != want)
        throw std::invalid_argument(std::string(what) + ": expected input of length " + std::to_string(want) +
                                    ", got " + std::to_string(got));
}

template <typename Scalar>
Vector<Scalar> soft_threshold(const Vector<Scalar>& v, Scalar t) {
    return v.unaryExpr([t](Scalar a) { return a > t ? a - t : (a < -t ? a + t : Scalar(0)); });
}

// Singular values at or below this are treated as zero.
inline constexpr double kSingularValueFloor = 1e-12;

template <typename Scalar>
Eigen::JacobiSVD<Matrix<Scalar>> nuclear_svd(const Vector<Scalar>& v, const terms::Nuclear& shape, bool vectors) {
    check_length<Scalar>("nuclear", v.size(), shape.rows * shape.cols);
    const Matrix<Scalar> m = as_image(v, shape.rows, shape.cols);
    return Eigen::JacobiSVD<Matrix<Scalar>>(m, vectors ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0);
}

}  // namespace detail

/// Function value; indicators return +infinity outside their set.
template <typename Scalar, typename Derived>
Scalar value(const ProxFunction<Scalar>& f, const Eigen::MatrixBase<Derived>& x_in) {
    const Vector<Scalar> x = x_in;
    const Scalar w = f.weight();
    return std::visit(
        [&](const auto& t) -> Scalar {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, terms::L1>) {
                return w * x.template lpNorm<1>();
            } else if constexpr (std::is_same_v<T, terms::GroupL21>) {
                detail::check_length<Scalar>("group-l21", x.size(), t.group_count * t.group_size);
                Scalar total = 0;
                for (Eigen::Index i = 0; i < t.group_count; ++i) {
                    Scalar sq = 0;
                    for (Eigen::Index j = 0; j < t.group_size; ++j) sq += x(i + j * t.group_count) * x(i + j * t.group_count);
                    total += std::sqrt(sq);
                }
                return w * total;
            } else if constexpr (std::is_same_v<T, terms::IndicatorNonneg>) {
                return (x.array() >= Scalar(0)).all() ? Scalar(0) : kInfinity<Scalar>;
            } else if constexpr (std::is_same_v<T, terms::IndicatorBox<Scalar>>) {
                return ((x.array() >= t.lower) && (x.array() <= t.upper)).all() ? Scalar(0) : kInfinity<Scalar>;
            } else if constexpr (std::is_same_v<T, terms::Nuclear>) {
                const auto svd = detail::nuclear_svd(x, t, false);
                return w * svd.singularValues().sum();
            } else if constexpr (std::is_same_v<T, terms::QuadraticDistance<Scalar>>) {
                detail::check_length<Scalar>("quadratic-distance", x.size(), t.center.size());
                return w * Scalar(0.5) * (x - t.center).squaredNorm();
            } else {
                return Scalar(0);
            }
        },
        f.term());
}

/// Exact minimizer of (1/2)||x - v||^2 + step * f(x).
template <typename Scalar, typename Derived>
Vector<Scalar> prox(const ProxFunction<Scalar>& f, Scalar step, const Eigen::MatrixBase<Derived>& v_in) {
    if (!(step > 0)) throw std::invalid_argument("prox: step must be positive");
    const Vector<Scalar> v = v_in;
    const Scalar t = step * f.weight();
    return std::visit(
        [&](const auto& term) -> Vector<Scalar> {
            using T = std::decay_t<decltype(term)>;
            if constexpr (std::is_same_v<T, terms::L1>) {
                return detail::soft_threshold(v, t);
            } else if constexpr (std::is_same_v<T, terms::GroupL21>) {
                detail::check_length<Scalar>("group-l21", v.size(), term.group_count * term.group_size);
                Vector<Scalar> out = v;
                const Eigen::Index n = term.group_count;
                for (Eigen::Index i = 0; i < n; ++i) {
                    Scalar sq = 0;
                    for (Eigen::Index j = 0; j < term.group_size; ++j) sq += v(i + j * n) * v(i + j * n);
                    const Scalar norm = std::sqrt(sq);
                    const Scalar shrink = norm > t ? Scalar(1) - t / norm : Scalar(0);
                    for (Eigen::Index j = 0; j < term.group_size; ++j) out(i + j * n) = shrink * v(i + j * n);
                }
                return out;
            } else if constexpr (std::is_same_v<T, terms::IndicatorNonneg>) {
                return v.cwiseMax(Scalar(0));
            } else if constexpr (std::is_same_v<T, terms::IndicatorBox<Scalar>>) {
                return v.cwiseMax(term.lower).cwiseMin(term.upper);
            } else if constexpr (std::is_same_v<T, terms::Nuclear>) {
                const auto svd = detail::nuclear_svd(v, term, true);
                Vector<Scalar> s = svd.singularValues();
                for (Eigen::Index i = 0; i < s.size(); ++i) {
                    s(i) = s(i) <= Scalar(detail::kSingularValueFloor) ? Scalar(0) : std::max(s(i) - t, Scalar(0));
                }
                const RowMajorMatrix<Scalar> out = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
                return Eigen::Map<const Vector<Scalar>>(out.data(), out.size());
            } else if constexpr (std::is_same_v<T, terms::QuadraticDistance<Scalar>>) {
                detail::check_length<Scalar>("quadratic-distance", v.size(), term.center.size());
                return (v + t * term.center) / (Scalar(1) + t);
            } else {
                return v;
            }
        },
        f.term());
}

/// prox of step * f^*, through the Moreau identity v - step * prox_{f/step}(v/step).
template <typename Scalar, typename Derived>
Vector<Scalar> prox_conjugate(const ProxFunction<Scalar>& f, Scalar step, const Eigen::MatrixBase<Derived>& v) {
    if (!(step > 0)) throw std::invalid_argument("prox_conjugate: step must be positive");
    const Vector<Scalar> scaled_in = v / step;
    return v - step * prox(f, Scalar(1) / step, scaled_in);
}

/// prox of (lambda f)^*, as lambda * prox_{f^*/lambda}(v/lambda).
template <typename Scalar, typename Derived>
Vector<Scalar> scaled_conjugate_prox(const ProxFunction<Scalar>& f, Scalar lambda,
                                     const Eigen::MatrixBase<Derived>& v) {
    if (!(lambda > 0)) throw std::invalid_argument("scaled_conjugate_prox: lambda must be positive");
    const Vector<Scalar> scaled_in = v / lambda;
    return lambda * prox_conjugate(f, Scalar(1) / lambda, scaled_in);
}

/// Moreau envelope f_lambda(x) = min_y f(y) + ||x - y||^2 / (2 lambda).
template <typename Scalar, typename Derived>
Scalar moreau_envelope(const ProxFunction<Scalar>& f, Scalar lambda, const Eigen::MatrixBase<Derived>& x) {
    const Vector<Scalar> p = prox(f, lambda, x);
    return value(f, p) + (x - p).squaredNorm() / (Scalar(2) * lambda);
}

/// Gradient of the Moreau envelope, (x - prox_{lambda f}(x)) / lambda; (1/lambda)-Lipschitz.
template <typename Scalar, typename Derived>
Vector<Scalar> moreau_envelope_grad(const ProxFunction<Scalar>& f, Scalar lambda,
                                    const Eigen::MatrixBase<Derived>& x) {
    if (!(lambda > 0)) throw std::invalid_argument("moreau_envelope_grad: lambda must be positive");
    return (x - prox(f, lambda, x)) / lambda;
}

}  // namespace opsplit
