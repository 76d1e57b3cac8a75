#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "opsplit/prox.hpp"
#include "opsplit/rng.hpp"

// Reference implementations for checking the prox module. Conjugates are written out in
// closed form per kind and the brute-force minimizers never call prox(); nothing here goes
// through the Moreau identity that prox_conjugate is built on.

namespace opsplit::reference {

/// weight * lambda for weighted kinds; indicators are unchanged by positive scaling.
template <typename Scalar>
ProxFunction<Scalar> scaled_function(const ProxFunction<Scalar>& f, Scalar lambda) {
    if (f.is_indicator()) return f;
    return ProxFunction<Scalar>(f.term(), f.weight() * lambda);
}

namespace detail {

template <typename Scalar>
Matrix<Scalar> as_matrix(const Vector<Scalar>& v, const terms::Nuclear& shape) {
    return as_image(v, shape.rows, shape.cols);
}

template <typename Scalar>
Vector<Scalar> flatten(const Matrix<Scalar>& m) {
    const RowMajorMatrix<Scalar> rm = m;
    return Eigen::Map<const Vector<Scalar>>(rm.data(), rm.size());
}

// Thin SVD through the eigendecomposition of M^T M (or M M^T), independent of JacobiSVD.
template <typename Scalar>
void eig_svd(const Matrix<Scalar>& m, Matrix<Scalar>& u, Vector<Scalar>& s, Matrix<Scalar>& v) {
    const bool wide = m.rows() < m.cols();
    const Matrix<Scalar> gram = wide ? Matrix<Scalar>(m * m.transpose()) : Matrix<Scalar>(m.transpose() * m);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(gram);
    const Eigen::Index k = gram.rows();
    s.resize(k);
    Matrix<Scalar> basis = es.eigenvectors();
    for (Eigen::Index i = 0; i < k; ++i) s(i) = std::sqrt(std::max(es.eigenvalues()(i), Scalar(0)));
    Matrix<Scalar> other = wide ? Matrix<Scalar>(m.transpose() * basis) : Matrix<Scalar>(m * basis);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (s(i) > Scalar(1e-300)) other.col(i) /= s(i);
    }
    if (wide) {
        u = basis;
        v = other;
    } else {
        u = other;
        v = basis;
    }
}

template <typename Scalar>
Vector<Scalar> spectral_map(const Vector<Scalar>& x, const terms::Nuclear& shape,
                            const std::function<Scalar(Scalar)>& fn) {
    Matrix<Scalar> u, v;
    Vector<Scalar> s;
    eig_svd(as_matrix(x, shape), u, s, v);
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = fn(s(i));
    return flatten<Scalar>(u * s.asDiagonal() * v.transpose());
}

template <typename Scalar>
Vector<Scalar> singular_values(const Vector<Scalar>& x, const terms::Nuclear& shape) {
    Matrix<Scalar> u, v;
    Vector<Scalar> s;
    eig_svd(as_matrix(x, shape), u, s, v);
    return s;
}

}  // namespace detail

/// f^*(y), +infinity outside the domain of indicator-type conjugates. `slack` widens the
/// dual-ball domains to absorb rounding.
template <typename Scalar>
Scalar conjugate_value(const ProxFunction<Scalar>& f, const Vector<Scalar>& y, Scalar slack = Scalar(1e-9)) {
    const Scalar w = f.weight();
    const Scalar inf = kInfinity<Scalar>;
    return std::visit(
        [&](const auto& t) -> Scalar {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, terms::L1>) {
                return y.cwiseAbs().maxCoeff() <= w + slack ? Scalar(0) : inf;
            } else if constexpr (std::is_same_v<T, terms::GroupL21>) {
                for (Eigen::Index i = 0; i < t.group_count; ++i) {
                    Scalar sq = 0;
                    for (Eigen::Index j = 0; j < t.group_size; ++j) sq += std::pow(y(i + j * t.group_count), 2);
                    if (std::sqrt(sq) > w + slack) return inf;
                }
                return Scalar(0);
            } else if constexpr (std::is_same_v<T, terms::IndicatorNonneg>) {
                return y.maxCoeff() <= slack ? Scalar(0) : inf;
            } else if constexpr (std::is_same_v<T, terms::IndicatorBox<Scalar>>) {
                return (y.array() * t.lower).max(y.array() * t.upper).sum();
            } else if constexpr (std::is_same_v<T, terms::Nuclear>) {
                return detail::singular_values(y, t).maxCoeff() <= w + slack ? Scalar(0) : inf;
            } else if constexpr (std::is_same_v<T, terms::QuadraticDistance<Scalar>>) {
                if (w == Scalar(0)) return y.norm() <= slack ? y.dot(t.center) : inf;
                return y.dot(t.center) + y.squaredNorm() / (Scalar(2) * w);
            } else {
                return y.norm() <= slack ? Scalar(0) : inf;
            }
        },
        f.term());
}

/// prox_{step f^*}(v) from the closed form of each conjugate: projections onto dual norm
/// balls, a shifted threshold for the box support function, a shrunk affine map for the
/// quadratic.
template <typename Scalar>
Vector<Scalar> conjugate_prox(const ProxFunction<Scalar>& f, Scalar step, const Vector<Scalar>& v) {
    const Scalar w = f.weight();
    return std::visit(
        [&](const auto& t) -> Vector<Scalar> {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, terms::L1>) {
                return v.cwiseMax(-w).cwiseMin(w);
            } else if constexpr (std::is_same_v<T, terms::GroupL21>) {
                Vector<Scalar> out = v;
                for (Eigen::Index i = 0; i < t.group_count; ++i) {
                    Scalar sq = 0;
                    for (Eigen::Index j = 0; j < t.group_size; ++j) sq += std::pow(v(i + j * t.group_count), 2);
                    const Scalar norm = std::sqrt(sq);
                    if (norm > w) {
                        for (Eigen::Index j = 0; j < t.group_size; ++j) out(i + j * t.group_count) *= w / norm;
                    }
                }
                return out;
            } else if constexpr (std::is_same_v<T, terms::IndicatorNonneg>) {
                return v.cwiseMin(Scalar(0));
            } else if constexpr (std::is_same_v<T, terms::IndicatorBox<Scalar>>) {
                // minimize (1/2)(y - v)^2 + step * max(l y, u y) per coordinate
                Vector<Scalar> out(v.size());
                for (Eigen::Index i = 0; i < v.size(); ++i) {
                    if (v(i) - step * t.upper > 0) out(i) = v(i) - step * t.upper;
                    else if (v(i) - step * t.lower < 0) out(i) = v(i) - step * t.lower;
                    else out(i) = 0;
                }
                return out;
            } else if constexpr (std::is_same_v<T, terms::Nuclear>) {
                return detail::spectral_map<Scalar>(v, t, [w](Scalar s) { return std::min(s, w); });
            } else if constexpr (std::is_same_v<T, terms::QuadraticDistance<Scalar>>) {
                if (w == Scalar(0)) return Vector<Scalar>::Zero(v.size());
                return (v - step * t.center) / (Scalar(1) + step / w);
            } else {
                return Vector<Scalar>::Zero(v.size());
            }
        },
        f.term());
}

/// (1/2)||x - v||^2 + step * f(x), the function prox_{step f}(v) minimizes.
template <typename Scalar>
Scalar prox_objective(const ProxFunction<Scalar>& f, Scalar step, const Vector<Scalar>& v, const Vector<Scalar>& x) {
    const Scalar fx = value(f, x);
    if (is_infinite(fx)) return fx;
    return Scalar(0.5) * (x - v).squaredNorm() + (f.is_indicator() ? Scalar(0) : step * fx);
}

namespace detail {

// Golden-section search of a convex function on [lo, hi].
template <typename Scalar, typename Fn>
Scalar golden_min(Fn&& fn, Scalar lo, Scalar hi, int iters = 200) {
    const Scalar r = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
    Scalar a = lo, b = hi;
    Scalar c = b - r * (b - a), d = a + r * (b - a);
    Scalar fc = fn(c), fd = fn(d);
    for (int i = 0; i < iters && b - a > Scalar(1e-15) * (Scalar(1) + std::abs(a)); ++i) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = fn(d);
        }
    }
    return (a + b) / Scalar(2);
}

// Grid scan followed by golden-section refinement around the best grid cell.
template <typename Scalar, typename Fn>
Scalar grid_min(Fn&& fn, Scalar lo, Scalar hi, int cells = 2000) {
    const Scalar h = (hi - lo) / Scalar(cells);
    Scalar best = lo, best_val = fn(lo);
    for (int i = 1; i <= cells; ++i) {
        const Scalar x = lo + h * Scalar(i);
        const Scalar fx = fn(x);
        if (fx < best_val) {
            best_val = fx;
            best = x;
        }
    }
    return golden_min(fn, std::max(lo, best - h), std::min(hi, best + h));
}

}  // namespace detail

/// Brute-force prox: separable kinds by a per-coordinate grid scan plus golden-section
/// refinement; group-l21 by a nested search over each group (group size 2); nuclear by
/// singular-value shrinkage computed from an eigendecomposition.
template <typename Scalar>
Vector<Scalar> brute_force_prox(const ProxFunction<Scalar>& f, Scalar step, const Vector<Scalar>& v) {
    const Scalar t = step * f.weight();
    const Scalar radius = v.cwiseAbs().maxCoeff() + std::abs(t) + Scalar(1);
    return std::visit(
        [&](const auto& term) -> Vector<Scalar> {
            using T = std::decay_t<decltype(term)>;
            Vector<Scalar> out(v.size());
            if constexpr (std::is_same_v<T, terms::GroupL21>) {
                if (term.group_size != 2) throw std::invalid_argument("brute_force_prox: group size must be 2");
                const Eigen::Index n = term.group_count;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const Scalar a = v(i), b = v(i + n);
                    auto inner = [&](Scalar y) {
                        auto fx = [&](Scalar x) {
                            return Scalar(0.5) * ((x - a) * (x - a) + (y - b) * (y - b)) + t * std::hypot(x, y);
                        };
                        const Scalar x = detail::grid_min<Scalar>(fx, -radius, radius, 200);
                        return std::make_pair(x, fx(x));
                    };
                    const Scalar y = detail::grid_min<Scalar>([&](Scalar y) { return inner(y).second; }, -radius, radius, 200);
                    out(i) = inner(y).first;
                    out(i + n) = y;
                }
            } else if constexpr (std::is_same_v<T, terms::Nuclear>) {
                out = detail::spectral_map<Scalar>(v, term, [t](Scalar s) { return std::max(s - t, Scalar(0)); });
            } else {
                for (Eigen::Index i = 0; i < v.size(); ++i) {
                    auto fx = [&](Scalar x) -> Scalar {
                        if constexpr (std::is_same_v<T, terms::L1>) {
                            return Scalar(0.5) * (x - v(i)) * (x - v(i)) + t * std::abs(x);
                        } else if constexpr (std::is_same_v<T, terms::IndicatorNonneg>) {
                            return x < 0 ? kInfinity<Scalar> : Scalar(0.5) * (x - v(i)) * (x - v(i));
                        } else if constexpr (std::is_same_v<T, terms::IndicatorBox<Scalar>>) {
                            return (x < term.lower || x > term.upper) ? kInfinity<Scalar>
                                                                      : Scalar(0.5) * (x - v(i)) * (x - v(i));
                        } else if constexpr (std::is_same_v<T, terms::QuadraticDistance<Scalar>>) {
                            return Scalar(0.5) * (x - v(i)) * (x - v(i)) +
                                   t * Scalar(0.5) * (x - term.center(i)) * (x - term.center(i));
                        } else {
                            return Scalar(0.5) * (x - v(i)) * (x - v(i));
                        }
                    };
                    Scalar lo = -radius, hi = radius;
                    if constexpr (std::is_same_v<T, terms::IndicatorNonneg>) lo = 0;
                    if constexpr (std::is_same_v<T, terms::IndicatorBox<Scalar>>) {
                        lo = term.lower;
                        hi = term.upper;
                    }
                    if constexpr (std::is_same_v<T, terms::QuadraticDistance<Scalar>>) {
                        const Scalar c = std::abs(term.center(i)) + Scalar(1);
                        lo = std::min(lo, -c);
                        hi = std::max(hi, c);
                    }
                    out(i) = detail::grid_min<Scalar>(fx, lo, hi);
                }
            }
            return out;
        },
        f.term());
}

/// Smallest prox objective among `count` random candidates: Gaussian perturbations of v
/// at several scales, projected onto the domain for indicator kinds.
template <typename Scalar>
Scalar random_search_best(const ProxFunction<Scalar>& f, Scalar step, const Vector<Scalar>& v, int count, Rng& rng) {
    Scalar best = kInfinity<Scalar>;
    for (int i = 0; i < count; ++i) {
        const Scalar scale = std::pow(Scalar(10), Scalar(rng.uniform(-3.0, 0.5)));
        Vector<Scalar> x = v + scale * rng.normal_vector(v.size()).template cast<Scalar>();
        if (i % 4 == 0) x = x.cwiseProduct(Vector<Scalar>::Constant(v.size(), Scalar(rng.uniform(0.0, 1.0))));
        if (f.kind() == ProxKind::IndicatorNonneg) x = x.cwiseMax(Scalar(0));
        if (const auto* box = std::get_if<terms::IndicatorBox<Scalar>>(&f.term())) x = x.cwiseMax(box->lower).cwiseMin(box->upper);
        best = std::min(best, prox_objective(f, step, v, x));
    }
    return best;
}

}  // namespace opsplit::reference
