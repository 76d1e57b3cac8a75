#include <cmath>

#include "doctest.h"
#include "opsplit/linear_map.hpp"
#include "opsplit/projector.hpp"
#include "opsplit/rng.hpp"

using namespace opsplit;

namespace {

double rel_adjoint_gap(const LinearMap<double>& op, Rng& rng) {
    const VectorXd x = rng.normal_vector(op.in_dim());
    const VectorXd y = rng.normal_vector(op.out_dim());
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.adjoint_apply(y));
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

// Chord length of a ray through the axis-aligned box [x0, x1] x [y0, y1] (slab method).
double slab_chord(const Ray& r, double x0, double x1, double y0, double y1) {
    double lo = -1e300, hi = 1e300;
    const double bounds[2][2] = {{x0, x1}, {y0, y1}};
    for (int a = 0; a < 2; ++a) {
        if (std::abs(r.direction(a)) < 1e-15) {
            if (r.origin(a) < bounds[a][0] || r.origin(a) > bounds[a][1]) return 0.0;
            continue;
        }
        double t0 = (bounds[a][0] - r.origin(a)) / r.direction(a);
        double t1 = (bounds[a][1] - r.origin(a)) / r.direction(a);
        if (t0 > t1) std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
    }
    return std::max(0.0, hi - lo);
}

}  // namespace

TEST_CASE("identity and difference-1d act as their explicit matrices") {
    const auto id = make_identity<double>(3);
    CHECK(id.apply(VectorXd{{1, 2, 3}}) == VectorXd{{1, 2, 3}});
    CHECK(make_identity<double>(2).adjoint_apply(VectorXd{{5, 6}}) == VectorXd{{5, 6}});

    const auto d = make_difference_1d<double>(3);
    CHECK(d.out_dim() == 2);
    CHECK(d.apply(VectorXd{{1, 2, 4}}) == VectorXd{{1, 2}});
    CHECK(d.adjoint_apply(VectorXd{{1, 0}}) == VectorXd{{-1, 1, 0}});
    CHECK(make_difference_1d<double>(2).apply(VectorXd{{2.5, -1.0}})(0) == -3.5);
    CHECK_THROWS_AS(make_difference_1d<double>(1), std::invalid_argument);
}

TEST_CASE("difference-1d spectrum matches 2 - 2cos(i pi / n)") {
    for (int n : {5, 12, 32}) {
        const MatrixXd dm = to_dense(make_difference_1d<double>(n));
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(dm * dm.transpose());
        for (int i = 1; i < n; ++i)
            CHECK(std::abs(es.eigenvalues()(i - 1) - (2.0 - 2.0 * std::cos(i * M_PI / n))) < 1e-9);
    }
}

TEST_CASE("gradient-2d on a 2x2 image") {
    const auto g = make_gradient_2d<double>(2, 2);
    const double a = 1.5, b = -2.0, c = 4.0, d = 0.25;
    const VectorXd out = g.apply(VectorXd{{a, b, c, d}});
    const VectorXd expect{{b - a, 0, d - c, 0, c - a, d - b, 0, 0}};
    CHECK((out - expect).cwiseAbs().maxCoeff() == 0.0);
    CHECK(make_gradient_2d<double>(4, 4).apply(VectorXd::Constant(16, 3.0)).isZero());
    CHECK_THROWS_AS(make_gradient_2d<double>(1, 4), std::invalid_argument);
}

TEST_CASE("dimension mismatch names both sizes") {
    const auto d = make_difference_1d<double>(5);
    try {
        (void)d.apply(VectorXd::Zero(4));
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find('4') != std::string::npos);
        CHECK(msg.find('5') != std::string::npos);
    }
    CHECK_THROWS_AS((void)d.adjoint_apply(VectorXd::Zero(5)), DimensionError);
}

TEST_CASE("blur and block averaging") {
    const auto ds = make_blur_downsample<double>(8, 6, 1.0, 2);
    CHECK(ds.out_dim() == 12);
    const VectorXd out = ds.apply(VectorXd::Constant(48, 0.7));
    CHECK((out.array() - 0.7).abs().maxCoeff() < 1e-14);

    const auto no_blur = make_blur_downsample<double>(4, 4, 0.0, 2);
    VectorXd img(16);
    for (int i = 0; i < 16; ++i) img(i) = i * i;
    const VectorXd means = no_blur.apply(img);
    const VectorXd expect{{(0 + 1 + 16 + 25) / 4.0, (4 + 9 + 36 + 49) / 4.0, (64 + 81 + 144 + 169) / 4.0,
                           (100 + 121 + 196 + 225) / 4.0}};
    CHECK((means - expect).cwiseAbs().maxCoeff() < 1e-12);

    const VectorXd up = make_block_average<double>(4, 4, 2).adjoint_apply(VectorXd{{4, 8, 12, 16}});
    CHECK(up(0) == 1.0);
    CHECK(up(5) == 1.0);
    CHECK(up(15) == 4.0);
    CHECK_THROWS_AS(make_block_average<double>(5, 4, 2), std::invalid_argument);
    Rng rng(8);
    const VectorXd r = rng.normal_vector(25);
    CHECK(make_gaussian_blur<double>(5, 5, 0.0).apply(r) == r);
}

TEST_CASE("composite adjoint is the reversed composition of adjoints") {
    Rng rng(3);
    const auto s = make_gaussian_blur<double>(8, 8, 1.0);
    const auto d = make_block_average<double>(8, 8, 2);
    const auto ds = compose(d, s);
    const VectorXd y = rng.normal_vector(16);
    CHECK(ds.adjoint_apply(y) == s.adjoint_apply(d.adjoint_apply(y)));
    CHECK(rel_adjoint_gap(ds, rng) < 1e-10);
}

TEST_CASE("adjoint identity and linearity for every operator kind") {
    Rng rng(11);
    const auto geom = FanBeamGeometry::random_views(16, 5, 20, 4);
    const std::vector<LinearMap<double>> ops{
        make_identity<double>(6),
        make_dense<double>(rng.normal_matrix(5, 7)),
        make_sparse<double>(fan_beam_matrix(geom)),
        make_difference_1d<double>(30),
        make_gradient_2d<double>(7, 9),
        make_gaussian_blur<double>(9, 7, 1.3),
        make_block_average<double>(9, 6, 3),
        make_blur_downsample<double>(8, 8, 1.0, 2),
        scaled(0.5, make_gradient_2d<double>(4, 5)),
    };
    for (const auto& op : ops) {
        CAPTURE(to_string(op.kind()));
        double worst = 0;
        for (int i = 0; i < 100; ++i) worst = std::max(worst, rel_adjoint_gap(op, rng));
        CHECK(worst < 1e-10);

        const VectorXd x = rng.normal_vector(op.in_dim()), z = rng.normal_vector(op.in_dim());
        const VectorXd lhs = op.apply(VectorXd(2.0 * x - 3.0 * z));
        const VectorXd rhs = 2.0 * op.apply(x) - 3.0 * op.apply(z);
        CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));

        const double norm = estimate_norm(op);
        for (int i = 0; i < 10; ++i) {
            const VectorXd p = rng.normal_vector(op.in_dim());
            CHECK(op.apply(p).norm() <= (1 + 1e-6) * norm * p.norm());
        }
    }
}

TEST_CASE("norm estimates against closed forms and a dense SVD") {
    CHECK(std::abs(estimate_norm(make_identity<double>(10)) - 1.0) < 1e-8);
    const double d200 = estimate_norm(make_difference_1d<double>(200));
    CHECK(std::abs(d200 * d200 - (2.0 - 2.0 * std::cos(199.0 * M_PI / 200.0))) < 1e-4);
    const double g64 = power_iteration(make_gradient_2d<double>(64, 64)).eigenvalue;
    CHECK(g64 >= 7.9);
    CHECK(g64 <= 8.0);

    Rng rng(5);
    const MatrixXd a = rng.normal_matrix(20, 30);
    const double svd = Eigen::JacobiSVD<MatrixXd>(a).singularValues()(0);
    CHECK(std::abs(estimate_norm(make_dense<double>(a)) - svd) / svd < 1e-6);
    CHECK(estimate_norm(make_dense<double>(MatrixXd::Zero(3, 4))) == 0.0);
    CHECK_THROWS(estimate_norm(make_identity<double>(3), -1.0));

    // same seed, same estimate
    CHECK(estimate_norm(make_dense<double>(a)) == estimate_norm(make_dense<double>(a)));
}

TEST_CASE("fan-beam projector reproduces analytic chord lengths") {
    const Eigen::Index n = 16;
    const auto geom = FanBeamGeometry::random_views(n, 8, 64, 21);
    const SparseMatrix<double> a = fan_beam_matrix(geom);
    CHECK(a.rows() == 8 * 64);
    CHECK(a.cols() == n * n);

    // unit pixel (8, 8) spans x in [0, 1], y in [-1, 0]
    VectorXd e = VectorXd::Zero(n * n);
    e(8 * n + 8) = 1.0;
    const VectorXd proj = a * e;
    int hits = 0;
    for (Eigen::Index v = 0; v < geom.views; ++v) {
        for (Eigen::Index k = 0; k < geom.rays; ++k) {
            const double chord = slab_chord(fan_ray(geom, v, k), 0.0, 1.0, -1.0, 0.0);
            CHECK(std::abs(proj(v * geom.rays + k) - chord) < 1e-12);
            hits += chord > 0 ? 1 : 0;
        }
    }
    CHECK(hits >= 3);

    // whole-image chords sum the per-pixel lengths
    const VectorXd ones = a * VectorXd::Ones(n * n);
    for (Eigen::Index k = 0; k < geom.rays; ++k)
        CHECK(std::abs(ones(k) - slab_chord(fan_ray(geom, 0, k), -8.0, 8.0, -8.0, 8.0)) < 1e-10);

    CHECK((a * VectorXd::Zero(n * n)).isZero());
    Rng rng(2);
    CHECK(rel_adjoint_gap(make_sparse<double>(a), rng) < 1e-10);
}
