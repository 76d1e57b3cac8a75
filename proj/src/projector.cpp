#include "opsplit/projector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "opsplit/rng.hpp"

namespace opsplit {

FanBeamGeometry FanBeamGeometry::random_views(Eigen::Index side, Eigen::Index views, Eigen::Index rays,
                                              std::uint64_t seed) {
    if (side < 1 || views < 1 || rays < 1) throw std::invalid_argument("fan beam: side, views and rays must be positive");
    FanBeamGeometry g;
    g.side = side;
    g.views = views;
    g.rays = rays;
    g.source_radius = 2.0 * static_cast<double>(side);
    g.half_fan = std::asin(static_cast<double>(side) / std::numbers::sqrt2 / g.source_radius);
    Rng rng(seed, Rng::Stream::Geometry);
    g.view_angles.resize(static_cast<std::size_t>(views));
    for (double& a : g.view_angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return g;
}

Ray fan_ray(const FanBeamGeometry& geom, Eigen::Index view, Eigen::Index ray) {
    const double theta = geom.view_angles.at(static_cast<std::size_t>(view));
    const double offset =
        -geom.half_fan + (static_cast<double>(ray) + 0.5) * 2.0 * geom.half_fan / static_cast<double>(geom.rays);
    Ray r;
    r.origin = geom.source_radius * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    const double phi = theta + std::numbers::pi + offset;
    r.direction = Eigen::Vector2d(std::cos(phi), std::sin(phi));
    return r;
}

std::vector<std::pair<Eigen::Index, double>> trace_ray(Eigen::Index side, const Ray& ray) {
    const double half = static_cast<double>(side) / 2.0;
    double t_in = -std::numeric_limits<double>::infinity();
    double t_out = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 2; ++axis) {
        const double o = ray.origin(axis), d = ray.direction(axis);
        if (std::abs(d) < 1e-15) {
            if (o <= -half || o >= half) return {};
            continue;
        }
        double t0 = (-half - o) / d, t1 = (half - o) / d;
        if (t0 > t1) std::swap(t0, t1);
        t_in = std::max(t_in, t0);
        t_out = std::min(t_out, t1);
    }
    if (!(t_out > t_in)) return {};

    std::vector<double> ts{t_in, t_out};
    for (int axis = 0; axis < 2; ++axis) {
        const double o = ray.origin(axis), d = ray.direction(axis);
        if (std::abs(d) < 1e-15) continue;
        for (Eigen::Index k = 1; k < side; ++k) {
            const double t = (static_cast<double>(k) - half - o) / d;
            if (t > t_in && t < t_out) ts.push_back(t);
        }
    }
    std::sort(ts.begin(), ts.end());

    std::vector<std::pair<Eigen::Index, double>> hits;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double len = ts[i + 1] - ts[i];
        if (len <= 1e-12) continue;
        const double tm = 0.5 * (ts[i] + ts[i + 1]);
        const double x = ray.origin(0) + tm * ray.direction(0);
        const double y = ray.origin(1) + tm * ray.direction(1);
        const auto col = static_cast<Eigen::Index>(std::floor(x + half));
        const auto row = static_cast<Eigen::Index>(std::floor(half - y));
        if (col < 0 || col >= side || row < 0 || row >= side) continue;
        hits.emplace_back(row * side + col, len);
    }
    return hits;
}

SparseMatrix<double> fan_beam_matrix(const FanBeamGeometry& geom) {
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(geom.row_count() * geom.side * 2));
    for (Eigen::Index v = 0; v < geom.views; ++v) {
        for (Eigen::Index k = 0; k < geom.rays; ++k) {
            const Eigen::Index row = v * geom.rays + k;
            for (const auto& [pixel, len] : trace_ray(geom.side, fan_ray(geom, v, k)))
                entries.emplace_back(row, pixel, len);
        }
    }
    SparseMatrix<double> a(geom.row_count(), geom.side * geom.side);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();
    return a;
}

}  // namespace opsplit
