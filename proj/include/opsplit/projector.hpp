#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "opsplit/types.hpp"

namespace opsplit {

/// 2D fan-beam geometry in pixel units. The image occupies [-N/2, N/2]^2 with pixel
/// (r, c) centered at (c - N/2 + 0.5, N/2 - r - 0.5). The source sits on a circle of
/// radius source_radius; rays are equiangular and the fan just covers the image's
/// circumscribed circle.
struct FanBeamGeometry {
    Eigen::Index side = 0;
    Eigen::Index views = 0;
    Eigen::Index rays = 0;
    double source_radius = 0;
    double half_fan = 0;
    std::vector<double> view_angles;  // radians

    /// View angles drawn uniformly from [0, 2 pi) on the Geometry stream; source radius 2 N.
    static FanBeamGeometry random_views(Eigen::Index side, Eigen::Index views, Eigen::Index rays, std::uint64_t seed);

    Eigen::Index row_count() const { return views * rays; }
};

struct Ray {
    Eigen::Vector2d origin;
    Eigen::Vector2d direction;  // unit length
};

Ray fan_ray(const FanBeamGeometry& geom, Eigen::Index view, Eigen::Index ray);

/// Siddon-style traversal: (flattened pixel index, intersection length) for every pixel
/// the ray passes through with positive length.
std::vector<std::pair<Eigen::Index, double>> trace_ray(Eigen::Index side, const Ray& ray);

/// views*rays x side^2 system matrix of exact intersection lengths.
SparseMatrix<double> fan_beam_matrix(const FanBeamGeometry& geom);

}  // namespace opsplit
