#pragma once

#include <array>

#include "opsplit/types.hpp"

namespace opsplit {

struct Ellipse {
    double intensity;
    double semi_x;
    double semi_y;
    double center_x;
    double center_y;
    double angle_deg;
};

/// The ten-ellipse modified Shepp-Logan table (Toft's contrast-enhanced intensities) on
/// the square [-1, 1]^2, y pointing up.
const std::array<Ellipse, 10>& shepp_logan_ellipses();

/// side x side phantom, flattened row-major with row 0 at the top. Each pixel takes the
/// sum of the intensities of the ellipses containing its center, clipped to [0, 1].
VectorXd shepp_logan(Eigen::Index side);

}  // namespace opsplit
