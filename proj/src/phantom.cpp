#include "opsplit/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace opsplit {

const std::array<Ellipse, 10>& shepp_logan_ellipses() {
    static const std::array<Ellipse, 10> table{{
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
        {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
        {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
        {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
        {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
        {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
        {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
        {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
        {0.1, 0.023, 0.023, 0.0, -0.605, 0.0},
        {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
    }};
    return table;
}

VectorXd shepp_logan(Eigen::Index side) {
    if (side < 1) throw std::invalid_argument("shepp_logan: side must be positive");
    VectorXd img = VectorXd::Zero(side * side);
    const double n = static_cast<double>(side);
    for (const Ellipse& e : shepp_logan_ellipses()) {
        const double phi = e.angle_deg * std::numbers::pi / 180.0;
        const double c = std::cos(phi), s = std::sin(phi);
        for (Eigen::Index r = 0; r < side; ++r) {
            const double y = 1.0 - 2.0 * (static_cast<double>(r) + 0.5) / n;
            for (Eigen::Index col = 0; col < side; ++col) {
                const double x = 2.0 * (static_cast<double>(col) + 0.5) / n - 1.0;
                const double dx = x - e.center_x, dy = y - e.center_y;
                const double u = (dx * c + dy * s) / e.semi_x;
                const double v = (-dx * s + dy * c) / e.semi_y;
                if (u * u + v * v <= 1.0) img(r * side + col) += e.intensity;
            }
        }
    }
    return img.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace opsplit
