#pragma once

#include <cstddef>
#include <vector>

namespace roughdrift {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss–Legendre rule mapped to [0, 1]. Supported orders: 1..8, 10, 16, 20.
QuadratureRule gauss_legendre_unit(std::size_t points);

/// Composite Gauss–Legendre on [a, b] with `panels` equal panels.
QuadratureRule composite_gauss(double a, double b, std::size_t panels, std::size_t points);

}  // namespace roughdrift
