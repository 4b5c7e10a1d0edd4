#include "roughdrift/box.hpp"

#include "roughdrift/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace roughdrift {

SpaceTimeBox SpaceTimeBox::cube(int dim, double horizon, double half_width,
                                std::size_t nodes_per_axis, std::size_t time_nodes) {
    SpaceTimeBox box;
    box.dim = dim;
    box.horizon = horizon;
    box.time_nodes = time_nodes;
    for (int a = 0; a < kMaxDim; ++a) {
        box.lower[a] = a < dim ? -half_width : 0.0;
        box.upper[a] = a < dim ? half_width : 0.0;
        box.nodes[a] = a < dim ? nodes_per_axis : 1;
    }
    box.validate();
    return box;
}

void SpaceTimeBox::validate() const {
    require(dim >= 1 && dim <= kMaxDim, "box: dimension must be 1, 2 or 3");
    require(std::isfinite(horizon) && horizon > 0.0, "box: horizon must be positive");
    require(time_nodes >= 2, "box: time resolution must be >= 2");
    for (int a = 0; a < dim; ++a) {
        require(nodes[a] >= 2, "box: spatial resolution must be >= 2 on axis " + std::to_string(a));
        require(std::isfinite(lower[a]) && std::isfinite(upper[a]) && upper[a] > lower[a],
                "box: empty interval on axis " + std::to_string(a));
    }
}

double SpaceTimeBox::min_spacing() const {
    double h = spacing(0);
    for (int a = 1; a < dim; ++a) h = std::min(h, spacing(a));
    return h;
}

std::size_t SpaceTimeBox::spatial_size() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= nodes[a];
    return n;
}

std::size_t SpaceTimeBox::stride(int axis) const {
    std::size_t s = 1;
    for (int a = dim - 1; a > axis; --a) s *= nodes[a];
    return s;
}

void SpaceTimeBox::node_position(std::size_t flat, std::span<double> x) const {
    for (int a = dim - 1; a >= 0; --a) {
        const std::size_t i = flat % nodes[a];
        flat /= nodes[a];
        x[a] = coord(a, i);
    }
}

std::size_t SpaceTimeBox::time_index(double t) const {
    if (t <= 0.0) return 0;
    // Path times are accumulated as k*h; absorb rounding just below a node.
    const double s = t / dt() + 1e-9;
    const auto i = static_cast<std::size_t>(std::floor(s));
    return std::min(i, time_nodes - 1);
}

double SpaceTimeBox::volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= upper[a] - lower[a];
    return v;
}

bool SpaceTimeBox::contains(std::span<const double> x) const {
    for (int a = 0; a < dim; ++a) {
        if (x[a] < lower[a] || x[a] > upper[a]) return false;
    }
    return true;
}

bool SpaceTimeBox::same_grid(const SpaceTimeBox& o) const {
    if (dim != o.dim || time_nodes != o.time_nodes) return false;
    if (std::abs(horizon - o.horizon) > 1e-12 * horizon) return false;
    for (int a = 0; a < dim; ++a) {
        if (nodes[a] != o.nodes[a] || lower[a] != o.lower[a] || upper[a] != o.upper[a]) return false;
    }
    return true;
}

}  // namespace roughdrift
