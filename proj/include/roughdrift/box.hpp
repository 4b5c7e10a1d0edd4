#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace roughdrift {

inline constexpr int kMaxDim = 3;

/// Tensor grid on [0, T] x prod_a [lower_a, upper_a].
///
/// `nodes[a]` counts spatial nodes on axis a (endpoints included) and
/// `time_nodes` counts time nodes t_i = i * T / (time_nodes - 1), so both
/// t = 0 and t = T are grid times.
struct SpaceTimeBox {
    int dim = 1;
    double horizon = 1.0;
    std::array<double, kMaxDim> lower{};
    std::array<double, kMaxDim> upper{};
    std::array<std::size_t, kMaxDim> nodes{};
    std::size_t time_nodes = 2;

    /// Symmetric cube [-half_width, half_width]^dim.
    static SpaceTimeBox cube(int dim, double horizon, double half_width,
                             std::size_t nodes_per_axis, std::size_t time_nodes);

    /// Throws invalid-argument when the box violates its invariants.
    void validate() const;

    double spacing(int axis) const {
        return (upper[axis] - lower[axis]) / static_cast<double>(nodes[axis] - 1);
    }
    double min_spacing() const;
    double dt() const { return horizon / static_cast<double>(time_nodes - 1); }
    double time(std::size_t i) const { return dt() * static_cast<double>(i); }
    double coord(int axis, std::size_t i) const {
        return lower[axis] + spacing(axis) * static_cast<double>(i);
    }

    std::size_t spatial_size() const;
    /// Row-major stride of `axis` within one time slice (last axis fastest).
    std::size_t stride(int axis) const;
    void node_position(std::size_t flat, std::span<double> x) const;

    /// Index of the time node whose left-closed cell contains t.
    std::size_t time_index(double t) const;

    double volume() const;
    bool contains(std::span<const double> x) const;

    SpaceTimeBox with_horizon(double T) const {
        SpaceTimeBox b = *this;
        b.horizon = T;
        return b;
    }

    bool same_grid(const SpaceTimeBox& other) const;
};

}  // namespace roughdrift
