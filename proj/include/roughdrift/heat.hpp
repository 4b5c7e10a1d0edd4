#pragma once

#include "roughdrift/field.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace roughdrift {

struct HeatOptions {
    double damping = 0.0;  // lambda >= 0
    bool hessian = false;
    std::size_t gauss_points = 3;  // per time cell
    Exponents exponents{};         // used for the forcing norm
};

/// Right-hand side of the backward heat equation: either an evaluator,
/// sampled at the exact quadrature times, or a grid field on the solve box,
/// read piecewise constant in time.
class Forcing {
public:
    Forcing(FieldFn f);    // NOLINT(google-explicit-constructor)
    Forcing(GridField g);  // NOLINT(google-explicit-constructor)

    int dim() const;
    std::size_t components() const;
    const GridField* grid() const { return std::get_if<GridField>(&src_); }
    const FieldFn* function() const { return std::get_if<FieldFn>(&src_); }

    MixedNorm norm(const SpaceTimeBox& box, Exponents e) const;

private:
    std::variant<FieldFn, GridField> src_;
};

/// Solution of du/dt + (1/2) Lap u - lambda u = phi, u(T) = 0, on the grid.
///
/// grad holds d_j u_c at component c*d + j and hessian holds d_j d_k u_c at
/// c*d*d + j*d + k.
struct HeatSolution {
    GridField u;
    GridField grad;
    std::optional<GridField> hessian;
    MixedNorm forcing_norm;
    double damping = 0.0;
};

/// Duhamel solve
///   u(t) = - int_0^{T-t} e^{-lambda tau} G_tau * phi(t + tau) dtau
/// with Gauss–Legendre quadrature on each time cell (tau = dt xi^2 on the
/// first cell) and discrete Gaussian kernels whose moments up to order four
/// match the heat semigroup. Derivatives come from differentiated kernels.
/// Outside the box the forcing is continued linearly along each axis.
HeatSolution solve_backward_heat(const Forcing& phi, const SpaceTimeBox& box, const HeatOptions& opts = {});

GridField gradient_field(const HeatSolution& sol);

struct RegularityConstants {
    double horizon = 0.0;
    double gradient = 0.0;  // sup |grad u| / ||phi||
    double hessian = 0.0;   // ||D^2 u|| / ||phi||
    double grad_sup = 0.0;
    double hess_norm = 0.0;
    double forcing_norm = 0.0;
    bool zero_norm = false;
};

/// One solve per horizon on `box` with its horizon replaced; results sorted
/// by increasing horizon. `phi` must be an evaluator.
std::vector<RegularityConstants> measure_constants(const FieldFn& phi, const SpaceTimeBox& box,
                                                   std::vector<double> horizons, HeatOptions opts = {});

/// Discrete 1-D kernel of derivative order 0, 1 or 2 for variance tau on a
/// grid of spacing h: out[x] = sum_k w[k + K] in[x - k h].
struct Kernel1D {
    int half_width = 0;
    std::vector<double> w;
};
Kernel1D heat_kernel_1d(double tau, double h, int order);

}  // namespace roughdrift
