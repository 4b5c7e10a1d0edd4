#include "roughdrift/quadrature.hpp"

#include "roughdrift/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace roughdrift {

namespace {

template <unsigned N>
QuadratureRule unit_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    QuadratureRule r;
    // Boost stores the nonnegative half; zero (odd N) comes first.
    for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0) continue;
        r.nodes.push_back(0.5 * (1.0 - x[i]));
        r.weights.push_back(0.5 * w[i]);
    }
    if (N % 2 == 1) {
        r.nodes.push_back(0.5);
        r.weights.push_back(0.5 * w[0]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) continue;
        r.nodes.push_back(0.5 * (1.0 + x[i]));
        r.weights.push_back(0.5 * w[i]);
    }
    return r;
}

}  // namespace

QuadratureRule gauss_legendre_unit(std::size_t points) {
    switch (points) {
        case 1: return {{0.5}, {1.0}};
        case 2: return unit_rule<2>();
        case 3: return unit_rule<3>();
        case 4: return unit_rule<4>();
        case 5: return unit_rule<5>();
        case 6: return unit_rule<6>();
        case 7: return unit_rule<7>();
        case 8: return unit_rule<8>();
        case 10: return unit_rule<10>();
        case 16: return unit_rule<16>();
        case 20: return unit_rule<20>();
        default: break;
    }
    fail(ErrorKind::invalid_argument, "gauss_legendre_unit: unsupported order " + std::to_string(points));
}

QuadratureRule composite_gauss(double a, double b, std::size_t panels, std::size_t points) {
    require(panels >= 1, "composite_gauss: need at least one panel");
    const auto unit = gauss_legendre_unit(points);
    const double h = (b - a) / static_cast<double>(panels);
    QuadratureRule r;
    r.nodes.reserve(panels * points);
    r.weights.reserve(panels * points);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        for (std::size_t q = 0; q < unit.nodes.size(); ++q) {
            r.nodes.push_back(lo + h * unit.nodes[q]);
            r.weights.push_back(h * unit.weights[q]);
        }
    }
    return r;
}

}  // namespace roughdrift
