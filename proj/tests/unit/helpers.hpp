#pragma once

#include "roughdrift/field.hpp"

#include <cmath>
#include <string>

namespace test {

using namespace roughdrift;

inline DriftField constant_drift(int dim, double c) {
    return DriftField("constant", dim,
                      [dim, c](double, std::span<const double>, std::span<double> out) {
                          for (int a = 0; a < dim; ++a) out[a] = c;
                      },
                      {7.0, 15.0});
}

inline DriftField drift_1d(const std::string& name, double (*f)(double)) {
    return DriftField(name, 1, [f](double, std::span<const double> x, std::span<double> out) { out[0] = f(x[0]); },
                      {7.0, 15.0});
}

inline SpaceTimeBox interval(double lo, double hi, std::size_t nodes, double T = 1.0, std::size_t time_nodes = 2) {
    SpaceTimeBox b;
    b.dim = 1;
    b.horizon = T;
    b.lower[0] = lo;
    b.upper[0] = hi;
    b.nodes[0] = nodes;
    b.time_nodes = time_nodes;
    b.validate();
    return b;
}

}  // namespace test
