#pragma once

#include "nsbiot/common.hpp"

#include <vector>

namespace nsbiot {

/// Points on the reference triangle {x, y >= 0, x + y <= 1} or on [0, 1]
/// (segment rules store the parameter in x).
struct QuadRule {
    int dim = 2;
    std::vector<Vec2> points;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
};

inline constexpr int kVolumeOrder = 4;
inline constexpr int kInterfaceOrder = 5;

/// Exact for bivariate polynomials of total degree <= order, 1 <= order <= 6.
const QuadRule& triangle_rule(int order);

/// Gauss-Legendre on [0, 1], exact to degree `order`, 1 <= order <= 8.
const QuadRule& segment_rule(int order);

/// n-point Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

} // namespace nsbiot
