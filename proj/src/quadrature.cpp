#include "nsbiot/quadrature.hpp"

#include <array>
#include <cmath>
#include <string>

namespace nsbiot {

namespace {

// P_n(z) and P_{n-1}(z) by the three-term recurrence.
void legendre(int n, double z, double& pn, double& pnm1) {
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    pn = p1;
    pnm1 = p0;
}

} // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pn, pnm1, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            legendre(n, z, pn, pnm1);
            dp = n * (z * pn - pnm1) / (z * z - 1.0);
            const double dz = pn / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        legendre(n, z, pn, pnm1);
        dp = n * (z * pn - pnm1) / (z * z - 1.0);
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
}

namespace {

QuadRule make_segment(int order) {
    std::vector<double> x, w;
    gauss_legendre(order / 2 + 1, x, w);
    QuadRule r;
    r.dim = 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.points.emplace_back(x[i], 0.0);
        r.weights.push_back(w[i]);
    }
    return r;
}

// Collapsed tensor rule: x = a, y = b (1 - a), dx dy = (1 - a) da db.
QuadRule make_triangle(int order) {
    std::vector<double> xa, wa, xb, wb;
    gauss_legendre((order + 1) / 2 + 1, xa, wa);
    gauss_legendre(order / 2 + 1, xb, wb);
    QuadRule r;
    r.dim = 2;
    for (std::size_t i = 0; i < xa.size(); ++i) {
        for (std::size_t j = 0; j < xb.size(); ++j) {
            r.points.emplace_back(xa[i], xb[j] * (1.0 - xa[i]));
            r.weights.push_back(wa[i] * wb[j] * (1.0 - xa[i]));
        }
    }
    return r;
}

} // namespace

const QuadRule& triangle_rule(int order) {
    static const std::array<QuadRule, 6> rules = {make_triangle(1), make_triangle(2), make_triangle(3),
                                                  make_triangle(4), make_triangle(5), make_triangle(6)};
    if (order < 1 || order > 6)
        throw InvalidArgument("unsupported triangle quadrature order " + std::to_string(order));
    return rules[order - 1];
}

const QuadRule& segment_rule(int order) {
    static const std::array<QuadRule, 8> rules = {make_segment(1), make_segment(2), make_segment(3),
                                                  make_segment(4), make_segment(5), make_segment(6),
                                                  make_segment(7), make_segment(8)};
    if (order < 1 || order > 8)
        throw InvalidArgument("unsupported segment quadrature order " + std::to_string(order));
    return rules[order - 1];
}

} // namespace nsbiot
