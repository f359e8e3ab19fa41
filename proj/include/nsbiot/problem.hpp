#pragma once

#include "nsbiot/common.hpp"

#include <cstdint>
#include <functional>

namespace nsbiot {

using ScalarField = std::function<double(const Vec2& x, double t)>;
using VectorField = std::function<Vec2(const Vec2& x, double t)>;
using TensorField = std::function<Mat2(const Vec2& x, double t)>;

struct BoundaryPoint {
    Vec2 x;
    Vec2 n;                // outward normal of the owning subdomain; n_f on the interface
    std::uint32_t tag = 0; // boundary tag flags of the edge
    double t = 0;
};

using BoundaryScalar = std::function<double(const BoundaryPoint&)>;
using BoundaryVector = std::function<Vec2(const BoundaryPoint&)>;

/// Data of one problem. Empty callables mean zero.
struct ProblemData {
    // Volume sources.
    VectorField f_f;
    VectorField f_p;
    ScalarField q_p;

    // Fluid: velocity on fluid_dirichlet (essential, also enters the stress
    // row naturally) and traction T_f n on fluid_neumann/inflow/outflow.
    VectorField u_f_boundary;
    BoundaryVector fluid_traction;

    // Darcy: pressure on darcy_dirichlet (natural), flux u_p.n on darcy_neumann.
    ScalarField p_p_boundary;
    BoundaryScalar darcy_flux;

    // Elasticity: velocity d_t eta on elast_dirichlet (natural), traction
    // sigma_p n on elast_neumann.
    VectorField u_s_boundary;
    BoundaryVector solid_traction;

    // Interface residual data; all receive n = n_f. Zero for physical problems,
    // nonzero only when a manufactured solution violates the transmission
    // conditions.
    BoundaryVector g_f; // fluid momentum row
    BoundaryVector g_s; // structure velocity trace row
    BoundaryScalar g_m; // interface mass row
};

} // namespace nsbiot
