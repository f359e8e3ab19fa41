#pragma once

#include "nsbiot/discretization.hpp"
#include "nsbiot/problem.hpp"

namespace nsbiot {

// Canonical interpolants into the discrete spaces: edge moments for BDM1,
// nodal values for continuous P1, cell means for P0 and the L2 projection on
// each poroelastic trace segment for the multipliers.

Vector interpolate_bdm1_vec(const FESpace& s, const VectorField& f, double t);
Vector interpolate_bdm1_mat(const FESpace& s, const TensorField& f, double t);
Vector interpolate_p1_vec(const FESpace& s, const VectorField& f, double t);
Vector interpolate_p1_scalar(const FESpace& s, const ScalarField& f, double t);
Vector project_p0_scalar(const FESpace& s, const ScalarField& f, double t);
Vector project_p0_vec(const FESpace& s, const VectorField& f, double t);
Vector project_trace_scalar(const InterfaceTraces& tr, const ScalarField& f, double t);
Vector project_trace_vec(const InterfaceTraces& tr, const VectorField& f, double t);

} // namespace nsbiot
