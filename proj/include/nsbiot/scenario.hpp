#pragma once

#include "nsbiot/config.hpp"

namespace nsbiot {

/// Everything needed to time-step one problem.
struct Scenario {
    std::string name;
    Discretization disc;
    PhysicalParams params;
    ProblemData data;
    SystemState initial;
};

/// Example 3 parameters (kPa, Mg/m^3, m, s). "hard" or "soft" selects the Lame pair.
PhysicalParams filter_params(const std::string& material);

/// 0.75 x 0.25 channel with the filter [0.25, 0.5] x [0, 0.2], from one
/// structured (30 r) x (10 r) grid split by subdomain, so the interface grids
/// match. Fluid: inflow left, outflow right, no-slip top and bottom.
/// Filter: no-flow, fixed bottom.
std::pair<Mesh, Mesh> filter_meshes(int refine);

/// Zero sources; T_f n = -delta_p n on the inflow, 0 on the outflow; no slip.
/// Solved in deviation from the reference pressure.
ProblemData filter_data(double delta_p);

/// Poroelastic block [0,1]^2 without fluid: clamped bottom and sides with no
/// flow, drained top sheared by u_s = (lid sin^2(pi x), 0). The driving is
/// smooth and flux-free, so in the nearly incompressible limit the pressure
/// is smooth and any grid-scale jump is a discretization artifact.
struct ColumnSetup {
    int nx = 20, ny = 20;
    double lid = 1.0;
};
Scenario biot_column(const PhysicalParams& params, const ColumnSetup& setup = {});

/// Max over interior edges of |p_i - p_j| divided by (max p - min p) for an
/// elementwise constant field. Zero for a constant field.
double oscillation_indicator(const Mesh& mesh, const Eigen::Ref<const Vector>& p);

/// Meshes, data and initial state for a scenario. For the manufactured
/// solution this is the first convergence level.
Scenario build_scenario(const ScenarioConfig& cfg);

} // namespace nsbiot
