#pragma once

#include "nsbiot/compliance.hpp"
#include "nsbiot/discretization.hpp"
#include "nsbiot/params.hpp"
#include "nsbiot/problem.hpp"
#include "nsbiot/quadrature.hpp"

#include <vector>

namespace nsbiot {

struct AssemblyOptions {
    int volume_order = kVolumeOrder;
    int interface_order = kInterfaceOrder;
    int threads = 1;
};

enum class InterfaceMode {
    merged, // integrate over the common refinement of both traces
    direct, // integrate over the poroelastic partition; requires matching grids
};

struct BlockSystem {
    SparseMatrix matrix;
    Vector rhs;
    BlockLayout layout;
};

struct EssentialBC {
    std::vector<Index> dofs; // sorted, unique
    std::vector<double> values;
};

struct ConvectiveTerm {
    Vector residual;
    SparseMatrix jacobian;
};

/// Assembles every form of the coupled problem into the global block layout.
/// Each method returns an independent piece so the time stepper can scale
/// and combine them.
class Assembler {
public:
    Assembler(const Discretization& disc, const PhysicalParams& params, AssemblyOptions opts = {});

    /// (A(sigma + alpha p I), tau + alpha w I) + s0 (p, w). Scaled by 1/dt in time.
    SparseMatrix storage() const;

    /// All remaining linear forms except the merged-trace interface coupling:
    /// Darcy, rotation and displacement couplings, the augmented fluid forms
    /// and the fluid-side trace terms <T n_f, v> - <R n_f, u>.
    SparseMatrix static_blocks() const;

    /// BJS slip and Lagrange multiplier couplings across the interface.
    SparseMatrix interface_blocks(InterfaceMode mode = InterfaceMode::merged) const;

    /// Terms multiplied by 1/dt when dynamic options are on:
    /// rho (u, v) - kappa1 rho (u, div R) and rho_p (u_s, v_s).
    SparseMatrix inertia() const;

    /// -beta (u_s, v_s); the stepper scales it by dt and moves the previous
    /// displacement to the right-hand side.
    SparseMatrix spring() const;

    /// P0 mass matrix (u_s, v_s) in the global layout.
    SparseMatrix displacement_mass() const;

    /// Convective functional at x and, optionally, its derivative.
    ConvectiveTerm convective(const Vector& x, bool with_jacobian = true) const;

    /// Volume sources, natural boundary data and interface residual data at t.
    Vector rhs(const ProblemData& data, double t) const;

    /// Prescribed values of the essentially constrained DOFs at t.
    EssentialBC essential(const ProblemData& data, double t) const;

    const Discretization& disc() const { return disc_; }
    const PhysicalParams& params() const { return params_; }
    const AssemblyOptions& options() const { return opts_; }

private:
    const Discretization& disc_;
    PhysicalParams params_;
    AssemblyOptions opts_;
    ComplianceOp compliance_;
};

// Free-function entry points.
BlockSystem assemble_static_blocks(const Discretization& disc, const PhysicalParams& params,
                                   AssemblyOptions opts = {});
SparseMatrix assemble_interface_blocks(const Discretization& disc, const PhysicalParams& params,
                                       InterfaceMode mode = InterfaceMode::merged, AssemblyOptions opts = {});
ConvectiveTerm assemble_convective(const Vector& x, const Discretization& disc, const PhysicalParams& params,
                                   AssemblyOptions opts = {});
Vector assemble_rhs(const ProblemData& data, const Discretization& disc, const PhysicalParams& params, double t,
                    AssemblyOptions opts = {});

/// Moments of g.n_g on edge e against {1, 2s - 1}, s running from the lower
/// to the higher global vertex; `flux(x)` returns g.n_out.
std::array<double, 2> edge_flux_moments(const Mesh& mesh, Index e, Index tri,
                                        const std::function<double(const Vec2&, const Vec2&)>& flux);

} // namespace nsbiot
