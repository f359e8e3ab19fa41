#pragma once

#include "nsbiot/system.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace nsbiot {

/// Primal closed-form fields with the derivatives needed to build every
/// derived quantity and forcing term.
struct AnalyticSolution {
    VectorField u_f, dt_u_f, lap_u_f;
    TensorField grad_u_f; // row k = grad of component k
    ScalarField p_f;
    VectorField grad_p_f;
    ScalarField p_p, dt_p_p;
    VectorField grad_p_p;
    TensorField hess_p_p;
    VectorField eta, dt_eta, dtt_eta, grad_div_eta, lap_eta;
    TensorField grad_eta, dt_grad_eta;
};

/// u_f = e^t (sin pi x cos pi y, -sin pi y cos pi x),
/// p_f = e^t sin pi x cos(pi y / 2) + 2 pi cos pi t,
/// p_p = e^t sin pi x cos(pi y / 2), eta = sin pi t (-3x + cos y, y + 1).
AnalyticSolution example1_solution();

/// Every model field in closed form.
struct DerivedFields {
    VectorField u_f;
    TensorField grad_u_f;
    ScalarField p_f;
    TensorField sigma_f, T_f;
    VectorField div_T_f;
    TensorField sigma_p;
    VectorField div_sigma_p;
    ScalarField p_p;
    VectorField u_p;
    ScalarField div_u_p;
    VectorField u_s, eta;
    ScalarField gamma_p; // scalar of the skew part of grad u_s: (d_y u_s,x - d_x u_s,y) / 2
    VectorField theta;
    ScalarField lambda;
};

DerivedFields derive_fields(const AnalyticSolution& a, const PhysicalParams& p);

struct Forcing {
    VectorField f_f, f_p;
    ScalarField q_p;
};

/// f_f = rho (grad u_f) u_f - div sigma_f, f_p = -div sigma_p,
/// q_p = d_t (s0 p_p + alpha_p div eta) + div u_p.
Forcing forcing_terms(const AnalyticSolution& a, const PhysicalParams& p);

/// Forcing, boundary data for every tag family and the interface data that
/// make the analytic fields an exact solution of the coupled system.
ProblemData manufactured_problem(const AnalyticSolution& a, const PhysicalParams& p);

/// Closed forms in the shape used by interpolate_state.
FieldSet exact_fields(const DerivedFields& d);

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorField : int { T_f, u_f, p_f, sigma_p, p_p, u_p, u_s, gamma_p, eta, theta, lambda };
inline constexpr int kNumErrorFields = 11;
const char* error_field_name(ErrorField f);

/// Which mesh size a rate uses: fluid h_f, poroelastic h_p, or trace h_tp.
enum class SizeKind { fluid, poro, trace };
SizeKind rate_size(ErrorField f);
/// Time norm of each column: true for l-infinity, false for l2.
bool uses_max_in_time(ErrorField f);

/// Spatial norms: H(div) for T_f, sigma_p, u_p; H1 for u_f; L2 for the rest
/// (L2 on the interface for theta, lambda). gamma_p is measured as the skew
/// tensor [[0, g], [-g, 0]].
using FieldErrors = std::array<double, kNumErrorFields>;

FieldErrors spatial_errors(const Discretization& disc, const PhysicalParams& params, const SystemState& s,
                           const DerivedFields& exact, int order = 6);

/// The same norms of the exact fields themselves.
FieldErrors exact_norms(const Discretization& disc, const PhysicalParams& params, const DerivedFields& exact,
                        double t, int order = 6);

class ErrorAccumulator {
public:
    void add(const FieldErrors& e, double dt);
    FieldErrors result() const;
    int count() const { return count_; }

private:
    FieldErrors sum2_{}, max_{};
    int count_ = 0;
};

// ---------------------------------------------------------------------------
// Conservation checks
// ---------------------------------------------------------------------------

struct ConservationResidual {
    double darcy_mass = 0;      // max over elements, relative
    double solid_momentum = 0;  // max over elements and components, relative
};

/// Per-element residuals of the Darcy mass and poroelastic momentum balances
/// between two consecutive states, recomputed by quadrature.
ConservationResidual local_conservation(const Discretization& disc, const PhysicalParams& params,
                                        const ProblemData& data, const SystemState& prev, const SystemState& cur,
                                        int order = kVolumeOrder);

/// max over multiplier basis functions xi of
/// |<u_f.n_f + (theta + u_p).n_p, xi> - <g_m, xi>|, integrated on the merged trace.
double interface_mass_residual(const Discretization& disc, const ProblemData& data, const SystemState& s,
                               int order = kInterfaceOrder);

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

struct LevelSpec {
    int fluid_nx = 8, fluid_ny = 7;
    int poro_nx = 5, poro_ny = 5;
};

/// The frozen structured grids matching the published mesh sizes.
std::vector<LevelSpec> example1_levels();
/// Parse "8x7:5x5, 16x13:10x8", or a count N for the first N frozen levels.
std::vector<LevelSpec> parse_levels(const std::string& text);

/// Unit-square fluid over the unit-square poroelastic block with the
/// boundary conditions of the manufactured test.
std::pair<Mesh, Mesh> example1_meshes(const LevelSpec& level);

struct LevelResult {
    LevelSpec spec;
    double h_f = 0, h_p = 0, h_tp = 0;
    Index dofs = 0;
    FieldErrors errors{};
    double avg_newton = 0;
    int steps = 0;
    ConservationResidual conservation;
    double interface_residual = 0;
    std::vector<std::vector<double>> newton_history; // residual sequence per step
};

struct ConvergenceTable {
    std::vector<LevelResult> levels;
    /// rates[k][f] between levels k and k+1.
    std::vector<FieldErrors> rates() const;
    void write_csv(std::ostream& out) const;
};

struct StudyOptions {
    double dt = 1e-3;
    double T = 0.01;
    NewtonConfig newton;
    AssemblyOptions assembly;
    std::function<void(const std::string&)> log;
};

LevelResult run_mms_level(const LevelSpec& level, const AnalyticSolution& a, const PhysicalParams& params,
                          const StudyOptions& opts);

ConvergenceTable convergence_study(const std::vector<LevelSpec>& levels, const AnalyticSolution& a,
                                   const PhysicalParams& params, const StudyOptions& opts);

/// Number of steps in [0, T], requiring T to be an integer multiple of dt.
int step_count(double T, double dt);

} // namespace nsbiot
