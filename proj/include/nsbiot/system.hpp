#pragma once

#include "nsbiot/assembly.hpp"

#include <functional>
#include <vector>

namespace nsbiot {

/// Coefficients of all nine fields at one time level, in the block layout of
/// the discretization, plus the accumulated displacement (P0, two per
/// poroelastic triangle).
struct SystemState {
    double t = 0;
    int step = 0;
    Vector x;
    Vector eta;
};

struct NewtonConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_iters = 15;
    // Also stop once |dx| <= step_tol |x|; 0 disables. Useful when the
    // residual norm is dominated by badly scaled rows.
    double step_tol = 0.0;

    void validate() const;
};

struct NewtonResult {
    Vector x;
    int iterations = 0;
    std::vector<double> residuals; // residual norm before each iteration and after the last
};

/// F(x) and, when J is non-null, its derivative.
using ResidualFn = std::function<void(const Vector& x, Vector& F, SparseMatrix* J)>;

/// Newton's method from x0. Stops when |F| <= max(abs_tol, rel_tol |F(x0)|),
/// or on the step_tol update test, after at least one iteration. Throws StepFailure after max_iters.
NewtonResult newton_solve(const ResidualFn& f, Vector x0, const NewtonConfig& cfg);

/// Direct sparse solve. Throws SingularMatrix with the failing pivot, or Error
/// when the residual check |Ax - b| <= 1e-10 (|A| |x| + |b|) fails.
Vector solve_linear(const SparseMatrix& a, const Vector& b);
Vector solve_linear(const BlockSystem& s);

/// Backward Euler with Newton per step. Linear operators are assembled once.
class TimeStepper {
public:
    TimeStepper(const Discretization& disc, const PhysicalParams& params, ProblemData data, double dt,
                NewtonConfig newton = {}, AssemblyOptions opts = {});

    struct Result {
        SystemState state;
        int iterations = 0;
        std::vector<double> residuals;
    };

    /// Advance `prev` by dt. Throws StepFailure carrying the step index.
    Result step(const SystemState& prev) const;

    /// Residual of the discrete system at time level t for candidate x given
    /// the previous state (essential rows included as x - g).
    Vector residual(const Vector& x, const SystemState& prev, double t) const;

    const Assembler& assembler() const { return asm_; }
    double dt() const { return dt_; }
    const ProblemData& data() const { return data_; }

private:
    const Discretization& disc_;
    PhysicalParams params_;
    ProblemData data_;
    double dt_;
    NewtonConfig newton_;
    Assembler asm_;
    SparseMatrix lhs_;  // linear part of the step operator
    SparseMatrix mass_; // storage + inertia, scaled by 1/dt
    SparseMatrix spring_;

    Vector step_rhs(const SystemState& prev, double t) const;
};

/// One step without keeping a stepper around.
TimeStepper::Result backward_euler_step(const SystemState& prev, double dt, const Discretization& disc,
                                        const PhysicalParams& params, const ProblemData& data,
                                        const NewtonConfig& newton = {}, AssemblyOptions opts = {});

// ---------------------------------------------------------------------------
// Initial states
// ---------------------------------------------------------------------------

/// Closed-form fields used to interpolate an initial (or reference) state.
/// Empty callables mean zero.
struct FieldSet {
    TensorField sigma_p;
    ScalarField p_p;
    VectorField u_p;
    TensorField T_f;
    VectorField u_f;
    VectorField theta;
    ScalarField lambda;
    VectorField u_s;
    ScalarField gamma_p;
    VectorField eta;
};

enum class InitialMode { analytic, constants, zero };

SystemState interpolate_state(const Discretization& disc, const FieldSet& fields, double t);
SystemState zero_state(const Discretization& disc, double t = 0);
/// Rest state with uniform pressure: p_p = lambda = p0, sigma_p = -alpha_p p0 I,
/// T_f = -p0 I, everything else zero.
SystemState constant_state(const Discretization& disc, const PhysicalParams& params, double p0, double t = 0);

/// s0 |p_p|^2 + |A^{1/2}(sigma_p + alpha_p p_p I)|^2, i.e. x^T E x.
double storage_energy(const Assembler& a, const Vector& x);

} // namespace nsbiot
