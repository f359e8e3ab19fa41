#include "nsbiot/system.hpp"

#include "nsbiot/interpolate.hpp"

#include <Eigen/SparseLU>
#ifdef NSBIOT_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <cmath>

namespace nsbiot {

void NewtonConfig::validate() const {
    if (!(abs_tol > 0)) throw ConfigError("newton.abs_tol", "must be positive");
    if (!(rel_tol > 0)) throw ConfigError("newton.rel_tol", "must be positive");
    if (max_iters < 1) throw ConfigError("newton.max_iters", "must be at least 1");
    if (!(step_tol >= 0)) throw ConfigError("newton.step_tol", "must be non-negative");
}

namespace {

Index first_zero_pivot(const SparseMatrix& a) {
    // Structural or numerical: a zero column leaves the pivot undefined.
    for (Index j = 0; j < a.cols(); ++j) {
        bool any = false;
        for (SparseMatrix::InnerIterator it(a, j); it; ++it)
            if (it.value() != 0.0) any = true;
        if (!any) return j;
    }
    return -1;
}

double matrix_norm_inf(const SparseMatrix& a) {
    Vector rows = Vector::Zero(a.rows());
    for (Index j = 0; j < a.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(a, j); it; ++it) rows[it.row()] += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

template <class Solver>
bool try_solve(Solver& s, const SparseMatrix& a, const Vector& b, Vector& x) {
    s.compute(a);
    if (s.info() != Eigen::Success) return false;
    x = s.solve(b);
    return s.info() == Eigen::Success && x.allFinite();
}

} // namespace

Vector solve_linear(const SparseMatrix& a, const Vector& b) {
    if (a.rows() != a.cols() || a.rows() != b.size()) throw InvalidArgument("solve_linear: dimension mismatch");
    if (a.rows() == 0) return Vector();
    SparseMatrix m = a;
    m.makeCompressed();
    Vector x;
    bool ok = false;
#ifdef NSBIOT_HAVE_UMFPACK
    {
        Eigen::UmfPackLU<SparseMatrix> lu;
        // Nested dissection fills in far less than the default ordering on
        // the coupled saddle-point systems.
        lu.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
        ok = try_solve(lu, m, b, x);
    }
#endif
    Index pivot = -1;
    if (!ok) {
        Eigen::SparseLU<SparseMatrix> lu;
        lu.analyzePattern(m);
        lu.factorize(m);
        if (lu.info() != Eigen::Success) {
            // SparseLU reports "the column k of the input matrix is empty/zero".
            pivot = first_zero_pivot(m);
            const std::string msg = lu.lastErrorMessage();
            const auto pos = msg.find_last_of(' ');
            if (pivot < 0 && pos != std::string::npos) {
                try {
                    pivot = std::stoi(msg.substr(pos + 1));
                } catch (...) {
                    pivot = -1;
                }
            }
            throw SingularMatrix("singular matrix", pivot);
        }
        x = lu.solve(b);
        ok = lu.info() == Eigen::Success && x.allFinite();
        if (!ok) throw SingularMatrix("singular matrix", first_zero_pivot(m));
    }
    const double res = (m * x - b).lpNorm<Eigen::Infinity>();
    const double scale = matrix_norm_inf(m) * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
    if (res > 1e-10 * scale) {
        // One step of iterative refinement before giving up.
        Eigen::SparseLU<SparseMatrix> lu;
        lu.compute(m);
        if (lu.info() == Eigen::Success) {
            x += lu.solve(Vector(b - m * x));
            const double res2 = (m * x - b).lpNorm<Eigen::Infinity>();
            if (res2 <= 1e-10 * scale) return x;
        }
        throw SingularMatrix("linear solve residual check failed (nearly singular)", first_zero_pivot(m));
    }
    return x;
}

Vector solve_linear(const BlockSystem& s) { return solve_linear(s.matrix, s.rhs); }

NewtonResult newton_solve(const ResidualFn& f, Vector x0, const NewtonConfig& cfg) {
    cfg.validate();
    NewtonResult r;
    r.x = std::move(x0);
    Vector F;
    SparseMatrix J;
    f(r.x, F, &J);
    const double r0 = F.norm();
    r.residuals.push_back(r0);
    const double target = std::max(cfg.abs_tol, cfg.rel_tol * r0);
    for (int k = 0; k < cfg.max_iters; ++k) {
        const Vector dx = solve_linear(J, F);
        r.x -= dx;
        ++r.iterations;
        f(r.x, F, &J);
        const double rn = F.norm();
        r.residuals.push_back(rn);
        if (!std::isfinite(rn)) break;
        if (rn <= target) return r;
        if (cfg.step_tol > 0 && dx.norm() <= cfg.step_tol * r.x.norm()) return r;
    }
    throw StepFailure("Newton did not converge in " + std::to_string(cfg.max_iters) + " iterations",
                      r.residuals.back());
}

// ---------------------------------------------------------------------------

TimeStepper::TimeStepper(const Discretization& disc, const PhysicalParams& params, ProblemData data, double dt,
                         NewtonConfig newton, AssemblyOptions opts)
    : disc_(disc), params_(params), data_(std::move(data)), dt_(dt), newton_(newton), asm_(disc, params, opts) {
    if (!(dt > 0)) throw InvalidArgument("time step must be positive");
    newton_.validate();
    mass_ = (asm_.storage() + asm_.inertia()) / dt_;
    spring_ = asm_.spring();
    lhs_ = mass_ + asm_.static_blocks() + asm_.interface_blocks() + dt_ * spring_;
    lhs_.makeCompressed();
}

Vector TimeStepper::step_rhs(const SystemState& prev, double t) const {
    Vector b = asm_.rhs(data_, t) + mass_ * prev.x;
    if (params_.dyn.beta != 0.0 && prev.eta.size()) {
        Vector eta = Vector::Zero(disc_.layout.size());
        disc_.block(eta, Field::u_s) = prev.eta;
        b -= spring_ * eta;
    }
    return b;
}

namespace {

// Replace constrained rows/columns by the identity.
SparseMatrix constrain(const SparseMatrix& j, const std::vector<char>& fixed) {
    std::vector<Triplet> t;
    t.reserve(j.nonZeros());
    for (Index c = 0; c < j.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(j, c); it; ++it)
            if (!fixed[it.row()] && !fixed[it.col()]) t.emplace_back(it.row(), it.col(), it.value());
    for (Index i = 0; i < static_cast<Index>(fixed.size()); ++i)
        if (fixed[i]) t.emplace_back(i, i, 1.0);
    SparseMatrix out(j.rows(), j.cols());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

} // namespace

Vector TimeStepper::residual(const Vector& x, const SystemState& prev, double t) const {
    const EssentialBC bc = asm_.essential(data_, t);
    Vector F = lhs_ * x + asm_.convective(x, false).residual - step_rhs(prev, t);
    for (std::size_t k = 0; k < bc.dofs.size(); ++k) F[bc.dofs[k]] = x[bc.dofs[k]] - bc.values[k];
    return F;
}

TimeStepper::Result TimeStepper::step(const SystemState& prev) const {
    const double t = prev.t + dt_;
    const Index n = disc_.layout.size();
    if (prev.x.size() != n) throw InvalidArgument("state size does not match the discretization");
    const EssentialBC bc = asm_.essential(data_, t);
    std::vector<char> fixed(n, 0);
    for (Index d : bc.dofs) fixed[d] = 1;
    const Vector b = step_rhs(prev, t);

    Vector x0 = prev.x;
    for (std::size_t k = 0; k < bc.dofs.size(); ++k) x0[bc.dofs[k]] = bc.values[k];

    const bool nonlinear = disc_.has_fluid() && params_.rho != 0.0;
    const SparseMatrix lhs_c = constrain(lhs_, fixed);
    auto f = [&](const Vector& x, Vector& F, SparseMatrix* J) {
        F = lhs_ * x - b;
        if (nonlinear) {
            ConvectiveTerm c = asm_.convective(x, J != nullptr);
            F += c.residual;
            if (J) *J = constrain(lhs_ + c.jacobian, fixed);
        } else if (J) {
            *J = lhs_c;
        }
        for (Index i = 0; i < n; ++i)
            if (fixed[i]) F[i] = 0.0;
    };

    Result r;
    try {
        NewtonResult nr = newton_solve(f, x0, newton_);
        r.state.x = std::move(nr.x);
        r.iterations = nr.iterations;
        r.residuals = std::move(nr.residuals);
    } catch (const StepFailure& e) {
        throw StepFailure(std::string(e.what()) + " at step " + std::to_string(prev.step + 1), e.residual(),
                          prev.step + 1);
    }
    r.state.t = t;
    r.state.step = prev.step + 1;
    const auto us = disc_.block(r.state.x, Field::u_s);
    r.state.eta = prev.eta.size() ? Vector(prev.eta + dt_ * us) : Vector(dt_ * us);
    return r;
}

TimeStepper::Result backward_euler_step(const SystemState& prev, double dt, const Discretization& disc,
                                        const PhysicalParams& params, const ProblemData& data,
                                        const NewtonConfig& newton, AssemblyOptions opts) {
    return TimeStepper(disc, params, data, dt, newton, opts).step(prev);
}

// ---------------------------------------------------------------------------

SystemState zero_state(const Discretization& disc, double t) {
    SystemState s;
    s.t = t;
    s.x = Vector::Zero(disc.layout.size());
    s.eta = Vector::Zero(disc.layout.dim(Field::u_s));
    return s;
}

SystemState interpolate_state(const Discretization& disc, const FieldSet& f, double t) {
    SystemState s = zero_state(disc, t);
    auto put = [&](Field fld, const Vector& v) { disc.block(s.x, fld) = v; };
    if (f.sigma_p) put(Field::sigma_p, interpolate_bdm1_mat(disc.space(Field::sigma_p), f.sigma_p, t));
    if (f.p_p) put(Field::p_p, project_p0_scalar(disc.space(Field::p_p), f.p_p, t));
    if (f.u_p) put(Field::u_p, interpolate_bdm1_vec(disc.space(Field::u_p), f.u_p, t));
    if (disc.has_fluid()) {
        if (f.T_f) put(Field::T_f, interpolate_bdm1_mat(disc.space(Field::T_f), f.T_f, t));
        if (f.u_f) put(Field::u_f, interpolate_p1_vec(disc.space(Field::u_f), f.u_f, t));
    }
    if (f.theta) put(Field::theta, project_trace_vec(*disc.traces, f.theta, t));
    if (f.lambda) put(Field::lambda, project_trace_scalar(*disc.traces, f.lambda, t));
    if (f.u_s) put(Field::u_s, project_p0_vec(disc.space(Field::u_s), f.u_s, t));
    if (f.gamma_p) put(Field::gamma_p, interpolate_p1_scalar(disc.space(Field::gamma_p), f.gamma_p, t));
    if (f.eta) s.eta = project_p0_vec(disc.space(Field::u_s), f.eta, t);
    return s;
}

SystemState constant_state(const Discretization& disc, const PhysicalParams& params, double p0, double t) {
    FieldSet f;
    f.p_p = [p0](const Vec2&, double) { return p0; };
    f.lambda = f.p_p;
    f.sigma_p = [p0, a = params.alpha_p](const Vec2&, double) -> Mat2 { return -a * p0 * Mat2::Identity(); };
    f.T_f = [p0](const Vec2&, double) -> Mat2 { return -p0 * Mat2::Identity(); };
    return interpolate_state(disc, f, t);
}

double storage_energy(const Assembler& a, const Vector& x) { return x.dot(a.storage() * x); }

} // namespace nsbiot
