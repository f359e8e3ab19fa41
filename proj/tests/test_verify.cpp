#include "nsbiot/verify.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace nsbiot;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kH = 1e-5;

std::vector<std::pair<Vec2, double>> sample_points(double ylo, double yhi) {
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> ux(0.05, 0.95), uy(ylo, yhi), ut(0.0, 0.5);
    std::vector<std::pair<Vec2, double>> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({Vec2(ux(gen), uy(gen)), ut(gen)});
    return pts;
}

Vec2 fd_div(const TensorField& f, const Vec2& x, double t) {
    const Vec2 ex(kH, 0), ey(0, kH);
    const Mat2 dx = (f(x + ex, t) - f(x - ex, t)) / (2 * kH);
    const Mat2 dy = (f(x + ey, t) - f(x - ey, t)) / (2 * kH);
    return dx.col(0) + dy.col(1);
}

Mat2 fd_grad(const VectorField& f, const Vec2& x, double t) {
    const Vec2 ex(kH, 0), ey(0, kH);
    Mat2 g;
    g.col(0) = (f(x + ex, t) - f(x - ex, t)) / (2 * kH);
    g.col(1) = (f(x + ey, t) - f(x - ey, t)) / (2 * kH);
    return g;
}

template <class F>
auto fd_time(const F& f, const Vec2& x, double t) {
    return (f(x, t + kH) - f(x, t - kH)) / (2 * kH);
}

Mat2 sym_part(const Mat2& g) { return 0.5 * (g + g.transpose()); }

} // namespace

TEST(ManufacturedSolution, ClosedFormValuesAtStart) {
    const AnalyticSolution a = example1_solution();
    const Vec2 u = a.u_f(Vec2(0.25, 0.5), 0);
    EXPECT_NEAR(u.x(), 0.0, 1e-15);
    EXPECT_NEAR(u.y(), -std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(a.p_f(Vec2(0.5, 0), 0), 1 + 2 * kPi, 1e-14);
    EXPECT_NEAR(a.p_p(Vec2(0.5, -2.0 / 3.0), 0), 0.5, 1e-14);
    EXPECT_EQ(a.eta(Vec2(0.3, -0.4), 0).norm(), 0.0);
    EXPECT_NEAR(a.dt_eta(Vec2(0, 0), 0).x(), kPi, 1e-14);
}

TEST(ManufacturedSolution, DerivativesMatchFiniteDifferences) {
    const AnalyticSolution a = example1_solution();
    for (auto [x, t] : sample_points(0.05, 0.95)) {
        EXPECT_LT((a.grad_u_f(x, t) - fd_grad(a.u_f, x, t)).norm(), 1e-8);
        EXPECT_LT((a.dt_u_f(x, t) - fd_time(a.u_f, x, t)).norm(), 1e-8);
        EXPECT_NEAR(a.grad_u_f(x, t).trace(), 0.0, 1e-13); // divergence free
        EXPECT_LT((a.grad_p_f(x, t) - Vec2((a.p_f(x + Vec2(kH, 0), t) - a.p_f(x - Vec2(kH, 0), t)) / (2 * kH),
                                           (a.p_f(x + Vec2(0, kH), t) - a.p_f(x - Vec2(0, kH), t)) / (2 * kH)))
                      .norm(),
                  1e-8);
    }
    for (auto [x, t] : sample_points(-0.95, -0.05)) {
        EXPECT_LT((a.grad_eta(x, t) - fd_grad(a.eta, x, t)).norm(), 1e-8);
        EXPECT_LT((a.dt_eta(x, t) - fd_time(a.eta, x, t)).norm(), 1e-8);
        EXPECT_NEAR(a.dt_p_p(x, t), fd_time(a.p_p, x, t), 1e-8);
    }
}

TEST(ManufacturedSolution, DerivedFieldsFromDefinitions) {
    PhysicalParams p;
    p.mu = 1.3;
    p.rho = 0.7;
    p.lambda_p = 2.0;
    p.mu_p = 0.6;
    p.alpha_p = 0.8;
    p.K << 2.0, 0.3, 0.3, 1.0;
    const AnalyticSolution a = example1_solution();
    const DerivedFields d = derive_fields(a, p);
    for (auto [x, t] : sample_points(0.05, 0.95)) {
        const Mat2 gu = fd_grad(a.u_f, x, t);
        const Vec2 u = a.u_f(x, t);
        const Mat2 sf = -a.p_f(x, t) * Mat2::Identity() + 2 * p.mu * sym_part(gu);
        EXPECT_LT((d.sigma_f(x, t) - sf).norm(), 1e-8);
        EXPECT_LT((d.T_f(x, t) - (sf - p.rho * u * u.transpose())).norm(), 1e-8);
        EXPECT_LT((d.div_T_f(x, t) - fd_div(d.T_f, x, t)).norm(), 1e-6);
        // Pressure recovery from the pseudostress.
        EXPECT_NEAR(-0.5 * (d.T_f(x, t).trace() + p.rho * u.squaredNorm()), a.p_f(x, t), 1e-12);
    }
    for (auto [x, t] : sample_points(-0.95, -0.05)) {
        const Mat2 ge = fd_grad(a.eta, x, t);
        const Mat2 sp = p.lambda_p * ge.trace() * Mat2::Identity() + 2 * p.mu_p * sym_part(ge) -
                        p.alpha_p * a.p_p(x, t) * Mat2::Identity();
        EXPECT_LT((d.sigma_p(x, t) - sp).norm(), 1e-8);
        EXPECT_LT((d.div_sigma_p(x, t) - fd_div(d.sigma_p, x, t)).norm(), 1e-6);
        const Vec2 gp((a.p_p(x + Vec2(kH, 0), t) - a.p_p(x - Vec2(kH, 0), t)) / (2 * kH),
                      (a.p_p(x + Vec2(0, kH), t) - a.p_p(x - Vec2(0, kH), t)) / (2 * kH));
        EXPECT_LT((d.u_p(x, t) - (-p.K * gp / p.mu)).norm(), 1e-8);
        EXPECT_NEAR(d.div_u_p(x, t), fd_grad(d.u_p, x, t).trace(), 1e-6);
        EXPECT_LT((d.u_s(x, t) - fd_time(a.eta, x, t)).norm(), 1e-8);
        const Mat2 gus = fd_grad(d.u_s, x, t);
        EXPECT_NEAR(d.gamma_p(x, t), 0.5 * (gus(0, 1) - gus(1, 0)), 1e-8);
    }
}

TEST(ManufacturedSolution, ForcingFromDefinitions) {
    PhysicalParams p;
    p.rho = 1.5;
    p.s0 = 0.4;
    p.alpha_p = 0.9;
    const AnalyticSolution a = example1_solution();
    const DerivedFields d = derive_fields(a, p);
    const Forcing f = forcing_terms(a, p);
    for (auto [x, t] : sample_points(0.05, 0.95)) {
        const Vec2 expect = p.rho * fd_grad(a.u_f, x, t) * a.u_f(x, t) - fd_div(d.sigma_f, x, t);
        EXPECT_LT((f.f_f(x, t) - expect).norm(), 1e-6);
    }
    for (auto [x, t] : sample_points(-0.95, -0.05)) {
        EXPECT_LT((f.f_p(x, t) - (-fd_div(d.sigma_p, x, t))).norm(), 1e-6);
        const auto storage = [&](const Vec2& y, double s) {
            return p.s0 * a.p_p(y, s) + p.alpha_p * a.grad_eta(y, s).trace();
        };
        EXPECT_NEAR(f.q_p(x, t), fd_time(storage, x, t) + fd_grad(d.u_p, x, t).trace(), 1e-6);
    }
}

TEST(ManufacturedSolution, InterfaceDataVanishesForCompatibleFields) {
    // With the polynomial-free Example 1 fields the mass residual on y = 0 is
    // u_f.n_f + (u_s + u_p).n_p evaluated independently.
    PhysicalParams p;
    const AnalyticSolution a = example1_solution();
    const DerivedFields d = derive_fields(a, p);
    const ProblemData data = manufactured_problem(a, p);
    for (double xs : {0.1, 0.37, 0.8}) {
        BoundaryPoint b;
        b.x = Vec2(xs, 0);
        b.n = Vec2(0, -1);
        b.t = 0.2;
        const Vec2 np(0, 1);
        const double expect = d.u_f(b.x, b.t).dot(b.n) + (d.u_s(b.x, b.t) + d.u_p(b.x, b.t)).dot(np);
        EXPECT_NEAR(data.g_m(b), expect, 1e-13);
    }
}

TEST(ErrorNorms, AccumulatorTimeNorms) {
    ErrorAccumulator acc;
    FieldErrors e1{}, e2{};
    e1.fill(3.0);
    e2.fill(4.0);
    acc.add(e1, 0.5);
    acc.add(e2, 0.5);
    const FieldErrors r = acc.result();
    EXPECT_EQ(acc.count(), 2);
    for (int f = 0; f < kNumErrorFields; ++f) {
        if (uses_max_in_time(ErrorField(f)))
            EXPECT_DOUBLE_EQ(r[f], 4.0);
        else
            EXPECT_DOUBLE_EQ(r[f], std::sqrt(12.5));
    }
    EXPECT_TRUE(uses_max_in_time(ErrorField::sigma_p));
    EXPECT_TRUE(uses_max_in_time(ErrorField::p_p));
    EXPECT_FALSE(uses_max_in_time(ErrorField::u_p));
}

TEST(ErrorNorms, ZeroStateErrorEqualsExactNorm) {
    PhysicalParams p;
    auto [mf, mp] = example1_meshes(example1_levels()[0]);
    const Discretization disc = make_discretization(std::move(mf), std::move(mp));
    const DerivedFields d = derive_fields(example1_solution(), p);
    SystemState s = zero_state(disc, 0.3);
    const FieldErrors e = spatial_errors(disc, p, s, d);
    const FieldErrors n = exact_norms(disc, p, d, 0.3);
    for (int f = 0; f < kNumErrorFields; ++f) {
        EXPECT_NEAR(e[f], n[f], 1e-12 * n[f]) << error_field_name(ErrorField(f));
        EXPECT_GT(n[f], 0.0);
    }
    // p_f norm on the unit square has a closed form at t: |e^t s c + 2 pi cos pi t|.
    const double t = 0.3, ct = 2 * kPi * std::cos(kPi * t), et = std::exp(t);
    const double int_sc = (2 / kPi) * (2 / kPi), int_sc2 = 0.5 * 0.5;
    EXPECT_NEAR(n[int(ErrorField::p_f)], std::sqrt(et * et * int_sc2 + 2 * et * ct * int_sc + ct * ct), 1e-9);
}

TEST(ErrorNorms, InterpolantErrorBelowSolverError) {
    PhysicalParams p;
    StudyOptions o;
    o.T = 0.003;
    const AnalyticSolution a = example1_solution();
    const LevelResult r = run_mms_level(example1_levels()[0], a, p, o);
    auto [mf, mp] = example1_meshes(example1_levels()[0]);
    const Discretization disc = make_discretization(std::move(mf), std::move(mp));
    const DerivedFields d = derive_fields(a, p);
    ErrorAccumulator acc;
    for (int m = 1; m <= 3; ++m) acc.add(spatial_errors(disc, p, interpolate_state(disc, exact_fields(d), m * 1e-3), d), 1e-3);
    const FieldErrors ie = acc.result();
    // The interpolant is the best-approximation proxy for the H(div) and L2
    // fields; allow a small margin for the H1 velocity and the traces.
    for (ErrorField f : {ErrorField::T_f, ErrorField::sigma_p, ErrorField::u_p, ErrorField::p_p, ErrorField::u_s})
        EXPECT_LE(ie[int(f)], 1.05 * r.errors[int(f)]) << error_field_name(f);
    EXPECT_EQ(r.steps, 3);
}

TEST(ConvergenceStudy, CoarseLevelHealth) {
    PhysicalParams p;
    StudyOptions o;
    o.T = 0.002;
    const LevelResult r = run_mms_level(example1_levels()[0], example1_solution(), p, o);
    EXPECT_LE(r.avg_newton, 4.0);
    EXPECT_LE(r.conservation.darcy_mass, 1e-9);
    EXPECT_LE(r.conservation.solid_momentum, 1e-9);
    EXPECT_LE(r.interface_residual, 1e-9);
    EXPECT_NEAR(r.h_f, 0.1898, 5e-4);
    EXPECT_NEAR(r.h_p, 0.2828, 5e-4);
    EXPECT_NEAR(r.h_tp, 0.2, 1e-12);
    EXPECT_EQ(r.newton_history.size(), 2u);
}

TEST(ConvergenceStudy, ConservationCheckDetectsViolation) {
    PhysicalParams p;
    auto [mf, mp] = example1_meshes(example1_levels()[0]);
    const Discretization disc = make_discretization(std::move(mf), std::move(mp));
    const AnalyticSolution a = example1_solution();
    const ProblemData data = manufactured_problem(a, p);
    const TimeStepper st(disc, p, data, 1e-3);
    const SystemState s0 = interpolate_state(disc, exact_fields(derive_fields(a, p)), 0);
    SystemState s1 = st.step(s0).state;
    EXPECT_LE(local_conservation(disc, p, data, s0, s1).darcy_mass, 1e-9);
    disc.block(s1.x, Field::p_p)[3] += 1e-3;
    EXPECT_GT(local_conservation(disc, p, data, s0, s1).darcy_mass, 1e-6);
}

TEST(ConvergenceStudy, RatesFromSyntheticErrors) {
    ConvergenceTable t;
    for (int k = 0; k < 3; ++k) {
        LevelResult l;
        l.h_f = 0.2 / (1 << k);
        l.h_p = 0.3 / (1 << k);
        l.h_tp = 0.25 / (1 << k);
        for (int f = 0; f < kNumErrorFields; ++f) l.errors[f] = std::pow(0.5, k * (f == 9 || f == 10 ? 2 : 1));
        t.levels.push_back(l);
    }
    const auto r = t.rates();
    ASSERT_EQ(r.size(), 2u);
    for (const auto& row : r)
        for (int f = 0; f < kNumErrorFields; ++f) EXPECT_NEAR(row[f], f >= 9 ? 2.0 : 1.0, 1e-12);
    std::ostringstream os;
    t.write_csv(os);
    const std::string csv = os.str();
    EXPECT_EQ(csv.substr(0, csv.find('\n')).rfind("level,h_f,h_p,h_tp,err_T_f,rate_T_f", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(ConvergenceStudy, LevelParsingAndStepCount) {
    const auto l = parse_levels("8x7:5x5, 16x13:10x8");
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[1].fluid_nx, 16);
    EXPECT_EQ(l[1].poro_ny, 8);
    EXPECT_THROW(parse_levels("8x7"), ConfigError);
    EXPECT_THROW(parse_levels("8x0:5x5"), ConfigError);
    EXPECT_EQ(step_count(0.01, 1e-3), 10);
    EXPECT_EQ(step_count(80, 1), 80);
    EXPECT_THROW(step_count(0.0105, 1e-3), ConfigError);
    EXPECT_THROW(step_count(1, 0), ConfigError);
}
