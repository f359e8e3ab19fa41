// Acceptance checks: one PASS/FAIL line per criterion, tolerances pinned here.
//
// Exit status is 0 when the set of failing criteria equals --expect-fail
// (empty by default), so a documented deviation keeps showing as FAIL in the
// output while any new failure, or an unexpected pass, still breaks the run.
#include "nsbiot/assembly.hpp"
#include "nsbiot/interpolate.hpp"
#include "nsbiot/scenario.hpp"
#include "nsbiot/verify.hpp"

#include "CLI11.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace nsbiot;

namespace {

// Table 1, first row.
constexpr double kPaperCoarsest[kNumErrorFields] = {1.79e-1, 4.57e-2, 3.42e-3, 2.73e-1, 7.54e-2, 1.04e-1,
                                                    4.31e-2, 5.02e-2, 2.67e-4, 6.80e-3, 1.07e-3};
constexpr double kFactor = 3.0;
constexpr double kRateLo1 = 0.8, kRateHi1 = 1.4, kRateLo2 = 1.7, kRateHi2 = 2.4;
constexpr double kMaxNewton = 4.0;
constexpr double kConservationTol = 1e-9;
constexpr double kInterfaceTol = 1e-9;
constexpr double kMortarTol = 1e-13;
constexpr double kOscillationTol = 0.2;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string fmt(double v, const char* f = "%.3g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double max_abs(const SparseMatrix& a) {
    double m = 0;
    for (Index j = 0; j < a.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(a, j); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

Discretization small_coupled() {
    auto [f, p] = example1_meshes({4, 3, 3, 3});
    return make_discretization(std::move(f), std::move(p));
}

Vector random_vector(Index n, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> d(0, 1);
    Vector v(n);
    for (auto& x : v) x = d(gen);
    return v;
}

// --- criterion 6 pieces; each returns an empty string or a failure note ----

std::string quadrature_exactness() {
    double worst = 0;
    for (int order = 1; order <= 6; ++order) {
        const QuadRule& r = triangle_rule(order);
        for (int a = 0; a <= order; ++a)
            for (int b = 0; a + b <= order; ++b) {
                double q = 0;
                for (std::size_t k = 0; k < r.size(); ++k)
                    q += r.weights[k] * std::pow(r.points[k].x(), a) * std::pow(r.points[k].y(), b);
                // a! b! / (a + b + 2)!
                const double exact = std::exp(std::lgamma(a + 1) + std::lgamma(b + 1) - std::lgamma(a + b + 3));
                worst = std::max(worst, std::abs(q - exact));
            }
    }
    return worst <= 1e-14 ? "" : "quadrature error " + fmt(worst);
}

std::string piola_divergence() {
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(-2, 2);
    double worst = 0;
    const double signs[6] = {1, 1, 1, 1, 1, 1};
    for (int trial = 0; trial < 20; ++trial) {
        Vec2 p[3];
        do {
            for (auto& q : p) q = Vec2(u(gen), u(gen));
        } while ((p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x() < 0.1);
        const AffineMap map = make_affine_map(p[0], p[1], p[2]);
        Bdm1Eval e;
        eval_bdm1(map, signs, Vec2(0.2, 0.2), e);
        for (int j = 0; j < 6; ++j) {
            double flux = 0;
            for (int k = 0; k < 3; ++k) {
                const Vec2 a = p[k], b = p[(k + 1) % 3];
                const Vec2 n = Vec2((b - a).y(), -(b - a).x()).normalized();
                const QuadRule& r = segment_rule(4);
                for (std::size_t q = 0; q < r.size(); ++q) {
                    Bdm1Eval ev;
                    eval_bdm1(map, signs, map.to_reference(a + r.points[q].x() * (b - a)), ev);
                    flux += r.weights[q] * (b - a).norm() * ev.v[j].dot(n);
                }
            }
            worst = std::max(worst, std::abs(e.div[j] * std::abs(map.detJ) / 2 - flux));
        }
    }
    return worst <= 1e-12 ? "" : "Piola divergence mismatch " + fmt(worst);
}

std::string compliance_pair() {
    std::mt19937 gen(9);
    std::normal_distribution<double> n(0, 1);
    for (double lam : {1.0, 1e3, 1e6})
        for (double mu : {0.5, 1.0, 1e2}) {
            const ComplianceOp a(lam, mu, 1.0 / (2 * mu));
            for (int k = 0; k < 100; ++k) {
                Mat2 t;
                t << n(gen), n(gen), n(gen), n(gen);
                if ((a.apply(a.apply_inverse(t)) - t).norm() > 1e-14 * t.norm() * (1 + lam))
                    return "A A^-1 != I at lambda " + fmt(lam);
                const Mat2 s = sym(t);
                const double ratio = ddot(a.apply(s), s) / ddot(s, s);
                if (ratio < a.a_min() * (1 - 1e-12) || ratio > a.a_max() * (1 + 1e-12))
                    return "a_min/a_max bracket violated at lambda " + fmt(lam);
            }
        }
    return "";
}

std::string bjs_psd(const Discretization& d) {
    const Eigen::MatrixXd a(Assembler(d, PhysicalParams{}).interface_blocks());
    const Eigen::MatrixXd s = 0.5 * (a + a.transpose());
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues().minCoeff();
    return lmin >= -1e-13 * s.norm() ? "" : "BJS min eigenvalue " + fmt(lmin);
}

std::string skew_duality(const Discretization& d) {
    const Assembler as(d, PhysicalParams{});
    const Eigen::MatrixXd st(as.static_blocks()), it(as.interface_blocks());
    const auto& l = d.layout;
    auto blk = [&](const Eigen::MatrixXd& a, Field r, Field c) {
        return a.block(l.begin(r), l.begin(c), l.dim(r), l.dim(c));
    };
    const std::pair<Field, Field> s_pairs[] = {
        {Field::sigma_p, Field::gamma_p}, {Field::p_p, Field::u_p}, {Field::sigma_p, Field::u_s}};
    for (auto [r, c] : s_pairs)
        if ((blk(st, r, c) + blk(st, c, r).transpose()).norm() > 0 || blk(st, r, c).norm() == 0)
            return std::string("static pair ") + field_name(r) + "/" + field_name(c);
    const std::pair<Field, Field> i_pairs[] = {
        {Field::sigma_p, Field::theta}, {Field::u_f, Field::lambda}, {Field::theta, Field::lambda}, {Field::u_p, Field::lambda}};
    for (auto [r, c] : i_pairs)
        if ((blk(it, r, c) + blk(it, c, r).transpose()).norm() > 1e-15 * blk(it, r, c).norm() || blk(it, r, c).norm() == 0)
            return std::string("interface pair ") + field_name(r) + "/" + field_name(c);
    return "";
}

std::string convective_slope(const Discretization& d, double* slope_out) {
    const Assembler as(d, PhysicalParams{});
    const Index n = d.layout.size();
    const Vector u = random_vector(n, 3), v = random_vector(n, 4);
    const ConvectiveTerm c = as.convective(u);
    const Vector jv = c.jacobian * v;
    double err[2];
    const double eps[2] = {1e-4, 1e-6};
    for (int k = 0; k < 2; ++k)
        err[k] = ((as.convective(Vector(u + eps[k] * v), false).residual - c.residual) / eps[k] - jv).norm();
    const double slope = std::log(err[0] / err[1]) / std::log(eps[0] / eps[1]);
    *slope_out = slope;
    return std::abs(slope - 1.0) <= 0.1 ? "" : "finite-difference slope " + fmt(slope);
}

std::string zero_data(const Discretization& d) {
    const TimeStepper st(d, PhysicalParams{}, ProblemData{}, 1e-3);
    const auto r = st.step(zero_state(d));
    return r.state.x.cwiseAbs().maxCoeff() == 0.0 ? "" : "nonzero solution for zero data";
}

std::string energy_decay(const Discretization& d) {
    PhysicalParams p;
    p.rho = 0;
    const TimeStepper st(d, p, ProblemData{}, 1e-2);
    SystemState s = zero_state(d);
    std::mt19937 gen(11);
    std::normal_distribution<double> nd;
    for (Field f : {Field::sigma_p, Field::p_p})
        for (auto& v : d.block(s.x, f)) v = nd(gen);
    for (Index i : st.assembler().essential(ProblemData{}, 0).dofs) s.x[i] = 0;
    double e = storage_energy(st.assembler(), s.x);
    for (int m = 0; m < 20; ++m) {
        s = st.step(s).state;
        const double en = storage_energy(st.assembler(), s.x);
        if (en > e * (1 + 1e-12)) return "energy increased at step " + std::to_string(m + 1);
        e = en;
    }
    return "";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int nlevels = 4;
    std::vector<int> expect_fail;
    int threads = 1;
    app.add_option("--levels", nlevels, "Number of frozen convergence levels (criterion 1 needs 4)")
        ->check(CLI::Range(2, 4));
    app.add_option("--expect-fail", expect_fail, "Criteria documented as failing");
    app.add_option("--threads", threads, "Assembly threads")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, Outcome>> results(7);

    // Shared convergence study for criteria 1-5.
    std::vector<LevelSpec> levels = example1_levels();
    levels.resize(nlevels);
    const PhysicalParams params;
    StudyOptions so;
    so.dt = 1e-3;
    so.T = 0.01;
    so.assembly.threads = threads;
    so.log = [](const std::string& s) { std::cerr << s << '\n'; };
    const ConvergenceTable table = convergence_study(levels, example1_solution(), params, so);
    const auto rates = table.rates();

    {
        auto& [name, o] = results[0];
        name = "convergence rates, levels " + std::to_string(nlevels - 1) + "-" + std::to_string(nlevels);
        const FieldErrors& r = rates.back();
        for (ErrorField f : {ErrorField::T_f, ErrorField::u_f, ErrorField::sigma_p, ErrorField::p_p, ErrorField::u_p,
                             ErrorField::u_s}) {
            const double v = r[int(f)];
            o.detail << ' ' << error_field_name(f) << '=' << fmt(v, "%.3f");
            o.require(v >= kRateLo1 && v <= kRateHi1, std::string(error_field_name(f)) + " outside [0.8, 1.4]");
        }
        for (ErrorField f : {ErrorField::theta, ErrorField::lambda}) {
            const double v = r[int(f)];
            o.detail << ' ' << error_field_name(f) << '=' << fmt(v, "%.3f");
            o.require(v >= kRateLo2 && v <= kRateHi2, std::string(error_field_name(f)) + " outside [1.7, 2.4]");
        }
        if (nlevels < 4) o.require(false, "fewer than 4 levels");
    }
    {
        auto& [name, o] = results[1];
        name = "coarsest-level errors within 3x of the published row";
        const FieldErrors& e = table.levels.front().errors;
        for (int f = 0; f < kNumErrorFields; ++f) {
            const double ratio = e[f] / kPaperCoarsest[f];
            o.detail << ' ' << error_field_name(ErrorField(f)) << '=' << fmt(e[f], "%.2e") << "(x"
                     << fmt(ratio, "%.2f") << ')';
            o.require(ratio <= kFactor && ratio >= 1.0 / kFactor, std::string(error_field_name(ErrorField(f))) +
                                                                      " ratio " + fmt(ratio, "%.2f"));
        }
    }
    {
        auto& [name, o] = results[2];
        name = "Newton iterations";
        for (const auto& l : table.levels) {
            o.detail << " avg=" << fmt(l.avg_newton, "%.2f");
            o.require(l.avg_newton <= kMaxNewton, "average above 4");
        }
        PhysicalParams linear = params;
        linear.rho = 0;
        const LevelResult lin = run_mms_level(levels.front(), example1_solution(), linear, so);
        int lo = 1 << 30, hi = 0;
        for (const auto& h : lin.newton_history) {
            lo = std::min<int>(lo, int(h.size()) - 1);
            hi = std::max<int>(hi, int(h.size()) - 1);
        }
        o.detail << " rho=0: min=" << lo << " max=" << hi;
        o.require(lo == 1 && hi == 1, "rho = 0 needs more than one iteration");
    }
    {
        auto& [name, o] = results[3];
        name = "local conservation";
        double dm = 0, sm = 0;
        for (const auto& l : table.levels) {
            dm = std::max(dm, l.conservation.darcy_mass);
            sm = std::max(sm, l.conservation.solid_momentum);
        }
        o.detail << " darcy_mass=" << fmt(dm, "%.2e") << " solid_momentum=" << fmt(sm, "%.2e");
        o.require(dm <= kConservationTol && sm <= kConservationTol, "residual above 1e-9");
    }
    {
        auto& [name, o] = results[4];
        name = "interface conditions";
        double ir = 0;
        for (const auto& l : table.levels) ir = std::max(ir, l.interface_residual);
        auto [f, p] = example1_meshes({5, 3, 5, 4});
        const Discretization d = make_discretization(std::move(f), std::move(p));
        PhysicalParams kp;
        kp.K << 0.505e-6, 0.495e-6, 0.495e-6, 0.505e-6;
        const Assembler as(d, kp);
        const SparseMatrix merged = as.interface_blocks(InterfaceMode::merged);
        const double diff = max_abs(merged - as.interface_blocks(InterfaceMode::direct)) / max_abs(merged);
        o.detail << " mass_residual=" << fmt(ir, "%.2e") << " merged_vs_direct=" << fmt(diff, "%.2e");
        o.require(ir <= kInterfaceTol, "mass residual above 1e-9");
        o.require(diff <= kMortarTol, "merged and direct assembly differ");
    }
    {
        auto& [name, o] = results[5];
        name = "property suites";
        const Discretization d = small_coupled();
        double slope = 0;
        const std::pair<const char*, std::string> checks[] = {
            {"quadrature", quadrature_exactness()}, {"piola", piola_divergence()},
            {"compliance", compliance_pair()},      {"bjs_psd", bjs_psd(d)},
            {"skew_duality", skew_duality(d)},      {"convective_fd", convective_slope(d, &slope)},
            {"zero_data", zero_data(d)},            {"energy", energy_decay(d)}};
        for (const auto& [label, msg] : checks) {
            o.detail << ' ' << label << '=' << (msg.empty() ? "ok" : "FAIL");
            o.require(msg.empty(), msg);
        }
        o.detail << " fd_slope=" << fmt(slope, "%.3f");
    }
    {
        auto& [name, o] = results[6];
        name = "locking regime oscillation";
        PhysicalParams p;
        p.s0 = 5e-6;
        p.K = 1e-9 * Mat2::Identity();
        p.lambda_p = 1e6;
        p.mu_p = 1.0;
        const Scenario sc = biot_column(p, {20, 20, 1.0});
        AssemblyOptions ao;
        ao.threads = threads;
        const TimeStepper st(sc.disc, sc.params, sc.data, 1e-4, {}, ao);
        SystemState s = sc.initial;
        double worst = 0;
        for (int m = 0; m < 3; ++m) {
            s = st.step(s).state;
            worst = std::max(worst, oscillation_indicator(*sc.disc.poro, sc.disc.block(s.x, Field::p_p)));
        }
        o.detail << " indicator=" << fmt(worst, "%.3f");
        o.require(worst < kOscillationTol, "indicator not below 0.2");
    }

    std::set<int> failed;
    for (int k = 0; k < 7; ++k) {
        const auto& [name, o] = results[k];
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << k + 1 << ": " << name << " |" << o.detail.str()
                  << '\n';
        if (!o.pass) failed.insert(k + 1);
    }
    const std::set<int> expected(expect_fail.begin(), expect_fail.end());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "summary: " << 7 - failed.size() << "/7 pass";
    if (!failed.empty()) {
        std::cout << "; failing:";
        for (int k : failed) std::cout << ' ' << k;
    }
    if (!expected.empty()) {
        std::cout << "; expected failing:";
        for (int k : expected) std::cout << ' ' << k;
    }
    std::cout << "; " << fmt(secs, "%.0f") << " s\n";
    return failed == expected ? 0 : 1;
}
