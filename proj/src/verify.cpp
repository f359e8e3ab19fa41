#include "nsbiot/verify.hpp"

#include "nsbiot/compliance.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace nsbiot {

AnalyticSolution example1_solution() {
    AnalyticSolution a;
    a.u_f = [](const Vec2& x, double t) -> Vec2 {
        const double e = std::exp(t);
        return e * Vec2(std::sin(pi * x.x()) * std::cos(pi * x.y()), -std::sin(pi * x.y()) * std::cos(pi * x.x()));
    };
    a.dt_u_f = a.u_f;
    a.lap_u_f = [u = a.u_f](const Vec2& x, double t) -> Vec2 { return -2 * pi * pi * u(x, t); };
    a.grad_u_f = [](const Vec2& x, double t) -> Mat2 {
        const double e = std::exp(t) * pi;
        const double cx = std::cos(pi * x.x()), sx = std::sin(pi * x.x());
        const double cy = std::cos(pi * x.y()), sy = std::sin(pi * x.y());
        Mat2 g;
        g << e * cx * cy, -e * sx * sy, e * sx * sy, -e * cx * cy;
        return g;
    };
    a.p_p = [](const Vec2& x, double t) { return std::exp(t) * std::sin(pi * x.x()) * std::cos(pi * x.y() / 2); };
    a.dt_p_p = a.p_p;
    a.grad_p_p = [](const Vec2& x, double t) -> Vec2 {
        const double e = std::exp(t);
        return e * Vec2(pi * std::cos(pi * x.x()) * std::cos(pi * x.y() / 2),
                        -pi / 2 * std::sin(pi * x.x()) * std::sin(pi * x.y() / 2));
    };
    a.hess_p_p = [](const Vec2& x, double t) -> Mat2 {
        const double e = std::exp(t);
        const double p = e * std::sin(pi * x.x()) * std::cos(pi * x.y() / 2);
        const double pxy = -pi * pi / 2 * e * std::cos(pi * x.x()) * std::sin(pi * x.y() / 2);
        Mat2 h;
        h << -pi * pi * p, pxy, pxy, -pi * pi / 4 * p;
        return h;
    };
    a.p_f = [pp = a.p_p](const Vec2& x, double t) { return pp(x, t) + 2 * pi * std::cos(pi * t); };
    a.grad_p_f = a.grad_p_p;

    auto shape = [](const Vec2& x) { return Vec2(-3 * x.x() + std::cos(x.y()), x.y() + 1); };
    auto shape_grad = [](const Vec2& x) -> Mat2 {
        Mat2 g;
        g << -3, -std::sin(x.y()), 0, 1;
        return g;
    };
    a.eta = [shape](const Vec2& x, double t) -> Vec2 { return std::sin(pi * t) * shape(x); };
    a.dt_eta = [shape](const Vec2& x, double t) -> Vec2 { return pi * std::cos(pi * t) * shape(x); };
    a.dtt_eta = [shape](const Vec2& x, double t) -> Vec2 { return -pi * pi * std::sin(pi * t) * shape(x); };
    a.grad_eta = [shape_grad](const Vec2& x, double t) -> Mat2 { return std::sin(pi * t) * shape_grad(x); };
    a.dt_grad_eta = [shape_grad](const Vec2& x, double t) -> Mat2 { return pi * std::cos(pi * t) * shape_grad(x); };
    a.grad_div_eta = [](const Vec2&, double) -> Vec2 { return Vec2::Zero(); };
    a.lap_eta = [](const Vec2& x, double t) -> Vec2 { return std::sin(pi * t) * Vec2(-std::cos(x.y()), 0); };
    return a;
}

DerivedFields derive_fields(const AnalyticSolution& a, const PhysicalParams& p) {
    DerivedFields d;
    d.u_f = a.u_f;
    d.grad_u_f = a.grad_u_f;
    d.p_f = a.p_f;
    d.sigma_f = [a, mu = p.mu](const Vec2& x, double t) -> Mat2 {
        const Mat2 g = a.grad_u_f(x, t);
        return -a.p_f(x, t) * Mat2::Identity() + mu * (g + g.transpose());
    };
    d.T_f = [sf = d.sigma_f, u = a.u_f, rho = p.rho](const Vec2& x, double t) -> Mat2 {
        const Vec2 v = u(x, t);
        return sf(x, t) - rho * v * v.transpose();
    };
    d.div_T_f = [a, mu = p.mu, rho = p.rho](const Vec2& x, double t) -> Vec2 {
        return -a.grad_p_f(x, t) + mu * a.lap_u_f(x, t) - rho * a.grad_u_f(x, t) * a.u_f(x, t);
    };
    d.sigma_p = [a, p](const Vec2& x, double t) -> Mat2 {
        const Mat2 g = a.grad_eta(x, t);
        return (p.lambda_p * g.trace() - p.alpha_p * a.p_p(x, t)) * Mat2::Identity() + p.mu_p * (g + g.transpose());
    };
    d.div_sigma_p = [a, p](const Vec2& x, double t) -> Vec2 {
        return (p.lambda_p + p.mu_p) * a.grad_div_eta(x, t) + p.mu_p * a.lap_eta(x, t) -
               p.alpha_p * a.grad_p_p(x, t);
    };
    d.p_p = a.p_p;
    d.u_p = [g = a.grad_p_p, K = p.K, mu = p.mu](const Vec2& x, double t) -> Vec2 { return -(K * g(x, t)) / mu; };
    d.div_u_p = [h = a.hess_p_p, K = p.K, mu = p.mu](const Vec2& x, double t) {
        return -(K.cwiseProduct(h(x, t))).sum() / mu;
    };
    d.u_s = a.dt_eta;
    d.eta = a.eta;
    d.gamma_p = [g = a.dt_grad_eta](const Vec2& x, double t) {
        const Mat2 m = g(x, t);
        return 0.5 * (m(0, 1) - m(1, 0));
    };
    d.theta = a.dt_eta;
    d.lambda = a.p_p;
    return d;
}

Forcing forcing_terms(const AnalyticSolution& a, const PhysicalParams& p) {
    const DerivedFields d = derive_fields(a, p);
    Forcing f;
    f.f_f = [a, p](const Vec2& x, double t) -> Vec2 {
        Vec2 r = p.rho * a.grad_u_f(x, t) * a.u_f(x, t) + a.grad_p_f(x, t) - p.mu * a.lap_u_f(x, t);
        if (p.dyn.fluid_inertia) r += p.rho * a.dt_u_f(x, t);
        return r;
    };
    f.f_p = [a, p, ds = d.div_sigma_p](const Vec2& x, double t) -> Vec2 {
        Vec2 r = -ds(x, t);
        if (p.dyn.rho_p != 0.0) r += p.dyn.rho_p * a.dtt_eta(x, t);
        if (p.dyn.beta != 0.0) r -= p.dyn.beta * a.eta(x, t);
        return r;
    };
    f.q_p = [a, p, du = d.div_u_p](const Vec2& x, double t) {
        return p.s0 * a.dt_p_p(x, t) + p.alpha_p * a.dt_grad_eta(x, t).trace() + du(x, t);
    };
    return f;
}

ProblemData manufactured_problem(const AnalyticSolution& a, const PhysicalParams& p) {
    const DerivedFields d = derive_fields(a, p);
    const Forcing f = forcing_terms(a, p);
    ProblemData data;
    data.f_f = f.f_f;
    data.f_p = f.f_p;
    data.q_p = f.q_p;
    data.u_f_boundary = d.u_f;
    data.fluid_traction = [T = d.T_f](const BoundaryPoint& b) -> Vec2 { return T(b.x, b.t) * b.n; };
    data.p_p_boundary = d.p_p;
    data.darcy_flux = [u = d.u_p](const BoundaryPoint& b) { return u(b.x, b.t).dot(b.n); };
    data.u_s_boundary = d.u_s;
    data.solid_traction = [s = d.sigma_p](const BoundaryPoint& b) -> Vec2 { return s(b.x, b.t) * b.n; };

    // Interface data: the residual of each transmission condition at the
    // exact fields, with n = n_f and n_p = -n_f.
    data.g_f = [d, p](const BoundaryPoint& b) -> Vec2 {
        const Vec2 t = interface_tangent(b.n);
        const double slip = (d.u_f(b.x, b.t) - d.theta(b.x, b.t)).dot(t);
        return d.sigma_f(b.x, b.t) * b.n + d.lambda(b.x, b.t) * b.n + p.bjs_coefficient(t) * slip * t;
    };
    data.g_s = [d, p](const BoundaryPoint& b) -> Vec2 {
        const Vec2 t = interface_tangent(b.n);
        const Vec2 np = -b.n;
        const double slip = (d.u_f(b.x, b.t) - d.theta(b.x, b.t)).dot(t);
        return d.sigma_p(b.x, b.t) * np - p.bjs_coefficient(t) * slip * t + d.lambda(b.x, b.t) * np;
    };
    data.g_m = [d](const BoundaryPoint& b) {
        return d.u_f(b.x, b.t).dot(b.n) - (d.theta(b.x, b.t) + d.u_p(b.x, b.t)).dot(b.n);
    };
    return data;
}

FieldSet exact_fields(const DerivedFields& d) {
    FieldSet f;
    f.sigma_p = d.sigma_p;
    f.p_p = d.p_p;
    f.u_p = d.u_p;
    f.T_f = d.T_f;
    f.u_f = d.u_f;
    f.theta = d.theta;
    f.lambda = d.lambda;
    f.u_s = d.u_s;
    f.gamma_p = d.gamma_p;
    f.eta = d.eta;
    return f;
}

// ---------------------------------------------------------------------------

const char* error_field_name(ErrorField f) {
    static const char* names[kNumErrorFields] = {"T_f", "u_f", "p_f",     "sigma_p", "p_p",   "u_p",
                                                 "u_s", "gamma_p", "eta", "theta",   "lambda"};
    return names[static_cast<int>(f)];
}

SizeKind rate_size(ErrorField f) {
    switch (f) {
    case ErrorField::T_f:
    case ErrorField::u_f:
    case ErrorField::p_f:
        return SizeKind::fluid;
    case ErrorField::theta:
    case ErrorField::lambda:
        return SizeKind::trace;
    default:
        return SizeKind::poro;
    }
}

bool uses_max_in_time(ErrorField f) { return f == ErrorField::sigma_p || f == ErrorField::p_p; }

namespace {

struct NormSums {
    FieldErrors s{};
    void add(ErrorField f, double v) { s[static_cast<int>(f)] += v; }
    FieldErrors sqrt() const {
        FieldErrors r;
        for (int i = 0; i < kNumErrorFields; ++i) r[i] = std::sqrt(s[i]);
        return r;
    }
};

// Accumulate squared norms of (exact - discrete); `state` may be null, which
// measures the exact fields.
FieldErrors norms(const Discretization& disc, const PhysicalParams& params, const SystemState* state,
                  const DerivedFields& ex, double t, int order) {
    NormSums ns;
    const QuadRule& rule = triangle_rule(order);
    const Vector zero = Vector::Zero(disc.layout.size());
    const Vector& x = state ? state->x : zero;

    if (disc.has_fluid()) {
        const Mesh& m = *disc.fluid;
        const auto T = disc.block(x, Field::T_f);
        const auto u = disc.block(x, Field::u_f);
        for (Index c = 0; c < m.num_triangles(); ++c) {
            const AffineMap map = element_map(m, c);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double w = rule.weights[q] * std::abs(map.detJ);
                const Vec2& ref = rule.points[q];
                const Vec2 xp = map.to_physical(ref);
                Vec2 divT;
                Mat2 gu;
                const Mat2 Th = eval_mat_bdm1(disc.space(Field::T_f), T, c, map, ref, &divT);
                const Vec2 uh = eval_vec_p1(disc.space(Field::u_f), u, c, map, ref, &gu);
                const double ph = state ? -0.5 * (Th.trace() + params.rho * uh.squaredNorm()) : 0.0;
                ns.add(ErrorField::T_f, w * ((ex.T_f(xp, t) - Th).squaredNorm() + (ex.div_T_f(xp, t) - divT).squaredNorm()));
                ns.add(ErrorField::u_f, w * ((ex.u_f(xp, t) - uh).squaredNorm() + (ex.grad_u_f(xp, t) - gu).squaredNorm()));
                ns.add(ErrorField::p_f, w * std::pow(ex.p_f(xp, t) - ph, 2));
            }
        }
    }

    const Mesh& m = *disc.poro;
    const auto S = disc.block(x, Field::sigma_p);
    const auto P = disc.block(x, Field::p_p);
    const auto U = disc.block(x, Field::u_p);
    const auto Us = disc.block(x, Field::u_s);
    const auto G = disc.block(x, Field::gamma_p);
    const Vector eta0 = Vector::Zero(disc.layout.dim(Field::u_s));
    const Vector& eta = state && state->eta.size() ? state->eta : eta0;
    for (Index c = 0; c < m.num_triangles(); ++c) {
        const AffineMap map = element_map(m, c);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = rule.weights[q] * std::abs(map.detJ);
            const Vec2& ref = rule.points[q];
            const Vec2 xp = map.to_physical(ref);
            Vec2 divS;
            double divU;
            const Mat2 Sh = eval_mat_bdm1(disc.space(Field::sigma_p), S, c, map, ref, &divS);
            const Vec2 Uh = eval_vec_bdm1(disc.space(Field::u_p), U, c, map, ref, &divU);
            const double gh = eval_scalar_p1(disc.space(Field::gamma_p), G, c, map, ref);
            ns.add(ErrorField::sigma_p,
                   w * ((ex.sigma_p(xp, t) - Sh).squaredNorm() + (ex.div_sigma_p(xp, t) - divS).squaredNorm()));
            ns.add(ErrorField::p_p, w * std::pow(ex.p_p(xp, t) - P[c], 2));
            ns.add(ErrorField::u_p, w * ((ex.u_p(xp, t) - Uh).squaredNorm() + std::pow(ex.div_u_p(xp, t) - divU, 2)));
            ns.add(ErrorField::u_s, w * (ex.u_s(xp, t) - Vec2(Us[2 * c], Us[2 * c + 1])).squaredNorm());
            ns.add(ErrorField::gamma_p, w * 2 * std::pow(ex.gamma_p(xp, t) - gh, 2));
            ns.add(ErrorField::eta, w * (ex.eta(xp, t) - Vec2(eta[2 * c], eta[2 * c + 1])).squaredNorm());
        }
    }

    const auto Th = disc.block(x, Field::theta);
    const auto Lh = disc.block(x, Field::lambda);
    const QuadRule& srule = segment_rule(order);
    const auto& tp = disc.traces->trace_p;
    for (Index s = 0; s < static_cast<Index>(tp.size()); ++s) {
        const double len = (tp[s].b - tp[s].a).norm();
        for (std::size_t q = 0; q < srule.size(); ++q) {
            const double sl = srule.points[q].x();
            const double w = srule.weights[q] * len;
            const Vec2 xp = tp[s].a + sl * (tp[s].b - tp[s].a);
            ns.add(ErrorField::theta, w * (ex.theta(xp, t) - eval_trace_vec(Th, s, sl)).squaredNorm());
            ns.add(ErrorField::lambda, w * std::pow(ex.lambda(xp, t) - eval_trace_scalar(Lh, s, sl), 2));
        }
    }
    return ns.sqrt();
}

} // namespace

FieldErrors spatial_errors(const Discretization& disc, const PhysicalParams& params, const SystemState& s,
                           const DerivedFields& exact, int order) {
    return norms(disc, params, &s, exact, s.t, order);
}

FieldErrors exact_norms(const Discretization& disc, const PhysicalParams& params, const DerivedFields& exact,
                        double t, int order) {
    return norms(disc, params, nullptr, exact, t, order);
}

void ErrorAccumulator::add(const FieldErrors& e, double dt) {
    for (int i = 0; i < kNumErrorFields; ++i) {
        sum2_[i] += dt * e[i] * e[i];
        max_[i] = std::max(max_[i], e[i]);
    }
    ++count_;
}

FieldErrors ErrorAccumulator::result() const {
    FieldErrors r;
    for (int i = 0; i < kNumErrorFields; ++i)
        r[i] = uses_max_in_time(static_cast<ErrorField>(i)) ? max_[i] : std::sqrt(sum2_[i]);
    return r;
}

// ---------------------------------------------------------------------------

ConservationResidual local_conservation(const Discretization& disc, const PhysicalParams& params,
                                        const ProblemData& data, const SystemState& prev, const SystemState& cur,
                                        int order) {
    const double dt = cur.t - prev.t;
    if (!(dt > 0)) throw InvalidArgument("local_conservation needs two consecutive states");
    const Mesh& m = *disc.poro;
    const QuadRule& rule = triangle_rule(order);
    const ComplianceOp A(params.lambda_p, params.mu_p, params.c_skew());
    const auto S1 = disc.block(cur.x, Field::sigma_p), S0 = disc.block(prev.x, Field::sigma_p);
    const auto P1 = disc.block(cur.x, Field::p_p), P0 = disc.block(prev.x, Field::p_p);
    const auto U = disc.block(cur.x, Field::u_p);
    const auto V1 = disc.block(cur.x, Field::u_s), V0 = disc.block(prev.x, Field::u_s);
    const double a = params.alpha_p;

    std::vector<double> mass(m.num_triangles()), mom(2 * m.num_triangles());
    double mass_scale = 0, mom_scale = 0;
    for (Index c = 0; c < m.num_triangles(); ++c) {
        const AffineMap map = element_map(m, c);
        const double dp = (P1[c] - P0[c]) / dt;
        double t_store = 0, t_comp = 0, t_div = 0, t_src = 0;
        Vec2 m_div = Vec2::Zero(), m_src = Vec2::Zero(), m_dyn = Vec2::Zero();
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = rule.weights[q] * std::abs(map.detJ);
            const Vec2& ref = rule.points[q];
            const Vec2 xp = map.to_physical(ref);
            Vec2 d1, d0;
            const Mat2 s1 = eval_mat_bdm1(disc.space(Field::sigma_p), S1, c, map, ref, &d1);
            const Mat2 s0 = eval_mat_bdm1(disc.space(Field::sigma_p), S0, c, map, ref, &d0);
            double du;
            eval_vec_bdm1(disc.space(Field::u_p), U, c, map, ref, &du);
            t_store += w * params.s0 * dp;
            t_comp += w * a * A.apply((s1 - s0) / dt + a * dp * Mat2::Identity()).trace();
            t_div += w * du;
            if (data.q_p) t_src += w * data.q_p(xp, cur.t);
            m_div += w * d1;
            if (data.f_p) m_src += w * data.f_p(xp, cur.t);
        }
        const double area = m.area(c);
        if (params.dyn.rho_p != 0.0)
            m_dyn += params.dyn.rho_p * area * Vec2(V1[2 * c] - V0[2 * c], V1[2 * c + 1] - V0[2 * c + 1]) / dt;
        if (params.dyn.beta != 0.0 && cur.eta.size())
            m_dyn -= params.dyn.beta * area * Vec2(cur.eta[2 * c], cur.eta[2 * c + 1]);
        mass[c] = t_store + t_comp + t_div - t_src;
        mass_scale = std::max(mass_scale, std::abs(t_store) + std::abs(t_comp) + std::abs(t_div) + std::abs(t_src));
        const Vec2 r = m_dyn - m_div - m_src;
        mom[2 * c] = r.x();
        mom[2 * c + 1] = r.y();
        mom_scale = std::max(mom_scale, m_dyn.cwiseAbs().maxCoeff() + m_div.cwiseAbs().maxCoeff() +
                                            m_src.cwiseAbs().maxCoeff());
    }
    ConservationResidual out;
    for (double v : mass) out.darcy_mass = std::max(out.darcy_mass, std::abs(v));
    for (double v : mom) out.solid_momentum = std::max(out.solid_momentum, std::abs(v));
    if (mass_scale > 0) out.darcy_mass /= mass_scale;
    if (mom_scale > 0) out.solid_momentum /= mom_scale;
    return out;
}

double interface_mass_residual(const Discretization& disc, const ProblemData& data, const SystemState& s,
                               int order) {
    const auto& tr = *disc.traces;
    if (tr.empty()) return 0.0;
    const auto u = disc.block(s.x, Field::u_f);
    const auto up = disc.block(s.x, Field::u_p);
    const auto th = disc.block(s.x, Field::theta);
    std::vector<double> r(2 * tr.trace_p.size(), 0.0);
    const QuadRule& rule = segment_rule(order);
    for (const MergedSegment& ms : tr.merged) {
        const TraceSegment& sf = tr.trace_f[ms.seg_f];
        const TraceSegment& sp = tr.trace_p[ms.seg_p];
        const AffineMap mf = element_map(*disc.fluid, sf.element);
        const AffineMap mp = element_map(*disc.poro, sp.element);
        const Vec2 d = sp.b - sp.a;
        const double len = (ms.b - ms.a).norm();
        const std::uint32_t tg = disc.poro->edges[sp.edge].tag;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Vec2 x = ms.a + rule.points[q].x() * (ms.b - ms.a);
            const double w = rule.weights[q] * len;
            const double sl = (x - sp.a).dot(d) / d.squaredNorm();
            const Vec2 uf = eval_vec_p1(disc.space(Field::u_f), u, sf.element, mf, mf.to_reference(x));
            const Vec2 upv = eval_vec_bdm1(disc.space(Field::u_p), up, sp.element, mp, mp.to_reference(x));
            const Vec2 thv = eval_trace_vec(th, ms.seg_p, sl);
            double flux = uf.dot(sf.normal) + (thv + upv).dot(sp.normal);
            if (data.g_m) flux -= data.g_m(BoundaryPoint{x, sf.normal, tg, s.t});
            r[2 * ms.seg_p] += w * (1 - sl) * flux;
            r[2 * ms.seg_p + 1] += w * sl * flux;
        }
    }
    double mx = 0;
    for (double v : r) mx = std::max(mx, std::abs(v));
    return mx;
}

// ---------------------------------------------------------------------------

std::vector<LevelSpec> example1_levels() {
    return {{8, 7, 5, 5}, {16, 13, 10, 8}, {32, 27, 20, 17}, {64, 51, 40, 28}};
}

std::vector<LevelSpec> parse_levels(const std::string& text) {
    std::vector<LevelSpec> out;
    if (const auto b = text.find_first_not_of(" \t"); b != std::string::npos) {
        const auto e = text.find_last_not_of(" \t");
        const std::string t = text.substr(b, e - b + 1);
        if (std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            const auto frozen = example1_levels();
            const int n = std::stoi(t);
            if (n < 1 || n > int(frozen.size()))
                throw ConfigError("convergence.levels",
                                  "level count must be in [1, " + std::to_string(frozen.size()) + "], got " + t);
            return {frozen.begin(), frozen.begin() + n};
        }
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        item = item.substr(b, e - b + 1);
        LevelSpec l;
        char x1, colon, x2;
        std::istringstream is(item);
        if (!(is >> l.fluid_nx >> x1 >> l.fluid_ny >> colon >> l.poro_nx >> x2 >> l.poro_ny) || x1 != 'x' ||
            colon != ':' || x2 != 'x' || !(is >> std::ws).eof())
            throw ConfigError("convergence.levels", "malformed level '" + item + "', expected FXxFY:PXxPY");
        if (l.fluid_nx < 1 || l.fluid_ny < 1 || l.poro_nx < 1 || l.poro_ny < 1)
            throw ConfigError("convergence.levels", "level counts must be positive in '" + item + "'");
        out.push_back(l);
    }
    if (out.empty()) throw ConfigError("convergence.levels", "no levels given");
    return out;
}

std::pair<Mesh, Mesh> example1_meshes(const LevelSpec& level) {
    Mesh f = build_structured_rect({0, 1, 0, 1}, level.fluid_nx, level.fluid_ny, Subdomain::fluid);
    f.tag_side(Side::bottom, tag::interface);
    f.tag_side(Side::top, tag::fluid_neumann);
    f.tag_side(Side::left, tag::fluid_dirichlet);
    f.tag_side(Side::right, tag::fluid_dirichlet);
    Mesh p = build_structured_rect({0, 1, -1, 0}, level.poro_nx, level.poro_ny, Subdomain::poro);
    p.tag_side(Side::top, tag::interface);
    p.tag_side(Side::bottom, tag::darcy_dirichlet | tag::elast_dirichlet);
    p.tag_side(Side::left, tag::darcy_neumann | tag::elast_neumann);
    p.tag_side(Side::right, tag::darcy_neumann | tag::elast_neumann);
    return {std::move(f), std::move(p)};
}

int step_count(double T, double dt) {
    if (!(dt > 0)) throw ConfigError("time.dt", "must be positive");
    if (!(T > 0)) throw ConfigError("time.T", "must be positive");
    const long long n = std::llround(T / dt);
    if (n < 1 || std::abs(n * dt - T) > 1e-9 * T) throw ConfigError("time.T", "must be an integer multiple of time.dt");
    return static_cast<int>(n);
}

LevelResult run_mms_level(const LevelSpec& level, const AnalyticSolution& a, const PhysicalParams& params,
                          const StudyOptions& opts) {
    auto [mf, mp] = example1_meshes(level);
    LevelResult r;
    r.spec = level;
    r.h_f = mesh_size(mf);
    r.h_p = mesh_size(mp);
    const Discretization disc = make_discretization(std::move(mf), std::move(mp));
    for (const auto& s : disc.traces->trace_p) r.h_tp = std::max(r.h_tp, s.length());
    r.dofs = disc.layout.size();

    const DerivedFields ex = derive_fields(a, params);
    const ProblemData data = manufactured_problem(a, params);
    const TimeStepper stepper(disc, params, data, opts.dt, opts.newton, opts.assembly);
    SystemState s = interpolate_state(disc, exact_fields(ex), 0.0);
    ErrorAccumulator acc;
    const int n = step_count(opts.T, opts.dt);
    int iters = 0;
    for (int m = 0; m < n; ++m) {
        TimeStepper::Result res = stepper.step(s);
        iters += res.iterations;
        r.newton_history.push_back(res.residuals);
        const ConservationResidual c = local_conservation(disc, params, data, s, res.state, opts.assembly.volume_order);
        r.conservation.darcy_mass = std::max(r.conservation.darcy_mass, c.darcy_mass);
        r.conservation.solid_momentum = std::max(r.conservation.solid_momentum, c.solid_momentum);
        r.interface_residual = std::max(r.interface_residual, interface_mass_residual(disc, data, res.state));
        s = std::move(res.state);
        acc.add(spatial_errors(disc, params, s, ex), opts.dt);
        if (opts.log) opts.log("  step " + std::to_string(m + 1) + "/" + std::to_string(n) +
                               " newton=" + std::to_string(res.iterations));
    }
    r.steps = n;
    r.avg_newton = static_cast<double>(iters) / n;
    r.errors = acc.result();
    if (opts.log) {
        std::ostringstream os;
        os << "level " << level.fluid_nx << "x" << level.fluid_ny << ":" << level.poro_nx << "x" << level.poro_ny
           << " dofs=" << r.dofs << " avg_newton=" << r.avg_newton;
        opts.log(os.str());
    }
    return r;
}

ConvergenceTable convergence_study(const std::vector<LevelSpec>& levels, const AnalyticSolution& a,
                                   const PhysicalParams& params, const StudyOptions& opts) {
    if (levels.empty()) throw InvalidArgument("convergence study needs at least one level");
    ConvergenceTable t;
    for (const LevelSpec& l : levels) t.levels.push_back(run_mms_level(l, a, params, opts));
    return t;
}

std::vector<FieldErrors> ConvergenceTable::rates() const {
    std::vector<FieldErrors> out;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        FieldErrors r;
        const LevelResult &a = levels[k], &b = levels[k + 1];
        for (int f = 0; f < kNumErrorFields; ++f) {
            double ha = a.h_p, hb = b.h_p;
            switch (rate_size(static_cast<ErrorField>(f))) {
            case SizeKind::fluid: ha = a.h_f, hb = b.h_f; break;
            case SizeKind::trace: ha = a.h_tp, hb = b.h_tp; break;
            case SizeKind::poro: break;
            }
            r[f] = std::log(a.errors[f] / b.errors[f]) / std::log(ha / hb);
        }
        out.push_back(r);
    }
    return out;
}

void ConvergenceTable::write_csv(std::ostream& out) const {
    out << "level,h_f,h_p,h_tp";
    for (int f = 0; f < kNumErrorFields; ++f) {
        const char* n = error_field_name(static_cast<ErrorField>(f));
        out << ",err_" << n << ",rate_" << n;
    }
    out << ",avg_newton\n";
    const auto r = rates();
    out << std::setprecision(6) << std::scientific;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const LevelResult& l = levels[k];
        out << k + 1 << "," << l.h_f << "," << l.h_p << "," << l.h_tp;
        for (int f = 0; f < kNumErrorFields; ++f) {
            out << "," << l.errors[f] << ",";
            if (k > 0) out << std::fixed << std::setprecision(4) << r[k - 1][f] << std::scientific << std::setprecision(6);
        }
        out << "," << std::fixed << std::setprecision(2) << l.avg_newton << std::scientific << std::setprecision(6) << "\n";
    }
}

} // namespace nsbiot
