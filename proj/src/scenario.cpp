#include "nsbiot/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace nsbiot {

PhysicalParams filter_params(const std::string& material) {
    PhysicalParams p;
    p.mu = 1.81e-8;
    p.rho = 1.225e-3;
    p.s0 = 7e-2;
    p.K << 0.505e-6, 0.495e-6, 0.495e-6, 0.505e-6;
    p.alpha_bjs = 1.0;
    p.alpha_p = 1.0;
    if (material == "hard") {
        p.lambda_p = 1e5;
        p.mu_p = 1e4;
    } else if (material == "soft") {
        p.lambda_p = 1e3;
        p.mu_p = 1e2;
    } else {
        throw ConfigError("filter.material", "expected hard or soft, got '" + material + "'");
    }
    return p;
}

std::pair<Mesh, Mesh> filter_meshes(int refine) {
    if (refine < 1) throw ConfigError("mesh.refine", "must be >= 1");
    Mesh whole = build_structured_rect({0, 0.75, 0, 0.25}, 30 * refine, 10 * refine, Subdomain::fluid);
    for (Index t = 0; t < whole.num_triangles(); ++t) {
        const Vec2 c = whole.centroid(t);
        if (c.x() > 0.25 && c.x() < 0.5 && c.y() < 0.2) whole.subdomain[t] = Subdomain::poro;
    }
    for (auto& e : whole.edges) e.tag = tag::none;
    whole.finalize();
    auto [f, p] = split_subdomains(whole);
    constexpr double eps = 1e-12;
    for (auto& e : f.edges) {
        if (e.tri[1] >= 0 || (e.tag & tag::interface)) continue;
        const Vec2 m = 0.5 * (f.vertices[e.v[0]] + f.vertices[e.v[1]]);
        e.tag = m.x() < eps ? tag::fluid_inflow : m.x() > 0.75 - eps ? tag::fluid_outflow : tag::fluid_dirichlet;
    }
    for (auto& e : p.edges) {
        if (e.tri[1] >= 0 || (e.tag & tag::interface)) continue;
        e.tag = tag::darcy_neumann | tag::elast_dirichlet;
    }
    check_boundary_tags(f, Subdomain::fluid);
    check_boundary_tags(p, Subdomain::poro);
    return {std::move(f), std::move(p)};
}

ProblemData filter_data(double delta_p) {
    ProblemData d;
    d.fluid_traction = [delta_p](const BoundaryPoint& b) -> Vec2 {
        return (b.tag & tag::fluid_inflow) ? Vec2(-delta_p * b.n) : Vec2::Zero();
    };
    return d;
}

Scenario biot_column(const PhysicalParams& params, const ColumnSetup& setup) {
    Mesh p = build_structured_rect({0, 1, 0, 1}, setup.nx, setup.ny, Subdomain::poro);
    p.tag_side(Side::bottom, tag::darcy_neumann | tag::elast_dirichlet);
    p.tag_side(Side::left, tag::darcy_neumann | tag::elast_dirichlet);
    p.tag_side(Side::right, tag::darcy_neumann | tag::elast_dirichlet);
    p.tag_side(Side::top, tag::darcy_dirichlet | tag::elast_dirichlet);
    Scenario s;
    s.name = "biot_column";
    s.disc = make_discretization(Mesh{}, std::move(p));
    s.params = params;
    const double lid = setup.lid;
    // Vanishes with zero slope at the corners, so the pressure stays smooth there.
    s.data.u_s_boundary = [lid](const Vec2& x, double) -> Vec2 {
        if (x.y() < 1 - 1e-12) return Vec2::Zero();
        const double sn = std::sin(pi * x.x());
        return Vec2(lid * sn * sn, 0);
    };
    s.initial = zero_state(s.disc);
    return s;
}

double oscillation_indicator(const Mesh& mesh, const Eigen::Ref<const Vector>& p) {
    const double range = p.maxCoeff() - p.minCoeff();
    if (!(range > 0)) return 0.0;
    double jump = 0;
    for (const auto& e : mesh.edges)
        if (e.tri[1] >= 0) jump = std::max(jump, std::abs(p[e.tri[0]] - p[e.tri[1]]));
    return jump / range;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
    Scenario s;
    s.name = scenario_name(cfg.scenario);
    s.params = cfg.params;
    switch (cfg.scenario) {
    case ScenarioKind::example1_mms: {
        if (cfg.levels.empty()) throw ConfigError("convergence.levels", "no levels");
        auto [f, p] = example1_meshes(cfg.levels.front());
        s.disc = make_discretization(std::move(f), std::move(p));
        const AnalyticSolution a = example1_solution();
        s.data = manufactured_problem(a, s.params);
        if (cfg.initial != InitialMode::analytic)
            throw ConfigError("initial.mode", "the manufactured solution starts from the analytic state");
        s.initial = interpolate_state(s.disc, exact_fields(derive_fields(a, s.params)), 0);
        break;
    }
    case ScenarioKind::example3_filter: {
        auto [f, p] = filter_meshes(cfg.refine);
        s.disc = make_discretization(std::move(f), std::move(p));
        s.data = filter_data(cfg.delta_p);
        if (cfg.initial == InitialMode::analytic)
            throw ConfigError("initial.mode", "no analytic solution for example3_filter");
        // Deviation from the reference pressure.
        s.initial = cfg.initial == InitialMode::constants ? constant_state(s.disc, s.params, cfg.initial_p0 - cfg.p_ref)
                                                          : zero_state(s.disc);
        break;
    }
    case ScenarioKind::custom: {
        if (cfg.mesh_file.empty()) throw ConfigError("mesh.file", "required for custom");
        const Mesh whole = load_mesh(cfg.mesh_file);
        auto [f, p] = split_subdomains(whole);
        if (!f.empty()) check_boundary_tags(f, Subdomain::fluid);
        check_boundary_tags(p, Subdomain::poro);
        s.disc = make_discretization(std::move(f), std::move(p));
        const double pin = cfg.p_in, pout = cfg.p_out, pd = cfg.p_darcy;
        s.data.fluid_traction = [pin, pout](const BoundaryPoint& b) -> Vec2 {
            if (b.tag & tag::fluid_inflow) return -pin * b.n;
            if (b.tag & tag::fluid_outflow) return -pout * b.n;
            return Vec2::Zero();
        };
        if (pd != 0) s.data.p_p_boundary = [pd](const Vec2&, double) { return pd; };
        if (cfg.initial == InitialMode::analytic)
            throw ConfigError("initial.mode", "no analytic solution for a custom scenario");
        s.initial = cfg.initial == InitialMode::constants ? constant_state(s.disc, s.params, cfg.initial_p0)
                                                          : zero_state(s.disc);
        break;
    }
    }
    return s;
}

} // namespace nsbiot
