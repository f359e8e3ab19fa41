#include "nsbiot/postprocess.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>

namespace nsbiot {

namespace {

const std::array<Vec2, 3> kRefVertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
const Vec2 kRefCentroid(1.0 / 3.0, 1.0 / 3.0);

template <class PointFn>
DgField dg_from_points(const FESpace& T_space, int components, PointFn&& fn) {
    const Mesh& m = *T_space.mesh;
    DgField out;
    out.components = components;
    out.values.resize(static_cast<std::size_t>(m.num_triangles()) * 3 * components);
    for (Index t = 0; t < m.num_triangles(); ++t) {
        const AffineMap map = element_map(m, t);
        for (int i = 0; i < 3; ++i) fn(t, map, kRefVertices[i], &out.values[(3 * t + i) * components]);
    }
    return out;
}

void push_tensor(std::vector<double>& v, const Mat2& m) {
    v.insert(v.end(), {m(0, 0), m(0, 1), m(1, 0), m(1, 1)});
}

bool wanted(const ExportOptions& o, const std::string& name) {
    return o.fields.empty() || std::find(o.fields.begin(), o.fields.end(), name) != o.fields.end();
}

} // namespace

double recover_pf(const Mat2& T, const Vec2& u, double rho) { return -0.5 * (T.trace() + rho * u.squaredNorm()); }

Mat2 recover_sigma_f(const Mat2& T, const Vec2& u, double rho) { return T + rho * u * u.transpose(); }

DgField recover_pf(const FESpace& T_space, const Eigen::Ref<const Vector>& T, const FESpace& u_space,
                   const Eigen::Ref<const Vector>& u, double rho) {
    return dg_from_points(T_space, 1, [&](Index t, const AffineMap& map, const Vec2& ref, double* out) {
        out[0] = recover_pf(eval_mat_bdm1(T_space, T, t, map, ref), eval_vec_p1(u_space, u, t, map, ref), rho);
    });
}

DgField recover_pf(const Discretization& d, const Vector& x, double rho) {
    return recover_pf(d.space(Field::T_f), d.block(x, Field::T_f), d.space(Field::u_f), d.block(x, Field::u_f), rho);
}

DgField recover_sigma_f(const FESpace& T_space, const Eigen::Ref<const Vector>& T, const FESpace& u_space,
                        const Eigen::Ref<const Vector>& u, double rho) {
    return dg_from_points(T_space, 4, [&](Index t, const AffineMap& map, const Vec2& ref, double* out) {
        const Mat2 s = recover_sigma_f(eval_mat_bdm1(T_space, T, t, map, ref), eval_vec_p1(u_space, u, t, map, ref), rho);
        out[0] = s(0, 0), out[1] = s(0, 1), out[2] = s(1, 0), out[3] = s(1, 1);
    });
}

DgField recover_sigma_f(const Discretization& d, const Vector& x, double rho) {
    return recover_sigma_f(d.space(Field::T_f), d.block(x, Field::T_f), d.space(Field::u_f), d.block(x, Field::u_f),
                           rho);
}

std::vector<Vector> accumulate_displacement(const Vector& eta0, const std::vector<Vector>& u_s_history, double dt) {
    std::vector<Vector> out;
    out.reserve(u_s_history.size());
    Vector eta = eta0;
    for (const Vector& us : u_s_history) {
        if (us.size() != eta.size()) throw InvalidArgument("u_s history size does not match eta");
        eta += dt * us;
        out.push_back(eta);
    }
    return out;
}

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<FieldExport>& fields,
               const std::string& title) {
    for (const auto& f : fields) {
        if (f.components < 1 || f.components > 4) throw InvalidArgument("field '" + f.name + "' has bad component count");
        const Index n = f.attachment == Attachment::point ? mesh.num_vertices() : mesh.num_triangles();
        if (static_cast<Index>(f.values.size()) != n * f.components)
            throw InvalidArgument("field '" + f.name + "' has " + std::to_string(f.values.size()) + " values, expected " +
                                  std::to_string(n * f.components));
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << std::setprecision(12);
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (const Vec2& v : mesh.vertices) out << v.x() << ' ' << v.y() << " 0\n";
    out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << mesh.num_triangles() << '\n';
    for (Index t = 0; t < mesh.num_triangles(); ++t) out << "5\n";

    for (Attachment att : {Attachment::point, Attachment::cell}) {
        bool first = true;
        for (const auto& f : fields) {
            if (f.attachment != att) continue;
            if (first) {
                out << (att == Attachment::point ? "POINT_DATA " : "CELL_DATA ")
                    << (att == Attachment::point ? mesh.num_vertices() : mesh.num_triangles()) << '\n';
                first = false;
            }
            out << "SCALARS " << f.name << " double " << f.components << "\nLOOKUP_TABLE default\n";
            for (std::size_t i = 0; i < f.values.size(); ++i)
                out << f.values[i] << ((i + 1) % f.components == 0 ? '\n' : ' ');
        }
    }
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::vector<FieldExport> fluid_export_fields(const Discretization& d, const SystemState& s,
                                             const PhysicalParams& params, const ExportOptions& opts) {
    std::vector<FieldExport> out;
    if (!d.has_fluid()) return out;
    const Mesh& m = *d.fluid;
    const FESpace &Ts = d.space(Field::T_f), &us = d.space(Field::u_f);
    const auto T = d.block(s.x, Field::T_f), u = d.block(s.x, Field::u_f);
    const double off = opts.pressure_offset;

    if (wanted(opts, "u_f")) {
        FieldExport f{"u_f", Attachment::point, 2, {}};
        for (Index v = 0; v < m.num_vertices(); ++v) f.values.insert(f.values.end(), {u[us.vertex_dof(v, 0)], u[us.vertex_dof(v, 1)]});
        out.push_back(std::move(f));
    }
    FieldExport pf{"p_f", Attachment::cell, 1, {}}, Tf{"T_f", Attachment::cell, 4, {}},
        sf{"sigma_f", Attachment::cell, 4, {}};
    for (Index t = 0; t < m.num_triangles(); ++t) {
        const AffineMap map = element_map(m, t);
        const Mat2 Tc = eval_mat_bdm1(Ts, T, t, map, kRefCentroid) - off * Mat2::Identity();
        const Vec2 uc = eval_vec_p1(us, u, t, map, kRefCentroid);
        pf.values.push_back(recover_pf(Tc, uc, params.rho));
        push_tensor(Tf.values, Tc);
        push_tensor(sf.values, recover_sigma_f(Tc, uc, params.rho));
    }
    for (FieldExport* f : {&pf, &Tf, &sf})
        if (wanted(opts, f->name)) out.push_back(std::move(*f));
    return out;
}

std::vector<FieldExport> poro_export_fields(const Discretization& d, const SystemState& s,
                                            const PhysicalParams& params, const ExportOptions& opts) {
    std::vector<FieldExport> out;
    const Mesh& m = *d.poro;
    const double off = opts.pressure_offset;
    if (wanted(opts, "gamma_p")) {
        const FESpace& gs = d.space(Field::gamma_p);
        const auto g = d.block(s.x, Field::gamma_p);
        FieldExport f{"gamma_p", Attachment::point, 1, {}};
        for (Index v = 0; v < m.num_vertices(); ++v) f.values.push_back(g[gs.vertex_dof(v)]);
        out.push_back(std::move(f));
    }
    const FESpace &Ss = d.space(Field::sigma_p), &ps = d.space(Field::p_p), &ups = d.space(Field::u_p),
                  &uss = d.space(Field::u_s);
    const auto S = d.block(s.x, Field::sigma_p), P = d.block(s.x, Field::p_p), U = d.block(s.x, Field::u_p),
               V = d.block(s.x, Field::u_s);
    FieldExport pp{"p_p", Attachment::cell, 1, {}}, up{"u_p", Attachment::cell, 2, {}},
        usf{"u_s", Attachment::cell, 2, {}}, eta{"eta", Attachment::cell, 2, {}},
        sp{"sigma_p", Attachment::cell, 4, {}};
    for (Index t = 0; t < m.num_triangles(); ++t) {
        const AffineMap map = element_map(m, t);
        pp.values.push_back(P[ps.cell_dofs(t)[0]] + off);
        const Vec2 uc = eval_vec_bdm1(ups, U, t, map, kRefCentroid);
        up.values.insert(up.values.end(), {uc.x(), uc.y()});
        const Index* vd = uss.cell_dofs(t);
        usf.values.insert(usf.values.end(), {V[vd[0]], V[vd[1]]});
        if (s.eta.size() == 2 * m.num_triangles())
            eta.values.insert(eta.values.end(), {s.eta[2 * t], s.eta[2 * t + 1]});
        else
            eta.values.insert(eta.values.end(), {0.0, 0.0});
        push_tensor(sp.values, eval_mat_bdm1(Ss, S, t, map, kRefCentroid) - params.alpha_p * off * Mat2::Identity());
    }
    for (FieldExport* f : {&pp, &up, &usf, &eta, &sp})
        if (wanted(opts, f->name)) out.push_back(std::move(*f));
    return out;
}

std::vector<std::filesystem::path> export_vtk(const Discretization& d, const SystemState& s,
                                              const PhysicalParams& params, const std::filesystem::path& dir,
                                              const std::string& stem, const ExportOptions& opts) {
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "_%04d.vtk", s.step);
    std::vector<std::filesystem::path> paths;
    if (d.has_fluid()) {
        paths.push_back(dir / (stem + "_fluid" + suffix));
        write_vtk(paths.back(), *d.fluid, fluid_export_fields(d, s, params, opts), stem + " fluid t=" + std::to_string(s.t));
    }
    paths.push_back(dir / (stem + "_poro" + suffix));
    write_vtk(paths.back(), *d.poro, poro_export_fields(d, s, params, opts), stem + " poro t=" + std::to_string(s.t));
    return paths;
}

std::vector<InterfaceSample> interface_samples(const Discretization& d, const SystemState& s,
                                               const PhysicalParams& params) {
    std::vector<InterfaceSample> out;
    if (d.traces->empty()) return out;
    const InterfaceTraces& tr = *d.traces;
    const auto T = d.block(s.x, Field::T_f), u = d.block(s.x, Field::u_f), S = d.block(s.x, Field::sigma_p),
               U = d.block(s.x, Field::u_p), V = d.block(s.x, Field::u_s);
    const bool have_eta = s.eta.size() == 2 * d.poro->num_triangles();
    for (const MergedSegment& ms : tr.merged) {
        const TraceSegment &sf = tr.trace_f[ms.seg_f], &sp = tr.trace_p[ms.seg_p];
        const Vec2 x = 0.5 * (ms.a + ms.b);
        const Vec2 nf = sf.normal, np = sp.normal, t = interface_tangent(nf);
        const AffineMap mf = element_map(*d.fluid, sf.element), mp = element_map(*d.poro, sp.element);
        const Vec2 rf = mf.to_reference(x), rp = mp.to_reference(x);
        const Mat2 Tf = eval_mat_bdm1(d.space(Field::T_f), T, sf.element, mf, rf);
        const Vec2 uf = eval_vec_p1(d.space(Field::u_f), u, sf.element, mf, rf);
        const Vec2 up = eval_vec_bdm1(d.space(Field::u_p), U, sp.element, mp, rp);
        const Index* vd = d.space(Field::u_s).cell_dofs(sp.element);
        const Vec2 us(V[vd[0]], V[vd[1]]);
        InterfaceSample smp;
        smp.s = 0.5 * (ms.s0 + ms.s1);
        smp.u_f_n = uf.dot(nf);
        smp.solid_flux_n = (up + us).dot(np);
        smp.sigma_f_nt = (recover_sigma_f(Tf, uf, params.rho) * nf).dot(t);
        smp.sigma_p_nt = (eval_mat_bdm1(d.space(Field::sigma_p), S, sp.element, mp, rp) * np).dot(t);
        if (have_eta) smp.eta_n = Vec2(s.eta[2 * sp.element], s.eta[2 * sp.element + 1]).dot(np);
        out.push_back(smp);
    }
    return out;
}

void write_interface_csv_header(std::ostream& out) {
    out << "t,arclength,u_f_dot_n_f,u_p_plus_u_s_dot_n_p,sigma_f_n_dot_t,sigma_p_n_dot_t,eta_dot_n_p\n";
}

void write_interface_csv(std::ostream& out, double t, const std::vector<InterfaceSample>& samples) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(10);
    for (const auto& s : samples)
        out << t << ',' << s.s << ',' << s.u_f_n << ',' << s.solid_flux_n << ',' << s.sigma_f_nt << ','
            << s.sigma_p_nt << ',' << s.eta_n << '\n';
    out.flags(flags);
    out.precision(prec);
}

} // namespace nsbiot
