#include "nsbiot/assembly.hpp"

#include "nsbiot/parallel.hpp"

#include <map>
#include <utility>

namespace nsbiot {

namespace {

using Entry = std::pair<Index, double>;

// Dense local matrix with its global row/column indices.
struct Local {
    int n;
    Eigen::MatrixXd m;
    std::vector<Index> idx;

    explicit Local(int size) : n(size), m(Eigen::MatrixXd::Zero(size, size)), idx(size, -1) {}

    void scatter(std::vector<Triplet>& out) const {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (m(i, j) != 0.0) out.emplace_back(idx[i], idx[j], m(i, j));
    }
};

SparseMatrix to_matrix(Index n, const std::vector<Triplet>& t) {
    SparseMatrix a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

Vector to_vector(Index n, const std::vector<Entry>& entries) {
    Vector v = Vector::Zero(n);
    for (const auto& [i, val] : entries) v[i] += val;
    return v;
}

// Row r of a BDM1_mat basis function built from vector basis v.
Mat2 row_tensor(int r, const Vec2& v) {
    Mat2 s = Mat2::Zero();
    s.row(r) = v.transpose();
    return s;
}

// Quadrature along the straight segment [a, b].
template <class F>
void segment_quadrature(const Vec2& a, const Vec2& b, int order, F&& f) {
    const QuadRule& rule = segment_rule(order);
    const double len = (b - a).norm();
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double s = rule.points[q].x();
        f(Vec2(a + s * (b - a)), rule.weights[q] * len, s);
    }
}

// Fluid element geometry and basis values at one point.
struct FluidPoint {
    Mat2 S[12];
    Vec2 divS[12];
    Vec2 U[6];
    Mat2 G[6]; // gradient of U: row c holds grad(phi_a)

    void eval(const AffineMap& map, const double* signs, const Vec2& ref) {
        Bdm1Eval b;
        eval_bdm1(map, signs, ref, b);
        for (int r = 0; r < 2; ++r)
            for (int l = 0; l < 6; ++l) {
                S[6 * r + l] = row_tensor(r, b.v[l]);
                divS[6 * r + l] = b.div[l] * Vec2::Unit(r);
            }
        P1Eval p;
        eval_p1(map, ref, p);
        for (int a = 0; a < 3; ++a)
            for (int c = 0; c < 2; ++c) {
                U[2 * a + c] = p.v[a] * Vec2::Unit(c);
                G[2 * a + c] = row_tensor(c, p.grad[a]);
            }
    }
};

} // namespace

std::array<double, 2> edge_flux_moments(const Mesh& mesh, Index e, Index tri,
                                        const std::function<double(const Vec2&, const Vec2&)>& flux) {
    const Vec2 x0 = mesh.vertices[mesh.edges[e].v[0]];
    const Vec2 x1 = mesh.vertices[mesh.edges[e].v[1]];
    const Vec2 n_out = mesh.outward_normal(e, tri);
    const Vec2 t = x1 - x0;
    const Vec2 n_g = Vec2(t.y(), -t.x()).normalized();
    const double sgn = n_g.dot(n_out) > 0 ? 1.0 : -1.0;
    std::array<double, 2> m{0.0, 0.0};
    segment_quadrature(x0, x1, 8, [&](const Vec2& x, double w, double s) {
        const double val = sgn * flux(x, n_out) * w;
        m[0] += val;
        m[1] += val * (2.0 * s - 1.0);
    });
    return m;
}

Assembler::Assembler(const Discretization& disc, const PhysicalParams& params, AssemblyOptions opts)
    : disc_(disc), params_(params), opts_(opts),
      compliance_(params.lambda_p, params.mu_p, params.c_skew()) {}

// ---------------------------------------------------------------------------
// Poroelastic volume forms. Local order: sigma (12), p (1), u_p (6), u_s (2),
// gamma (3).
// ---------------------------------------------------------------------------

namespace {

constexpr int kPS = 0, kPP = 12, kPU = 13, kPUS = 19, kPG = 21, kPN = 24;

void poro_indices(const Discretization& d, Index t, Local& loc) {
    const auto& L = d.layout;
    const Index* ds = d.space(Field::sigma_p).cell_dofs(t);
    const Index* du = d.space(Field::u_p).cell_dofs(t);
    const Index* dg = d.space(Field::gamma_p).cell_dofs(t);
    for (int i = 0; i < 12; ++i) loc.idx[kPS + i] = L.begin(Field::sigma_p) + ds[i];
    loc.idx[kPP] = L.begin(Field::p_p) + t;
    for (int i = 0; i < 6; ++i) loc.idx[kPU + i] = L.begin(Field::u_p) + du[i];
    for (int c = 0; c < 2; ++c) loc.idx[kPUS + c] = L.begin(Field::u_s) + 2 * t + c;
    for (int k = 0; k < 3; ++k) loc.idx[kPG + k] = L.begin(Field::gamma_p) + dg[k];
}

constexpr int kFT = 0, kFU = 12, kFN = 18;

void fluid_indices(const Discretization& d, Index t, Local& loc) {
    const auto& L = d.layout;
    const Index* dT = d.space(Field::T_f).cell_dofs(t);
    const Index* du = d.space(Field::u_f).cell_dofs(t);
    for (int i = 0; i < 12; ++i) loc.idx[kFT + i] = L.begin(Field::T_f) + dT[i];
    for (int i = 0; i < 6; ++i) loc.idx[kFU + i] = L.begin(Field::u_f) + du[i];
}

} // namespace

SparseMatrix Assembler::storage() const {
    const Mesh& mesh = *disc_.poro;
    const QuadRule& rule = triangle_rule(opts_.volume_order);
    const double alpha = params_.alpha_p;
    const Mat2 aI = alpha * Mat2::Identity();
    const Mat2 A_aI = compliance_.apply(aI);
    auto trip = parallel_collect<Triplet>(mesh.num_triangles(), opts_.threads, [&](Index t, auto& out) {
        Local loc(kPN);
        poro_indices(disc_, t, loc);
        const AffineMap map = element_map(mesh, t);
        const double* sg = disc_.space(Field::sigma_p).cell_signs(t);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double w = rule.weights[q] * std::abs(map.detJ);
            Bdm1Eval b;
            eval_bdm1(map, sg, rule.points[q], b);
            Mat2 S[12], AS[12];
            for (int i = 0; i < 12; ++i) {
                S[i] = row_tensor(i / 6, b.v[i % 6]);
                AS[i] = compliance_.apply(S[i]);
            }
            for (int i = 0; i < 12; ++i) {
                for (int j = 0; j < 12; ++j) loc.m(kPS + i, kPS + j) += w * ddot(AS[j], S[i]);
                loc.m(kPS + i, kPP) += w * ddot(A_aI, S[i]);
                loc.m(kPP, kPS + i) += w * ddot(AS[i], aI);
            }
            loc.m(kPP, kPP) += w * (ddot(A_aI, aI) + params_.s0);
        }
        loc.scatter(out);
    });
    return to_matrix(disc_.layout.size(), trip);
}

SparseMatrix Assembler::static_blocks() const {
    const Index n = disc_.layout.size();
    std::vector<Triplet> all;

    // Poroelastic element couplings.
    {
        const Mesh& mesh = *disc_.poro;
        const QuadRule& rule = triangle_rule(opts_.volume_order);
        const Mat2 Kinv = params_.K.inverse();
        auto trip = parallel_collect<Triplet>(mesh.num_triangles(), opts_.threads, [&](Index t, auto& out) {
            Local loc(kPN);
            poro_indices(disc_, t, loc);
            const AffineMap map = element_map(mesh, t);
            const double* sg = disc_.space(Field::sigma_p).cell_signs(t);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Vec2& ref = rule.points[q];
                const double w = rule.weights[q] * std::abs(map.detJ);
                Bdm1Eval b;
                eval_bdm1(map, sg, ref, b);
                const double psi[3] = {1 - ref.x() - ref.y(), ref.x(), ref.y()};
                for (int i = 0; i < 12; ++i) {
                    const int r = i / 6, l = i % 6;
                    // (u_s, div tau) and its dual -(v_s, div sigma).
                    loc.m(kPS + i, kPUS + r) += w * b.div[l];
                    loc.m(kPUS + r, kPS + i) -= w * b.div[l];
                    // Skew part: tau_01 - tau_10 against the rotation.
                    const Mat2 S = row_tensor(r, b.v[l]);
                    const double sk = S(0, 1) - S(1, 0);
                    for (int k = 0; k < 3; ++k) {
                        loc.m(kPS + i, kPG + k) += w * psi[k] * sk;
                        loc.m(kPG + k, kPS + i) -= w * psi[k] * sk;
                    }
                }
                for (int i = 0; i < 6; ++i) {
                    for (int j = 0; j < 6; ++j)
                        loc.m(kPU + i, kPU + j) += w * params_.mu * b.v[i].dot(Kinv * b.v[j]);
                    loc.m(kPU + i, kPP) -= w * b.div[i];
                    loc.m(kPP, kPU + i) += w * b.div[i];
                }
            }
            loc.scatter(out);
        });
        all.insert(all.end(), trip.begin(), trip.end());
    }

    // Augmented pseudostress-velocity forms.
    if (disc_.has_fluid()) {
        const Mesh& mesh = *disc_.fluid;
        const QuadRule& rule = triangle_rule(opts_.volume_order);
        const double mu = params_.mu, k1 = params_.k1(), k2 = params_.k2();
        auto trip = parallel_collect<Triplet>(mesh.num_triangles(), opts_.threads, [&](Index t, auto& out) {
            Local loc(kFN);
            fluid_indices(disc_, t, loc);
            const AffineMap map = element_map(mesh, t);
            const double* sg = disc_.space(Field::T_f).cell_signs(t);
            FluidPoint fp;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double w = rule.weights[q] * std::abs(map.detJ);
                fp.eval(map, sg, rule.points[q]);
                Mat2 Sd[12], eU[6], wU[6];
                for (int i = 0; i < 12; ++i) Sd[i] = deviatoric(fp.S[i]);
                for (int m = 0; m < 6; ++m) {
                    eU[m] = sym(fp.G[m]);
                    wU[m] = skew(fp.G[m]);
                }
                for (int i = 0; i < 12; ++i) {
                    for (int j = 0; j < 12; ++j)
                        loc.m(kFT + i, kFT + j) +=
                            w * (ddot(Sd[j], Sd[i]) / (2 * mu) + k1 * fp.divS[j].dot(fp.divS[i]));
                    for (int m = 0; m < 6; ++m) {
                        loc.m(kFT + i, kFU + m) += w * (fp.U[m].dot(fp.divS[i]) + ddot(wU[m], fp.S[i]));
                        loc.m(kFU + m, kFT + i) += w * (-k2 / (2 * mu) * ddot(Sd[i], eU[m]) -
                                                        fp.U[m].dot(fp.divS[i]) - ddot(fp.S[i], wU[m]));
                    }
                }
                for (int m = 0; m < 6; ++m)
                    for (int nn = 0; nn < 6; ++nn) loc.m(kFU + m, kFU + nn) += w * k2 * ddot(eU[nn], eU[m]);
            }
            loc.scatter(out);
        });
        all.insert(all.end(), trip.begin(), trip.end());

        // Fluid-side trace terms on the interface.
        const auto& tf = disc_.traces->trace_f;
        auto trip2 = parallel_collect<Triplet>(static_cast<Index>(tf.size()), opts_.threads, [&](Index s, auto& out) {
            const TraceSegment& seg = tf[s];
            Local loc(kFN);
            fluid_indices(disc_, seg.element, loc);
            const AffineMap map = element_map(mesh, seg.element);
            const double* sg = disc_.space(Field::T_f).cell_signs(seg.element);
            FluidPoint fp;
            segment_quadrature(seg.a, seg.b, opts_.interface_order, [&](const Vec2& x, double w, double) {
                fp.eval(map, sg, map.to_reference(x));
                for (int i = 0; i < 12; ++i) {
                    const Vec2 Sn = fp.S[i] * seg.normal;
                    for (int m = 0; m < 6; ++m) {
                        loc.m(kFT + i, kFU + m) -= w * Sn.dot(fp.U[m]);
                        loc.m(kFU + m, kFT + i) += w * Sn.dot(fp.U[m]);
                    }
                }
            });
            loc.scatter(out);
        });
        all.insert(all.end(), trip2.begin(), trip2.end());
    }
    return to_matrix(n, all);
}

// ---------------------------------------------------------------------------
// Interface coupling. Local order: u_f (6), theta (4), lambda (2),
// sigma_p (12), u_p (6).
// ---------------------------------------------------------------------------

namespace {

constexpr int kIU = 0, kITh = 6, kILa = 10, kIS = 12, kIUp = 24, kIN = 30;

void interface_kernel(const Discretization& d, const PhysicalParams& params, int order, Index seg_f, Index seg_p,
                      const Vec2& a, const Vec2& b, std::vector<Triplet>& out) {
    const auto& tr = *d.traces;
    const TraceSegment& sf = tr.trace_f[seg_f];
    const TraceSegment& sp = tr.trace_p[seg_p];
    const auto& L = d.layout;
    Local loc(kIN);
    const Index* duf = d.space(Field::u_f).cell_dofs(sf.element);
    for (int i = 0; i < 6; ++i) loc.idx[kIU + i] = L.begin(Field::u_f) + duf[i];
    for (int i = 0; i < 4; ++i) loc.idx[kITh + i] = L.begin(Field::theta) + 4 * seg_p + i;
    for (int i = 0; i < 2; ++i) loc.idx[kILa + i] = L.begin(Field::lambda) + 2 * seg_p + i;
    const Index* ds = d.space(Field::sigma_p).cell_dofs(sp.element);
    const Index* du = d.space(Field::u_p).cell_dofs(sp.element);
    for (int i = 0; i < 12; ++i) loc.idx[kIS + i] = L.begin(Field::sigma_p) + ds[i];
    for (int i = 0; i < 6; ++i) loc.idx[kIUp + i] = L.begin(Field::u_p) + du[i];

    const AffineMap map_f = element_map(*d.fluid, sf.element);
    const AffineMap map_p = element_map(*d.poro, sp.element);
    const double* sg = d.space(Field::sigma_p).cell_signs(sp.element);
    const Vec2 nf = sf.normal;
    const Vec2 np = sp.normal;
    const Vec2 t = interface_tangent(nf);
    const double cb = params.bjs_coefficient(t);
    const Vec2 dp = sp.b - sp.a;
    const double len2 = dp.squaredNorm();

    segment_quadrature(a, b, order, [&](const Vec2& x, double w, double) {
        P1Eval pf;
        eval_p1(map_f, map_f.to_reference(x), pf);
        Vec2 U[6];
        for (int k = 0; k < 3; ++k)
            for (int c = 0; c < 2; ++c) U[2 * k + c] = pf.v[k] * Vec2::Unit(c);
        const double s = (x - sp.a).dot(dp) / len2;
        const double Lam[2] = {1 - s, s};
        Vec2 Th[4];
        for (int k = 0; k < 2; ++k)
            for (int c = 0; c < 2; ++c) Th[2 * k + c] = Lam[k] * Vec2::Unit(c);
        Bdm1Eval bp;
        eval_bdm1(map_p, sg, map_p.to_reference(x), bp);

        for (int m = 0; m < 6; ++m) {
            const double Ut = U[m].dot(t), Un = U[m].dot(nf);
            for (int nn = 0; nn < 6; ++nn) loc.m(kIU + m, kIU + nn) += w * cb * U[nn].dot(t) * Ut;
            for (int k = 0; k < 4; ++k) {
                const double Tt = Th[k].dot(t);
                loc.m(kIU + m, kITh + k) -= w * cb * Tt * Ut;
                loc.m(kITh + k, kIU + m) -= w * cb * Ut * Tt;
            }
            for (int k = 0; k < 2; ++k) {
                loc.m(kIU + m, kILa + k) += w * Un * Lam[k];
                loc.m(kILa + k, kIU + m) -= w * Un * Lam[k];
            }
        }
        for (int k = 0; k < 4; ++k) {
            for (int l = 0; l < 4; ++l) loc.m(kITh + k, kITh + l) += w * cb * Th[l].dot(t) * Th[k].dot(t);
            const double Tn = Th[k].dot(np);
            for (int l = 0; l < 2; ++l) {
                loc.m(kITh + k, kILa + l) += w * Tn * Lam[l];
                loc.m(kILa + l, kITh + k) -= w * Tn * Lam[l];
            }
            for (int i = 0; i < 12; ++i) {
                const Vec2 Sn = row_tensor(i / 6, bp.v[i % 6]) * np;
                loc.m(kIS + i, kITh + k) -= w * Sn.dot(Th[k]);
                loc.m(kITh + k, kIS + i) += w * Sn.dot(Th[k]);
            }
        }
        for (int i = 0; i < 6; ++i) {
            const double vn = bp.v[i].dot(np);
            for (int k = 0; k < 2; ++k) {
                loc.m(kIUp + i, kILa + k) += w * vn * Lam[k];
                loc.m(kILa + k, kIUp + i) -= w * vn * Lam[k];
            }
        }
    });
    loc.scatter(out);
}

} // namespace

SparseMatrix Assembler::interface_blocks(InterfaceMode mode) const {
    const auto& tr = *disc_.traces;
    std::vector<Triplet> trip;
    if (mode == InterfaceMode::merged) {
        trip = parallel_collect<Triplet>(static_cast<Index>(tr.merged.size()), opts_.threads,
                                         [&](Index i, auto& out) {
                                             const MergedSegment& m = tr.merged[i];
                                             interface_kernel(disc_, params_, opts_.interface_order, m.seg_f,
                                                              m.seg_p, m.a, m.b, out);
                                         });
    } else {
        // Pair each poroelastic segment with the fluid segment sharing its endpoints.
        std::vector<Index> partner(tr.trace_p.size(), -1);
        std::map<long long, Index> by_start;
        for (std::size_t j = 0; j < tr.trace_f.size(); ++j)
            by_start[std::llround(tr.trace_f[j].s0 / kGeometryTol)] = static_cast<Index>(j);
        for (std::size_t i = 0; i < tr.trace_p.size(); ++i) {
            const auto it = by_start.find(std::llround(tr.trace_p[i].s0 / kGeometryTol));
            if (it == by_start.end() || std::abs(tr.trace_f[it->second].s1 - tr.trace_p[i].s1) > kGeometryTol)
                throw GeometryMismatch("direct interface assembly needs matching grids");
            partner[i] = it->second;
        }
        trip = parallel_collect<Triplet>(static_cast<Index>(tr.trace_p.size()), opts_.threads,
                                         [&](Index i, auto& out) {
                                             const TraceSegment& sp = tr.trace_p[i];
                                             interface_kernel(disc_, params_, opts_.interface_order, partner[i], i,
                                                              sp.a, sp.b, out);
                                         });
    }
    return to_matrix(disc_.layout.size(), trip);
}

SparseMatrix Assembler::inertia() const {
    std::vector<Triplet> all;
    const auto& L = disc_.layout;
    if (params_.dyn.fluid_inertia && disc_.has_fluid() && params_.rho != 0.0) {
        const Mesh& mesh = *disc_.fluid;
        const QuadRule& rule = triangle_rule(opts_.volume_order);
        const double rho = params_.rho, k1 = params_.k1();
        auto trip = parallel_collect<Triplet>(mesh.num_triangles(), opts_.threads, [&](Index t, auto& out) {
            Local loc(kFN);
            fluid_indices(disc_, t, loc);
            const AffineMap map = element_map(mesh, t);
            const double* sg = disc_.space(Field::T_f).cell_signs(t);
            FluidPoint fp;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double w = rule.weights[q] * std::abs(map.detJ);
                fp.eval(map, sg, rule.points[q]);
                for (int m = 0; m < 6; ++m) {
                    for (int nn = 0; nn < 6; ++nn) loc.m(kFU + m, kFU + nn) += w * rho * fp.U[nn].dot(fp.U[m]);
                    for (int i = 0; i < 12; ++i) loc.m(kFT + i, kFU + m) -= w * k1 * rho * fp.U[m].dot(fp.divS[i]);
                }
            }
            loc.scatter(out);
        });
        all.insert(all.end(), trip.begin(), trip.end());
    }
    if (params_.dyn.rho_p != 0.0) {
        const Mesh& mesh = *disc_.poro;
        for (Index t = 0; t < mesh.num_triangles(); ++t)
            for (int c = 0; c < 2; ++c) {
                const Index i = L.begin(Field::u_s) + 2 * t + c;
                all.emplace_back(i, i, params_.dyn.rho_p * mesh.area(t));
            }
    }
    return to_matrix(L.size(), all);
}

SparseMatrix Assembler::displacement_mass() const {
    std::vector<Triplet> all;
    const Mesh& mesh = *disc_.poro;
    for (Index t = 0; t < mesh.num_triangles(); ++t)
        for (int c = 0; c < 2; ++c) {
            const Index i = disc_.layout.begin(Field::u_s) + 2 * t + c;
            all.emplace_back(i, i, mesh.area(t));
        }
    return to_matrix(disc_.layout.size(), all);
}

SparseMatrix Assembler::spring() const { return -params_.dyn.beta * displacement_mass(); }

// ---------------------------------------------------------------------------
// Convective term
// ---------------------------------------------------------------------------

ConvectiveTerm Assembler::convective(const Vector& x, bool with_jacobian) const {
    const Index n = disc_.layout.size();
    ConvectiveTerm out;
    out.residual = Vector::Zero(n);
    out.jacobian.resize(n, n);
    if (!disc_.has_fluid() || params_.rho == 0.0) return out;

    const Mesh& mesh = *disc_.fluid;
    const QuadRule& rule = triangle_rule(opts_.volume_order);
    const double rho = params_.rho, mu = params_.mu, k2 = params_.k2();
    const auto uf = disc_.block(x, Field::u_f);
    const FESpace& Vf = disc_.space(Field::u_f);

    std::vector<Entry> res;
    std::vector<Triplet> jac;

    auto local_u = [&](Index t, double cu[6]) {
        const Index* d = Vf.cell_dofs(t);
        for (int i = 0; i < 6; ++i) cu[i] = uf[d[i]];
    };

    const int threads = opts_.threads;
    std::vector<std::vector<Entry>> rbuf(std::max(1, threads));
    std::vector<std::vector<Triplet>> jbuf(std::max(1, threads));
    parallel_chunks(mesh.num_triangles(), threads, [&](int tid, Index b, Index e) {
        for (Index t = b; t < e; ++t) {
            Local loc(kFN);
            fluid_indices(disc_, t, loc);
            Vector r = Vector::Zero(kFN);
            const AffineMap map = element_map(mesh, t);
            const double* sg = disc_.space(Field::T_f).cell_signs(t);
            double cu[6];
            local_u(t, cu);
            FluidPoint fp;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double w = rule.weights[q] * std::abs(map.detJ);
                fp.eval(map, sg, rule.points[q]);
                Vec2 u = Vec2::Zero();
                for (int m = 0; m < 6; ++m) u += cu[m] * fp.U[m];
                const Mat2 uu = deviatoric(u * u.transpose());
                Mat2 eU[6];
                for (int m = 0; m < 6; ++m) eU[m] = sym(fp.G[m]);
                for (int i = 0; i < 12; ++i) r[kFT + i] += w * rho / (2 * mu) * ddot(uu, fp.S[i]);
                for (int m = 0; m < 6; ++m) r[kFU + m] -= w * rho * k2 / (2 * mu) * ddot(uu, eU[m]);
                if (!with_jacobian) continue;
                for (int nn = 0; nn < 6; ++nn) {
                    const Mat2 du = deviatoric(fp.U[nn] * u.transpose() + u * fp.U[nn].transpose());
                    for (int i = 0; i < 12; ++i) loc.m(kFT + i, kFU + nn) += w * rho / (2 * mu) * ddot(du, fp.S[i]);
                    for (int m = 0; m < 6; ++m)
                        loc.m(kFU + m, kFU + nn) -= w * rho * k2 / (2 * mu) * ddot(du, eU[m]);
                }
            }
            for (int i = 0; i < kFN; ++i)
                if (r[i] != 0.0) rbuf[tid].emplace_back(loc.idx[i], r[i]);
            if (with_jacobian) loc.scatter(jbuf[tid]);
        }
    });
    for (auto& b : rbuf) res.insert(res.end(), b.begin(), b.end());
    for (auto& b : jbuf) jac.insert(jac.end(), b.begin(), b.end());

    // rho <u.n_f, u.v> on the interface.
    for (const TraceSegment& seg : disc_.traces->trace_f) {
        Local loc(kFN);
        fluid_indices(disc_, seg.element, loc);
        Vector r = Vector::Zero(kFN);
        const AffineMap map = element_map(mesh, seg.element);
        double cu[6];
        local_u(seg.element, cu);
        segment_quadrature(seg.a, seg.b, opts_.interface_order, [&](const Vec2& x, double w, double) {
            P1Eval p;
            eval_p1(map, map.to_reference(x), p);
            Vec2 U[6];
            Vec2 u = Vec2::Zero();
            for (int k = 0; k < 3; ++k)
                for (int c = 0; c < 2; ++c) {
                    U[2 * k + c] = p.v[k] * Vec2::Unit(c);
                    u += cu[2 * k + c] * U[2 * k + c];
                }
            const double un = u.dot(seg.normal);
            for (int m = 0; m < 6; ++m) {
                r[kFU + m] += w * rho * un * u.dot(U[m]);
                if (!with_jacobian) continue;
                for (int nn = 0; nn < 6; ++nn)
                    loc.m(kFU + m, kFU + nn) +=
                        w * rho * (U[nn].dot(seg.normal) * u.dot(U[m]) + un * U[nn].dot(U[m]));
            }
        });
        for (int i = 0; i < kFN; ++i)
            if (r[i] != 0.0) res.emplace_back(loc.idx[i], r[i]);
        if (with_jacobian) loc.scatter(jac);
    }
    out.residual = to_vector(n, res);
    if (with_jacobian) out.jacobian = to_matrix(n, jac);
    return out;
}

// ---------------------------------------------------------------------------
// Right-hand side
// ---------------------------------------------------------------------------

Vector Assembler::rhs(const ProblemData& data, double time) const {
    const auto& L = disc_.layout;
    const Index n = L.size();
    std::vector<Entry> all;
    const QuadRule& rule = triangle_rule(opts_.volume_order);

    // Poroelastic sources.
    if (data.q_p || data.f_p) {
        const Mesh& mesh = *disc_.poro;
        auto e = parallel_collect<Entry>(mesh.num_triangles(), opts_.threads, [&](Index t, auto& out) {
            const AffineMap map = element_map(mesh, t);
            double q = 0;
            Vec2 f = Vec2::Zero();
            for (std::size_t k = 0; k < rule.size(); ++k) {
                const double w = rule.weights[k] * std::abs(map.detJ);
                const Vec2 x = map.to_physical(rule.points[k]);
                if (data.q_p) q += w * data.q_p(x, time);
                if (data.f_p) f += w * data.f_p(x, time);
            }
            out.emplace_back(L.begin(Field::p_p) + t, q);
            out.emplace_back(L.begin(Field::u_s) + 2 * t, f.x());
            out.emplace_back(L.begin(Field::u_s) + 2 * t + 1, f.y());
        });
        all.insert(all.end(), e.begin(), e.end());
    }

    // Fluid source in the momentum row and the augmentation -kappa1 (f, div R).
    if (data.f_f && disc_.has_fluid()) {
        const Mesh& mesh = *disc_.fluid;
        const double k1 = params_.k1();
        auto e = parallel_collect<Entry>(mesh.num_triangles(), opts_.threads, [&](Index t, auto& out) {
            Local loc(kFN);
            fluid_indices(disc_, t, loc);
            const AffineMap map = element_map(mesh, t);
            const double* sg = disc_.space(Field::T_f).cell_signs(t);
            Vector r = Vector::Zero(kFN);
            FluidPoint fp;
            for (std::size_t k = 0; k < rule.size(); ++k) {
                const double w = rule.weights[k] * std::abs(map.detJ);
                fp.eval(map, sg, rule.points[k]);
                const Vec2 f = data.f_f(map.to_physical(rule.points[k]), time);
                for (int i = 0; i < 12; ++i) r[kFT + i] -= w * k1 * f.dot(fp.divS[i]);
                for (int m = 0; m < 6; ++m) r[kFU + m] += w * f.dot(fp.U[m]);
            }
            for (int i = 0; i < kFN; ++i) out.emplace_back(loc.idx[i], r[i]);
        });
        all.insert(all.end(), e.begin(), e.end());
    }

    // Natural boundary data on the poroelastic boundary.
    {
        const Mesh& mesh = *disc_.poro;
        const FESpace& Ss = disc_.space(Field::sigma_p);
        const FESpace& Su = disc_.space(Field::u_p);
        for (Index e = 0; e < mesh.num_edges(); ++e) {
            const Edge& edge = mesh.edges[e];
            if (edge.tri[1] >= 0 || (edge.tag & tag::interface)) continue;
            const bool es = (edge.tag & tag::elast_dirichlet) && data.u_s_boundary;
            const bool dp = (edge.tag & tag::darcy_dirichlet) && data.p_p_boundary;
            if (!es && !dp) continue;
            const Index t = edge.tri[0];
            const AffineMap map = element_map(mesh, t);
            const Vec2 nrm = mesh.outward_normal(e, t);
            const Index* ds = Ss.cell_dofs(t);
            const Index* du = Su.cell_dofs(t);
            segment_quadrature(mesh.vertices[edge.v[0]], mesh.vertices[edge.v[1]], 8,
                               [&](const Vec2& x, double w, double) {
                                   Bdm1Eval b;
                                   eval_bdm1(map, Ss.cell_signs(t), map.to_reference(x), b);
                                   if (es) {
                                       const Vec2 g = data.u_s_boundary(x, time);
                                       for (int i = 0; i < 12; ++i)
                                           all.emplace_back(L.begin(Field::sigma_p) + ds[i],
                                                            w * b.v[i % 6].dot(nrm) * g[i / 6]);
                                   }
                                   if (dp) {
                                       const double g = data.p_p_boundary(x, time);
                                       for (int i = 0; i < 6; ++i)
                                           all.emplace_back(L.begin(Field::u_p) + du[i], -w * g * b.v[i].dot(nrm));
                                   }
                               });
        }
    }

    // Fluid velocity data enters the stress row naturally.
    if (data.u_f_boundary && disc_.has_fluid()) {
        const Mesh& mesh = *disc_.fluid;
        const FESpace& ST = disc_.space(Field::T_f);
        for (Index e = 0; e < mesh.num_edges(); ++e) {
            const Edge& edge = mesh.edges[e];
            if (edge.tri[1] >= 0 || !(edge.tag & tag::fluid_dirichlet)) continue;
            const Index t = edge.tri[0];
            const AffineMap map = element_map(mesh, t);
            const Vec2 nrm = mesh.outward_normal(e, t);
            const Index* dT = ST.cell_dofs(t);
            segment_quadrature(mesh.vertices[edge.v[0]], mesh.vertices[edge.v[1]], 8,
                               [&](const Vec2& x, double w, double) {
                                   Bdm1Eval b;
                                   eval_bdm1(map, ST.cell_signs(t), map.to_reference(x), b);
                                   const Vec2 g = data.u_f_boundary(x, time);
                                   for (int i = 0; i < 12; ++i)
                                       all.emplace_back(L.begin(Field::T_f) + dT[i],
                                                        w * b.v[i % 6].dot(nrm) * g[i / 6]);
                               });
        }
    }

    // Interface residual data.
    const auto& tr = *disc_.traces;
    if (data.g_f) {
        const FESpace& Vf = disc_.space(Field::u_f);
        for (const TraceSegment& seg : tr.trace_f) {
            const AffineMap map = element_map(*disc_.fluid, seg.element);
            const Index* d = Vf.cell_dofs(seg.element);
            const std::uint32_t tg = disc_.fluid->edges[seg.edge].tag;
            segment_quadrature(seg.a, seg.b, opts_.interface_order, [&](const Vec2& x, double w, double) {
                P1Eval p;
                eval_p1(map, map.to_reference(x), p);
                const Vec2 g = data.g_f(BoundaryPoint{x, seg.normal, tg, time});
                for (int k = 0; k < 3; ++k)
                    for (int c = 0; c < 2; ++c) all.emplace_back(L.begin(Field::u_f) + d[2 * k + c], w * p.v[k] * g[c]);
            });
        }
    }
    if (data.g_s || data.g_m) {
        for (std::size_t s = 0; s < tr.trace_p.size(); ++s) {
            const TraceSegment& seg = tr.trace_p[s];
            const std::uint32_t tg = disc_.poro->edges[seg.edge].tag;
            segment_quadrature(seg.a, seg.b, opts_.interface_order, [&](const Vec2& x, double w, double sl) {
                const BoundaryPoint bp{x, Vec2(-seg.normal), tg, time};
                const double Lam[2] = {1 - sl, sl};
                if (data.g_s) {
                    const Vec2 g = data.g_s(bp);
                    for (int k = 0; k < 2; ++k)
                        for (int c = 0; c < 2; ++c)
                            all.emplace_back(L.begin(Field::theta) + 4 * static_cast<Index>(s) + 2 * k + c,
                                             w * Lam[k] * g[c]);
                }
                if (data.g_m) {
                    const double g = data.g_m(bp);
                    for (int k = 0; k < 2; ++k)
                        all.emplace_back(L.begin(Field::lambda) + 2 * static_cast<Index>(s) + k, -w * Lam[k] * g);
                }
            });
        }
    }
    return to_vector(n, all);
}

// ---------------------------------------------------------------------------
// Essential conditions
// ---------------------------------------------------------------------------

EssentialBC Assembler::essential(const ProblemData& data, double time) const {
    const auto& L = disc_.layout;
    std::map<Index, double> fixed;

    if (disc_.has_fluid()) {
        const Mesh& mesh = *disc_.fluid;
        const FESpace& ST = disc_.space(Field::T_f);
        const FESpace& Vf = disc_.space(Field::u_f);
        for (Index e = 0; e < mesh.num_edges(); ++e) {
            const Edge& edge = mesh.edges[e];
            if (edge.tri[1] >= 0) continue;
            if (edge.tag & tag::fluid_dirichlet) {
                for (Index v : edge.v) {
                    const Vec2 g = data.u_f_boundary ? data.u_f_boundary(mesh.vertices[v], time) : Vec2::Zero();
                    for (int c = 0; c < 2; ++c) fixed[L.begin(Field::u_f) + Vf.vertex_dof(v, c)] = g[c];
                }
            } else if (edge.tag & tag::fluid_traction) {
                for (int r = 0; r < 2; ++r) {
                    std::array<double, 2> m{0.0, 0.0};
                    if (data.fluid_traction)
                        m = edge_flux_moments(mesh, e, edge.tri[0], [&](const Vec2& x, const Vec2& nrm) {
                            return data.fluid_traction(BoundaryPoint{x, nrm, edge.tag, time})[r];
                        });
                    for (int k = 0; k < 2; ++k) fixed[L.begin(Field::T_f) + ST.edge_dof(e, k, r)] = m[k];
                }
            }
        }
    }
    {
        const Mesh& mesh = *disc_.poro;
        const FESpace& Ss = disc_.space(Field::sigma_p);
        const FESpace& Su = disc_.space(Field::u_p);
        for (Index e = 0; e < mesh.num_edges(); ++e) {
            const Edge& edge = mesh.edges[e];
            if (edge.tri[1] >= 0 || (edge.tag & tag::interface)) continue;
            if (edge.tag & tag::darcy_neumann) {
                std::array<double, 2> m{0.0, 0.0};
                if (data.darcy_flux)
                    m = edge_flux_moments(mesh, e, edge.tri[0], [&](const Vec2& x, const Vec2& nrm) {
                        return data.darcy_flux(BoundaryPoint{x, nrm, edge.tag, time});
                    });
                for (int k = 0; k < 2; ++k) fixed[L.begin(Field::u_p) + Su.edge_dof(e, k)] = m[k];
            }
            if (edge.tag & tag::elast_neumann) {
                for (int r = 0; r < 2; ++r) {
                    std::array<double, 2> m{0.0, 0.0};
                    if (data.solid_traction)
                        m = edge_flux_moments(mesh, e, edge.tri[0], [&](const Vec2& x, const Vec2& nrm) {
                            return data.solid_traction(BoundaryPoint{x, nrm, edge.tag, time})[r];
                        });
                    for (int k = 0; k < 2; ++k) fixed[L.begin(Field::sigma_p) + Ss.edge_dof(e, k, r)] = m[k];
                }
            }
        }
    }
    EssentialBC bc;
    for (const auto& [i, v] : fixed) {
        bc.dofs.push_back(i);
        bc.values.push_back(v);
    }
    return bc;
}

// ---------------------------------------------------------------------------

BlockSystem assemble_static_blocks(const Discretization& disc, const PhysicalParams& params, AssemblyOptions opts) {
    Assembler a(disc, params, opts);
    BlockSystem s;
    s.layout = disc.layout;
    s.matrix = a.static_blocks();
    s.rhs = Vector::Zero(disc.layout.size());
    return s;
}

SparseMatrix assemble_interface_blocks(const Discretization& disc, const PhysicalParams& params, InterfaceMode mode,
                                       AssemblyOptions opts) {
    return Assembler(disc, params, opts).interface_blocks(mode);
}

ConvectiveTerm assemble_convective(const Vector& x, const Discretization& disc, const PhysicalParams& params,
                                   AssemblyOptions opts) {
    return Assembler(disc, params, opts).convective(x, true);
}

Vector assemble_rhs(const ProblemData& data, const Discretization& disc, const PhysicalParams& params, double t,
                    AssemblyOptions opts) {
    return Assembler(disc, params, opts).rhs(data, t);
}

} // namespace nsbiot
