#include "nsbiot/elements.hpp"

#include <cassert>
#include <cmath>

namespace nsbiot {

std::string to_string(ElementKind kind) {
    switch (kind) {
    case ElementKind::bdm1_vec: return "BDM1_vec";
    case ElementKind::bdm1_mat: return "BDM1_mat";
    case ElementKind::p1_vec_cont: return "P1_vec_cont";
    case ElementKind::p0_scalar: return "P0_scalar";
    case ElementKind::p0_vec: return "P0_vec";
    case ElementKind::p1_cont_skew: return "P1_cont_skew";
    case ElementKind::p1dc_trace_vec: return "P1dc_trace_vec";
    case ElementKind::p1dc_trace_scalar: return "P1dc_trace_scalar";
    }
    return "unknown";
}

namespace {

using Mat6 = Eigen::Matrix<double, 6, 6>;

// Monomial basis of P1^2: (1,0) (x,0) (y,0) (0,1) (0,x) (0,y).
Vec2 monomial(int j, const Vec2& p) {
    switch (j) {
    case 0: return Vec2(1, 0);
    case 1: return Vec2(p.x(), 0);
    case 2: return Vec2(p.y(), 0);
    case 3: return Vec2(0, 1);
    case 4: return Vec2(0, p.x());
    default: return Vec2(0, p.y());
    }
}

const Mat6& bdm1_coefficients() {
    static const Mat6 coeffs = [] {
        Mat6 duality;
        for (int j = 0; j < 6; ++j) {
            const auto dofs = bdm1_reference_dofs([j](const Vec2& p) { return monomial(j, p); });
            for (int r = 0; r < 6; ++r) duality(r, j) = dofs[r];
        }
        // Column l holds the monomial coefficients of basis function l.
        return Mat6(duality.inverse());
    }();
    return coeffs;
}

[[maybe_unused]] bool in_reference_triangle(const Vec2& p) {
    constexpr double eps = 1e-10;
    return p.x() >= -eps && p.y() >= -eps && p.x() + p.y() <= 1 + eps;
}

} // namespace

void bdm1_reference(const Vec2& ref, std::array<Vec2, 6>& val, std::array<double, 6>& div) {
    const Mat6& c = bdm1_coefficients();
    const double x = ref.x(), y = ref.y();
    for (int l = 0; l < 6; ++l) {
        val[l] = Vec2(c(0, l) + c(1, l) * x + c(2, l) * y, c(3, l) + c(4, l) * x + c(5, l) * y);
        div[l] = c(1, l) + c(5, l);
    }
}

BasisValues eval_basis(ElementKind kind, const Vec2& ref) {
    BasisValues out;
    const bool trace = kind == ElementKind::p1dc_trace_vec || kind == ElementKind::p1dc_trace_scalar;
    if (trace) {
        assert(ref.x() >= -1e-10 && ref.x() <= 1 + 1e-10);
    } else {
        assert(in_reference_triangle(ref));
    }
    const double x = ref.x(), y = ref.y();
    switch (kind) {
    case ElementKind::bdm1_vec: {
        std::array<Vec2, 6> v;
        std::array<double, 6> d;
        bdm1_reference(ref, v, d);
        out.vec.assign(v.begin(), v.end());
        out.div.assign(d.begin(), d.end());
        break;
    }
    case ElementKind::bdm1_mat: {
        std::array<Vec2, 6> v;
        std::array<double, 6> d;
        bdm1_reference(ref, v, d);
        for (int r = 0; r < 2; ++r) {
            for (int l = 0; l < 6; ++l) {
                Mat2 m = Mat2::Zero();
                m.row(r) = v[l].transpose();
                Vec2 dv = Vec2::Zero();
                dv[r] = d[l];
                out.mat.push_back(m);
                out.mat_div.push_back(dv);
            }
        }
        break;
    }
    case ElementKind::p1_vec_cont:
    case ElementKind::p1_cont_skew:
        out.scal = {1 - x - y, x, y};
        out.grad = {Vec2(-1, -1), Vec2(1, 0), Vec2(0, 1)};
        if (kind == ElementKind::p1_vec_cont)
            for (int i = 0; i < 3; ++i)
                for (int c = 0; c < 2; ++c) out.vec.push_back(out.scal[i] * Vec2::Unit(c));
        break;
    case ElementKind::p0_scalar: out.scal = {1.0}; break;
    case ElementKind::p0_vec: out.vec = {Vec2(1, 0), Vec2(0, 1)}; break;
    case ElementKind::p1dc_trace_scalar: out.scal = {1 - x, x}; break;
    case ElementKind::p1dc_trace_vec:
        out.scal = {1 - x, x};
        for (int i = 0; i < 2; ++i)
            for (int c = 0; c < 2; ++c) out.vec.push_back(out.scal[i] * Vec2::Unit(c));
        break;
    }
    return out;
}

AffineMap make_affine_map(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    AffineMap m;
    m.x0 = p0;
    m.J.col(0) = p1 - p0;
    m.J.col(1) = p2 - p0;
    m.detJ = m.J.determinant();
    if (m.detJ == 0.0 || !std::isfinite(m.detJ)) throw InvalidArgument("degenerate element map");
    m.Jinv = m.J.inverse();
    return m;
}

AffineMap element_map(const Mesh& mesh, Index t) {
    const auto& tri = mesh.triangles[t];
    return make_affine_map(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
}

PiolaValue piola_map(const AffineMap& map, const Vec2& ref_value, double ref_div) {
    if (map.detJ == 0.0) throw InvalidArgument("zero Jacobian determinant");
    return {map.J * ref_value / map.detJ, ref_div / map.detJ};
}

double edge_sign(const Mesh& mesh, Index t, int i) {
    const Index a = mesh.triangles[t][kEdgeVertex[i][0]];
    const Index b = mesh.triangles[t][kEdgeVertex[i][1]];
    return a < b ? 1.0 : -1.0;
}

void eval_bdm1(const AffineMap& map, const double* signs, const Vec2& ref, Bdm1Eval& out) {
    std::array<Vec2, 6> v;
    std::array<double, 6> d;
    bdm1_reference(ref, v, d);
    const double inv = 1.0 / map.detJ;
    for (int l = 0; l < 6; ++l) {
        out.v[l] = signs[l] * inv * (map.J * v[l]);
        out.div[l] = signs[l] * inv * d[l];
    }
}

void eval_p1(const AffineMap& map, const Vec2& ref, P1Eval& out) {
    const double x = ref.x(), y = ref.y();
    out.v = {1 - x - y, x, y};
    const Mat2 JinvT = map.Jinv.transpose();
    out.grad[0] = JinvT * Vec2(-1, -1);
    out.grad[1] = JinvT * Vec2(1, 0);
    out.grad[2] = JinvT * Vec2(0, 1);
}

// ---------------------------------------------------------------------------

Index FESpace::edge_dof(Index e, int k, int row) const {
    if (kind == ElementKind::bdm1_vec) return 2 * e + k;
    if (kind == ElementKind::bdm1_mat) return row * (dim / 2) + 2 * e + k;
    throw InvalidArgument("edge_dof on a non-H(div) space");
}

Index FESpace::vertex_dof(Index v, int c) const {
    if (kind == ElementKind::p1_vec_cont) return 2 * v + c;
    if (kind == ElementKind::p1_cont_skew) return v;
    throw InvalidArgument("vertex_dof on a non-P1 space");
}

FESpace build_space(std::shared_ptr<const Mesh> mesh, ElementKind kind) {
    if (!mesh) throw InvalidArgument("null mesh");
    if (kind == ElementKind::p1dc_trace_vec || kind == ElementKind::p1dc_trace_scalar)
        throw InvalidArgument("trace spaces are built on InterfaceTraces, not on a mesh");
    FESpace s;
    s.kind = kind;
    s.mesh = mesh;
    const Mesh& m = *mesh;
    s.num_cells = m.num_triangles();
    switch (kind) {
    case ElementKind::bdm1_vec: s.local_dofs = 6; s.dim = 2 * m.num_edges(); break;
    case ElementKind::bdm1_mat: s.local_dofs = 12; s.dim = 4 * m.num_edges(); break;
    case ElementKind::p1_vec_cont: s.local_dofs = 6; s.dim = 2 * m.num_vertices(); break;
    case ElementKind::p0_scalar: s.local_dofs = 1; s.dim = m.num_triangles(); break;
    case ElementKind::p0_vec: s.local_dofs = 2; s.dim = 2 * m.num_triangles(); break;
    case ElementKind::p1_cont_skew: s.local_dofs = 3; s.dim = m.num_vertices(); break;
    default: break;
    }
    s.dofs.resize(static_cast<std::size_t>(s.num_cells) * s.local_dofs);
    s.signs.assign(s.dofs.size(), 1.0);
    const Index nvec = 2 * m.num_edges();
    for (Index t = 0; t < s.num_cells; ++t) {
        Index* d = s.dofs.data() + static_cast<std::size_t>(t) * s.local_dofs;
        double* g = s.signs.data() + static_cast<std::size_t>(t) * s.local_dofs;
        const auto& tri = m.triangles[t];
        switch (kind) {
        case ElementKind::bdm1_vec:
        case ElementKind::bdm1_mat: {
            const int rows = kind == ElementKind::bdm1_mat ? 2 : 1;
            for (int r = 0; r < rows; ++r) {
                for (int i = 0; i < 3; ++i) {
                    const Index e = m.tri_edges[t][i];
                    const double o = edge_sign(m, t, i);
                    for (int k = 0; k < 2; ++k) {
                        d[6 * r + 2 * i + k] = r * nvec + 2 * e + k;
                        g[6 * r + 2 * i + k] = k == 0 ? o : 1.0;
                    }
                }
            }
            break;
        }
        case ElementKind::p1_vec_cont:
            for (int i = 0; i < 3; ++i)
                for (int c = 0; c < 2; ++c) d[2 * i + c] = 2 * tri[i] + c;
            break;
        case ElementKind::p0_scalar: d[0] = t; break;
        case ElementKind::p0_vec: d[0] = 2 * t; d[1] = 2 * t + 1; break;
        case ElementKind::p1_cont_skew:
            for (int i = 0; i < 3; ++i) d[i] = tri[i];
            break;
        default: break;
        }
    }
    return s;
}

FESpace build_space(std::shared_ptr<const InterfaceTraces> traces, ElementKind kind) {
    if (!traces) throw InvalidArgument("null traces");
    if (kind != ElementKind::p1dc_trace_vec && kind != ElementKind::p1dc_trace_scalar)
        throw InvalidArgument(to_string(kind) + " cannot be built on an interface trace");
    FESpace s;
    s.kind = kind;
    s.traces = traces;
    // Multipliers live on the poroelastic trace partition.
    s.num_cells = traces->num_segments_p();
    s.local_dofs = kind == ElementKind::p1dc_trace_vec ? 4 : 2;
    s.dim = s.num_cells * s.local_dofs;
    s.dofs.resize(static_cast<std::size_t>(s.dim));
    for (Index i = 0; i < s.dim; ++i) s.dofs[i] = i;
    s.signs.assign(s.dofs.size(), 1.0);
    return s;
}

} // namespace nsbiot
