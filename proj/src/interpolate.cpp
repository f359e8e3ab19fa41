#include "nsbiot/interpolate.hpp"

#include "nsbiot/assembly.hpp"

namespace nsbiot {

namespace {

void require(const FESpace& s, ElementKind kind) {
    if (s.kind != kind) throw InvalidArgument("interpolation into a " + to_string(s.kind) + " space");
}

// Edge moments of one scalar flux, written into the DOFs of row r.
template <class Flux>
void bdm1_edges(const FESpace& s, int rows, Vector& out, Flux&& flux) {
    const Mesh& m = *s.mesh;
    for (Index e = 0; e < m.num_edges(); ++e)
        for (int r = 0; r < rows; ++r) {
            const auto mom = edge_flux_moments(m, e, m.edges[e].tri[0],
                                               [&](const Vec2& x, const Vec2& n) { return flux(x, n, r); });
            for (int k = 0; k < 2; ++k) out[s.edge_dof(e, k, r)] = mom[k];
        }
}

template <class F>
void cell_means(const Mesh& m, int order, F&& per_cell) {
    const QuadRule& rule = triangle_rule(order);
    for (Index t = 0; t < m.num_triangles(); ++t) {
        const AffineMap map = element_map(m, t);
        per_cell(t, [&](auto&& g) {
            decltype(g(Vec2())) acc = g(map.to_physical(rule.points[0])) * (2 * rule.weights[0]);
            for (std::size_t q = 1; q < rule.size(); ++q) acc += g(map.to_physical(rule.points[q])) * (2 * rule.weights[q]);
            return acc;
        });
    }
}

// Per-segment L2 projection onto linear functions in the local parameter.
template <class V, class F>
std::array<V, 2> segment_projection(const TraceSegment& seg, F&& f) {
    const QuadRule& rule = segment_rule(6);
    V b0 = f(seg.a) * 0.0, b1 = b0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double s = rule.points[q].x();
        const V v = f(Vec2(seg.a + s * (seg.b - seg.a)));
        b0 += rule.weights[q] * (1 - s) * v;
        b1 += rule.weights[q] * s * v;
    }
    // Inverse of the reference mass matrix [[1/3, 1/6], [1/6, 1/3]].
    return {V(4 * b0 - 2 * b1), V(-2 * b0 + 4 * b1)};
}

} // namespace

Vector interpolate_bdm1_vec(const FESpace& s, const VectorField& f, double t) {
    require(s, ElementKind::bdm1_vec);
    Vector out = Vector::Zero(s.dim);
    bdm1_edges(s, 1, out, [&](const Vec2& x, const Vec2& n, int) { return f(x, t).dot(n); });
    return out;
}

Vector interpolate_bdm1_mat(const FESpace& s, const TensorField& f, double t) {
    require(s, ElementKind::bdm1_mat);
    Vector out = Vector::Zero(s.dim);
    bdm1_edges(s, 2, out, [&](const Vec2& x, const Vec2& n, int r) { return (f(x, t) * n)[r]; });
    return out;
}

Vector interpolate_p1_vec(const FESpace& s, const VectorField& f, double t) {
    require(s, ElementKind::p1_vec_cont);
    Vector out = Vector::Zero(s.dim);
    for (Index v = 0; v < s.mesh->num_vertices(); ++v) {
        const Vec2 val = f(s.mesh->vertices[v], t);
        for (int c = 0; c < 2; ++c) out[s.vertex_dof(v, c)] = val[c];
    }
    return out;
}

Vector interpolate_p1_scalar(const FESpace& s, const ScalarField& f, double t) {
    require(s, ElementKind::p1_cont_skew);
    Vector out = Vector::Zero(s.dim);
    for (Index v = 0; v < s.mesh->num_vertices(); ++v) out[s.vertex_dof(v)] = f(s.mesh->vertices[v], t);
    return out;
}

Vector project_p0_scalar(const FESpace& s, const ScalarField& f, double t) {
    require(s, ElementKind::p0_scalar);
    Vector out = Vector::Zero(s.dim);
    cell_means(*s.mesh, 6, [&](Index c, auto&& mean) { out[c] = mean([&](const Vec2& x) { return f(x, t); }); });
    return out;
}

Vector project_p0_vec(const FESpace& s, const VectorField& f, double t) {
    require(s, ElementKind::p0_vec);
    Vector out = Vector::Zero(s.dim);
    cell_means(*s.mesh, 6, [&](Index c, auto&& mean) {
        const Vec2 m = mean([&](const Vec2& x) -> Vec2 { return f(x, t); });
        out[2 * c] = m.x();
        out[2 * c + 1] = m.y();
    });
    return out;
}

Vector project_trace_scalar(const InterfaceTraces& tr, const ScalarField& f, double t) {
    Vector out = Vector::Zero(2 * tr.num_segments_p());
    for (Index s = 0; s < tr.num_segments_p(); ++s) {
        const auto c = segment_projection<double>(tr.trace_p[s], [&](const Vec2& x) { return f(x, t); });
        out[2 * s] = c[0];
        out[2 * s + 1] = c[1];
    }
    return out;
}

Vector project_trace_vec(const InterfaceTraces& tr, const VectorField& f, double t) {
    Vector out = Vector::Zero(4 * tr.num_segments_p());
    for (Index s = 0; s < tr.num_segments_p(); ++s) {
        const auto c = segment_projection<Vec2>(tr.trace_p[s], [&](const Vec2& x) -> Vec2 { return f(x, t); });
        out.segment<2>(4 * s) = c[0];
        out.segment<2>(4 * s + 2) = c[1];
    }
    return out;
}

} // namespace nsbiot
