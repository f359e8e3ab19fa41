#pragma once

#include "nsbiot/interface.hpp"
#include "nsbiot/mesh.hpp"
#include "nsbiot/quadrature.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace nsbiot {

enum class ElementKind {
    bdm1_vec,          // Darcy velocity
    bdm1_mat,          // pseudostress and poroelastic stress, row-wise BDM1
    p1_vec_cont,       // fluid velocity
    p0_scalar,         // Darcy pressure
    p0_vec,            // structure velocity
    p1_cont_skew,      // rotation, scalar component of [[0, g], [-g, 0]]
    p1dc_trace_vec,    // structure velocity trace
    p1dc_trace_scalar, // Darcy pressure trace
};

std::string to_string(ElementKind kind);

/// Reference-cell basis values. Which members are filled depends on the kind:
/// BDM1: vec + div; BDM1_mat: mat + mat_div; P1: scal + grad (+ vec for the
/// vector version); P0: scal or vec; traces: scal or vec on s in [0, 1].
struct BasisValues {
    std::vector<double> scal;
    std::vector<Vec2> grad;
    std::vector<Vec2> vec;
    std::vector<double> div;
    std::vector<Mat2> mat;
    std::vector<Vec2> mat_div;
};

BasisValues eval_basis(ElementKind kind, const Vec2& ref);

// ---------------------------------------------------------------------------
// BDM1 on the reference triangle. Local DOF 2*i + k is the k-th moment of the
// normal trace on edge i (opposite vertex i) against {1, 2s - 1}, with the edge
// traversed from its lower local vertex and n = (t_y, -t_x) / |t|.
// ---------------------------------------------------------------------------

inline constexpr int kEdgeVertex[3][2] = {{1, 2}, {0, 2}, {0, 1}};

void bdm1_reference(const Vec2& ref, std::array<Vec2, 6>& val, std::array<double, 6>& div);

/// Reference DOF functionals applied to a callable v(ref_point) -> Vec2.
template <class F>
std::array<double, 6> bdm1_reference_dofs(F&& v);

struct AffineMap {
    Vec2 x0;
    Mat2 J;
    Mat2 Jinv;
    double detJ = 0;

    Vec2 to_physical(const Vec2& ref) const { return x0 + J * ref; }
    Vec2 to_reference(const Vec2& x) const { return Jinv * (x - x0); }
};

AffineMap make_affine_map(const Vec2& p0, const Vec2& p1, const Vec2& p2);
AffineMap element_map(const Mesh& mesh, Index t);

struct PiolaValue {
    Vec2 value;
    double div = 0;
};

/// Contravariant Piola: v = J v_ref / detJ, div v = div_ref / detJ.
PiolaValue piola_map(const AffineMap& map, const Vec2& ref_value, double ref_div);

/// Global orientation sign of local edge i of triangle t: +1 when the local
/// traversal agrees with the global one (lower global vertex first).
double edge_sign(const Mesh& mesh, Index t, int i);

// Physical basis on one element, global orientation applied.
struct Bdm1Eval {
    std::array<Vec2, 6> v;
    std::array<double, 6> div;
};
struct P1Eval {
    std::array<double, 3> v;
    std::array<Vec2, 3> grad;
};

void eval_bdm1(const AffineMap& map, const double* signs, const Vec2& ref, Bdm1Eval& out);
void eval_p1(const AffineMap& map, const Vec2& ref, P1Eval& out);

// ---------------------------------------------------------------------------
// Global DOF maps
// ---------------------------------------------------------------------------

class FESpace {
public:
    ElementKind kind = ElementKind::p0_scalar;
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<const InterfaceTraces> traces;
    Index dim = 0;
    int local_dofs = 0;
    Index num_cells = 0;
    std::vector<Index> dofs;   // stride local_dofs
    std::vector<double> signs; // stride local_dofs

    const Index* cell_dofs(Index c) const { return dofs.data() + static_cast<std::size_t>(c) * local_dofs; }
    const double* cell_signs(Index c) const { return signs.data() + static_cast<std::size_t>(c) * local_dofs; }

    /// Global index of moment k on edge e (row r for BDM1_mat).
    Index edge_dof(Index e, int k, int row = 0) const;
    /// Global index of component c at vertex v (P1 kinds).
    Index vertex_dof(Index v, int c = 0) const;
};

FESpace build_space(std::shared_ptr<const Mesh> mesh, ElementKind kind);
FESpace build_space(std::shared_ptr<const InterfaceTraces> traces, ElementKind kind);

// ---------------------------------------------------------------------------

template <class F>
std::array<double, 6> bdm1_reference_dofs(F&& v) {
    static const Vec2 verts[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    const QuadRule& rule = segment_rule(8);
    std::array<double, 6> out{};
    for (int i = 0; i < 3; ++i) {
        const Vec2 a = verts[kEdgeVertex[i][0]], b = verts[kEdgeVertex[i][1]];
        const Vec2 t = b - a;
        const double len = t.norm();
        const Vec2 n(t.y() / len, -t.x() / len);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = rule.points[q].x();
            const double val = v(Vec2(a + s * t)).dot(n) * rule.weights[q] * len;
            out[2 * i] += val;
            out[2 * i + 1] += val * (2.0 * s - 1.0);
        }
    }
    return out;
}

} // namespace nsbiot
