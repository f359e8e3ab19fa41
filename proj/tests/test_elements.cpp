#include "nsbiot/compliance.hpp"
#include "nsbiot/discretization.hpp"
#include "nsbiot/elements.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nsbiot;

namespace {

std::mt19937& rng() {
    static std::mt19937 gen(1234);
    return gen;
}

Vec2 random_ref_point() {
    std::uniform_real_distribution<double> u(0, 1);
    double x = u(rng()), y = u(rng());
    if (x + y > 1) {
        x = 1 - x;
        y = 1 - y;
    }
    return Vec2(x, y);
}

Mesh unit_square_two() { return build_structured_rect({0, 1, 0, 1}, 1, 1, Subdomain::poro); }

} // namespace

TEST(Basis, P1PartitionOfUnity) {
    for (int k = 0; k < 20; ++k) {
        const BasisValues b = eval_basis(ElementKind::p1_cont_skew, random_ref_point());
        ASSERT_EQ(b.scal.size(), 3u);
        EXPECT_NEAR(b.scal[0] + b.scal[1] + b.scal[2], 1.0, 1e-15);
        EXPECT_NEAR((b.grad[0] + b.grad[1] + b.grad[2]).norm(), 0.0, 1e-15);
    }
}

TEST(Basis, Bdm1EdgeMomentDuality) {
    for (int j = 0; j < 6; ++j) {
        const auto dofs = bdm1_reference_dofs([&](const Vec2& p) {
            std::array<Vec2, 6> v;
            std::array<double, 6> d;
            bdm1_reference(p, v, d);
            return v[j];
        });
        for (int i = 0; i < 6; ++i) EXPECT_NEAR(dofs[i], i == j ? 1.0 : 0.0, 1e-13) << i << " " << j;
    }
}

TEST(Basis, Bdm1DivergenceConstant) {
    const Vec2 pts[3] = {random_ref_point(), random_ref_point(), random_ref_point()};
    BasisValues b0 = eval_basis(ElementKind::bdm1_vec, pts[0]);
    ASSERT_EQ(b0.vec.size(), 6u);
    for (int k = 1; k < 3; ++k) {
        BasisValues b = eval_basis(ElementKind::bdm1_vec, pts[k]);
        for (int i = 0; i < 6; ++i) EXPECT_NEAR(b.div[i], b0.div[i], 1e-13);
    }
    // Divergence matches a finite difference of the values.
    const Vec2 p(0.3, 0.2);
    const double h = 1e-6;
    BasisValues c = eval_basis(ElementKind::bdm1_vec, p);
    BasisValues px = eval_basis(ElementKind::bdm1_vec, p + Vec2(h, 0));
    BasisValues py = eval_basis(ElementKind::bdm1_vec, p + Vec2(0, h));
    for (int i = 0; i < 6; ++i)
        EXPECT_NEAR((px.vec[i].x() - c.vec[i].x()) / h + (py.vec[i].y() - c.vec[i].y()) / h, c.div[i], 1e-6);
}

TEST(Basis, MatrixBasisIsRowwise) {
    const Vec2 p = random_ref_point();
    BasisValues v = eval_basis(ElementKind::bdm1_vec, p);
    BasisValues m = eval_basis(ElementKind::bdm1_mat, p);
    ASSERT_EQ(m.mat.size(), 12u);
    for (int r = 0; r < 2; ++r)
        for (int l = 0; l < 6; ++l) {
            const Mat2& s = m.mat[6 * r + l];
            EXPECT_NEAR((Vec2(s.row(r).transpose()) - v.vec[l]).norm(), 0.0, 1e-15);
            EXPECT_NEAR(s.row(1 - r).norm(), 0.0, 0.0);
            EXPECT_NEAR(m.mat_div[6 * r + l][r], v.div[l], 1e-15);
        }
}

TEST(Piola, IdentityAndScaling) {
    const AffineMap id = make_affine_map(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1));
    const PiolaValue a = piola_map(id, Vec2(0.3, -0.7), 1.5);
    EXPECT_NEAR((a.value - Vec2(0.3, -0.7)).norm(), 0.0, 1e-15);
    EXPECT_NEAR(a.div, 1.5, 1e-15);
    const AffineMap s2 = make_affine_map(Vec2(0, 0), Vec2(2, 0), Vec2(0, 2));
    EXPECT_NEAR(s2.detJ, 4.0, 1e-15);
    EXPECT_NEAR(piola_map(s2, Vec2(1, 1), 2.0).div, 0.5, 1e-15);
    EXPECT_THROW(make_affine_map(Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)), InvalidArgument);
    AffineMap flat = id;
    flat.J = Mat2::Zero();
    flat.detJ = 0;
    EXPECT_THROW(piola_map(flat, Vec2(1, 0), 1.0), InvalidArgument);
}

TEST(Piola, DivergenceTheoremCommutes) {
    std::uniform_real_distribution<double> u(-2, 2);
    for (int trial = 0; trial < 20; ++trial) {
        Vec2 p[3];
        do {
            for (auto& q : p) q = Vec2(u(rng()), u(rng()));
        } while ((p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x() < 0.1);
        const AffineMap map = make_affine_map(p[0], p[1], p[2]);
        const double signs[6] = {1, 1, 1, 1, 1, 1};
        for (int j = 0; j < 6; ++j) {
            Bdm1Eval e;
            eval_bdm1(map, signs, Vec2(0.2, 0.2), e);
            const double volume = e.div[j] * std::abs(map.detJ) / 2;
            double flux = 0;
            for (int k = 0; k < 3; ++k) {
                const Vec2 a = p[k], b = p[(k + 1) % 3];
                const Vec2 n = Vec2((b - a).y(), -(b - a).x()).normalized();
                const QuadRule& r = segment_rule(4);
                for (std::size_t q = 0; q < r.size(); ++q) {
                    const Vec2 x = a + r.points[q].x() * (b - a);
                    Bdm1Eval ev;
                    eval_bdm1(map, signs, map.to_reference(x), ev);
                    flux += r.weights[q] * (b - a).norm() * ev.v[j].dot(n);
                }
            }
            EXPECT_NEAR(volume, flux, 1e-12);
        }
    }
}

TEST(Spaces, Dimensions) {
    auto m = std::make_shared<const Mesh>(unit_square_two());
    EXPECT_EQ(build_space(m, ElementKind::bdm1_vec).dim, 10);
    EXPECT_EQ(build_space(m, ElementKind::bdm1_mat).dim, 20);
    EXPECT_EQ(build_space(m, ElementKind::p0_scalar).dim, 2);
    EXPECT_EQ(build_space(m, ElementKind::p0_vec).dim, 4);
    EXPECT_EQ(build_space(m, ElementKind::p1_vec_cont).dim, 8);
    EXPECT_EQ(build_space(m, ElementKind::p1_cont_skew).dim, 4);
    EXPECT_THROW(build_space(m, ElementKind::p1dc_trace_scalar), InvalidArgument);

    Mesh f = build_structured_rect({0, 1, 0, 1}, 5, 2, Subdomain::fluid);
    f.tag_side(Side::bottom, tag::interface);
    Mesh p = build_structured_rect({0, 1, -1, 0}, 5, 2, Subdomain::poro);
    p.tag_side(Side::top, tag::interface);
    auto tr = std::make_shared<const InterfaceTraces>(build_interface_traces(f, p));
    EXPECT_EQ(build_space(tr, ElementKind::p1dc_trace_scalar).dim, 10);
    EXPECT_EQ(build_space(tr, ElementKind::p1dc_trace_vec).dim, 20);
    EXPECT_THROW(build_space(tr, ElementKind::bdm1_vec), InvalidArgument);
}

TEST(Spaces, HdivNormalContinuity) {
    auto m = std::make_shared<const Mesh>(build_structured_rect({0, 1.3, 0, 0.7}, 4, 3, Subdomain::poro, Diagonal::left));
    const FESpace s = build_space(m, ElementKind::bdm1_vec);
    std::normal_distribution<double> n(0, 1);
    Vector c(s.dim);
    for (Index i = 0; i < s.dim; ++i) c[i] = n(rng());
    for (Index e = 0; e < m->num_edges(); ++e) {
        const Edge& edge = m->edges[e];
        if (edge.tri[1] < 0) continue;
        const Vec2 a = m->vertices[edge.v[0]], b = m->vertices[edge.v[1]];
        const Vec2 nrm = m->outward_normal(e, edge.tri[0]);
        for (double t : {0.1, 0.5, 0.83}) {
            const Vec2 x = a + t * (b - a);
            double vn[2];
            for (int k = 0; k < 2; ++k) {
                const AffineMap map = element_map(*m, edge.tri[k]);
                vn[k] = eval_vec_bdm1(s, c, edge.tri[k], map, map.to_reference(x)).dot(nrm);
            }
            EXPECT_NEAR(vn[0], vn[1], 1e-12);
        }
    }
}

TEST(Spaces, DivergenceInP0) {
    // Divergence of a BDM1 function is constant per element: the L2 residual
    // after projecting onto P0 vanishes.
    auto m = std::make_shared<const Mesh>(build_structured_rect({0, 1, 0, 1}, 3, 3, Subdomain::poro));
    const FESpace s = build_space(m, ElementKind::bdm1_mat);
    std::normal_distribution<double> n(0, 1);
    Vector c(s.dim);
    for (Index i = 0; i < s.dim; ++i) c[i] = n(rng());
    const QuadRule& r = triangle_rule(4);
    for (Index t = 0; t < m->num_triangles(); ++t) {
        const AffineMap map = element_map(*m, t);
        Vec2 mean = Vec2::Zero();
        std::vector<Vec2> vals;
        for (std::size_t q = 0; q < r.size(); ++q) {
            Vec2 d;
            eval_mat_bdm1(s, c, t, map, r.points[q], &d);
            vals.push_back(d);
            mean += 2 * r.weights[q] * d;
        }
        for (const Vec2& d : vals) EXPECT_NEAR((d - mean).norm(), 0.0, 1e-11);
    }
}

TEST(Spaces, SharedEdgeSignsOpposite) {
    auto m = std::make_shared<const Mesh>(build_structured_rect({0, 1, 0, 1}, 2, 2, Subdomain::fluid));
    for (Index e = 0; e < m->num_edges(); ++e) {
        const Edge& edge = m->edges[e];
        if (edge.tri[1] < 0) continue;
        int li[2];
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 3; ++i)
                if (m->tri_edges[edge.tri[k]][i] == e) li[k] = i;
        // Both sides see the same global orientation, so their local normals differ in sign
        // times the local/global agreement.
        const Vec2 n0 = m->outward_normal(e, edge.tri[0]);
        const Vec2 n1 = m->outward_normal(e, edge.tri[1]);
        EXPECT_NEAR((n0 + n1).norm(), 0.0, 1e-15);
        EXPECT_EQ(std::abs(edge_sign(*m, edge.tri[0], li[0])), 1.0);
        EXPECT_EQ(std::abs(edge_sign(*m, edge.tri[1], li[1])), 1.0);
    }
}

// --- compliance ---------------------------------------------------------------

TEST(Compliance, Examples) {
    ComplianceOp a(1.0, 1.0);
    EXPECT_NEAR((a.apply(Mat2::Identity()) - 0.25 * Mat2::Identity()).norm(), 0.0, 1e-15);
    EXPECT_NEAR((apply_compliance(Mat2::Identity(), 1.0, 1.0) - 0.25 * Mat2::Identity()).norm(), 0.0, 1e-15);
    EXPECT_NEAR(deviatoric(Mat2::Identity()).norm(), 0.0, 0.0);
    Mat2 d;
    d << 3, 0, 0, 1;
    Mat2 e;
    e << 1, 0, 0, -1;
    EXPECT_NEAR((deviatoric(d) - e).norm(), 0.0, 1e-15);
}

TEST(Compliance, InversePairAndBounds) {
    std::normal_distribution<double> n(0, 1);
    for (double lam : {1.0, 1e3, 1e6})
        for (double mu : {0.5, 1.0, 1e2}) {
            ComplianceOp a(lam, mu);
            for (int k = 0; k < 100; ++k) {
                Mat2 t;
                t << n(rng()), n(rng()), n(rng()), n(rng());
                const Mat2 s = sym(t);
                if (k < 10) {
                    EXPECT_NEAR((a.apply(a.apply_inverse(s)) - s).norm(), 0.0, 1e-14 * s.norm() * (1 + lam));
                    EXPECT_NEAR((a.apply(a.apply_inverse(t)) - t).norm(), 0.0, 1e-14 * t.norm() * (1 + lam));
                }
                const double ratio = ddot(a.apply(s), s) / ddot(s, s);
                EXPECT_GE(ratio, a.a_min() * (1 - 1e-12));
                EXPECT_LE(ratio, a.a_max() * (1 + 1e-12));
                EXPECT_NEAR(deviatoric(t).trace(), 0.0, 1e-14);
                const Mat2 w = skew(t);
                EXPECT_NEAR((a.apply(w) - a.c_skew() * w).norm(), 0.0, 1e-15);
            }
        }
}
