#include "nsbiot/interface.hpp"
#include "nsbiot/mesh.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

using namespace nsbiot;

namespace {

double total_area(const Mesh& m) {
    double a = 0;
    for (Index t = 0; t < m.num_triangles(); ++t) a += m.area(t);
    return a;
}

Mesh tagged_rect(const Rect& r, int nx, int ny, Subdomain sub, Side iface) {
    Mesh m = build_structured_rect(r, nx, ny, sub);
    m.tag_side(iface, tag::interface);
    return m;
}

} // namespace

TEST(StructuredRect, SmallestMesh) {
    Mesh m = build_structured_rect({0, 1, 0, 1}, 1, 1, Subdomain::fluid);
    EXPECT_EQ(m.num_vertices(), 4);
    EXPECT_EQ(m.num_triangles(), 2);
    int boundary = 0;
    for (Index e = 0; e < m.num_edges(); ++e) boundary += m.is_boundary(e);
    EXPECT_EQ(boundary, 4);
    EXPECT_EQ(m.num_edges(), 5);
}

TEST(StructuredRect, AreaTelescopes) {
    Mesh m = build_structured_rect({0, 1, -1, 0}, 5, 5, Subdomain::poro);
    EXPECT_EQ(m.num_triangles(), 50);
    EXPECT_NEAR(total_area(m), 1.0, 1e-14);
}

TEST(StructuredRect, AreaPropertyBothDiagonals) {
    for (auto diag : {Diagonal::right, Diagonal::left})
        for (int nx : {1, 3, 7})
            for (int ny : {1, 2, 9}) {
                const Rect r{-0.3, 1.7, 0.2, 0.95};
                Mesh m = build_structured_rect(r, nx, ny, Subdomain::fluid, diag);
                const double exact = (r.x1 - r.x0) * (r.y1 - r.y0);
                EXPECT_NEAR(total_area(m), exact, 1e-13 * exact);
                for (Index t = 0; t < m.num_triangles(); ++t) EXPECT_GT(m.area(t), 0);
            }
}

TEST(StructuredRect, ZeroCountsRejected) {
    EXPECT_THROW(build_structured_rect({0, 1, 0, 1}, 0, 3, Subdomain::fluid), InvalidArgument);
    EXPECT_THROW(build_structured_rect({0, 1, 0, 1}, 3, 0, Subdomain::fluid), InvalidArgument);
    EXPECT_THROW(build_structured_rect({0, 0, 0, 1}, 3, 3, Subdomain::fluid), InvalidArgument);
}

TEST(StructuredRect, BoundaryEdgesCarrySides) {
    Mesh m = build_structured_rect({0, 2, 0, 1}, 4, 3, Subdomain::fluid);
    int count[4] = {0, 0, 0, 0};
    for (Index e = 0; e < m.num_edges(); ++e) {
        const Edge& edge = m.edges[e];
        if (m.is_boundary(e)) {
            ASSERT_NE(edge.side, Side::none);
            ++count[static_cast<int>(edge.side)];
        } else {
            EXPECT_EQ(edge.side, Side::none);
        }
    }
    EXPECT_EQ(count[0], 4);
    EXPECT_EQ(count[1], 3);
    EXPECT_EQ(count[2], 4);
    EXPECT_EQ(count[3], 3);
}

TEST(StructuredRect, AdjacencyMatchesBoundary) {
    Mesh m = build_structured_rect({0, 1, 0, 1}, 6, 4, Subdomain::fluid, Diagonal::left);
    for (const Edge& e : m.edges) {
        EXPECT_LT(e.v[0], e.v[1]);
        EXPECT_GE(e.tri[0], 0);
        if (e.side == Side::none) EXPECT_GE(e.tri[1], 0);
        else EXPECT_EQ(e.tri[1], -1);
    }
}

TEST(MeshSize, UnitRightTriangle) {
    Mesh m;
    m.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    m.triangles = {{0, 1, 2}};
    m.subdomain = {Subdomain::fluid};
    m.finalize();
    EXPECT_NEAR(mesh_size(m), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(mesh_size(build_structured_rect({0, 1, 0, 1}, 1, 1, Subdomain::fluid)), std::sqrt(2.0), 1e-15);
}

TEST(MeshSize, PaperLevelSizes) {
    // Element counts frozen for the convergence levels.
    struct L { int fx, fy, px, py; double hf, hp; };
    const L levels[] = {{8, 7, 5, 5, 0.1964, 0.2828},
                        {16, 13, 10, 8, 0.0997, 0.1646},
                        {32, 27, 20, 17, 0.0487, 0.0779},
                        {64, 51, 40, 28, 0.0250, 0.0434}};
    for (const L& l : levels) {
        const double hf = mesh_size(build_structured_rect({0, 1, 0, 1}, l.fx, l.fy, Subdomain::fluid));
        const double hp = mesh_size(build_structured_rect({0, 1, -1, 0}, l.px, l.py, Subdomain::poro));
        EXPECT_NEAR(hf / l.hf, 1.0, 0.05) << l.fx;
        EXPECT_NEAR(hp / l.hp, 1.0, 0.05) << l.px;
        // Trace sizes satisfy h_tf = (5/8) h_tp.
        EXPECT_NEAR((1.0 / l.fx) / (1.0 / l.px), 5.0 / 8.0, 1e-14);
    }
}

TEST(MeshFinalize, RejectsNegativeArea) {
    Mesh m;
    m.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    m.triangles = {{0, 2, 1}};
    m.subdomain = {Subdomain::fluid};
    try {
        m.finalize();
        FAIL();
    } catch (const MeshError& e) {
        EXPECT_EQ(e.entity(), 0);
    }
}

TEST(MeshFinalize, RejectsOverfullEdge) {
    Mesh m;
    m.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 1), Vec2(-1, 1)};
    m.triangles = {{0, 1, 2}, {1, 3, 2}, {0, 2, 4}};
    m.subdomain.assign(3, Subdomain::fluid);
    EXPECT_NO_THROW(m.finalize());
    m.vertices.push_back(Vec2(0.2, 0.3));
    m.triangles.push_back({0, 5, 2});
    m.subdomain.push_back(Subdomain::fluid);
    EXPECT_THROW(m.finalize(), MeshError);
}

TEST(Tags, ParseAndPrint) {
    EXPECT_EQ(parse_tag("darcy_neumann+elast_dirichlet"), tag::darcy_neumann | tag::elast_dirichlet);
    EXPECT_EQ(parse_tag(tag_to_string(tag::fluid_inflow)), tag::fluid_inflow);
    EXPECT_THROW(parse_tag("sideways"), InvalidArgument);
}

TEST(BoundaryTags, FamiliesRequired) {
    Mesh p = build_structured_rect({0, 1, -1, 0}, 2, 2, Subdomain::poro);
    p.tag_side(Side::top, tag::interface);
    EXPECT_THROW(check_boundary_tags(p, Subdomain::poro), MeshError);
    for (Side s : {Side::left, Side::right, Side::bottom}) p.tag_side(s, tag::darcy_dirichlet | tag::elast_neumann);
    EXPECT_NO_THROW(check_boundary_tags(p, Subdomain::poro));
}

TEST(MeshIO, RoundTrip) {
    Mesh m = build_structured_rect({0, 1, -1, 0}, 3, 2, Subdomain::poro);
    m.tag_side(Side::top, tag::interface);
    m.tag_side(Side::bottom, tag::darcy_dirichlet | tag::elast_dirichlet);
    const std::string path = testing::TempDir() + "/roundtrip.mesh";
    save_mesh(m, path);
    Mesh r = load_mesh(path);
    ASSERT_EQ(r.num_vertices(), m.num_vertices());
    ASSERT_EQ(r.num_triangles(), m.num_triangles());
    ASSERT_EQ(r.num_edges(), m.num_edges());
    for (Index e = 0; e < m.num_edges(); ++e) EXPECT_EQ(r.edges[e].tag, m.edges[e].tag);
    std::remove(path.c_str());
}

TEST(MeshIO, ParseErrorsCarryLine) {
    const std::string bad = "nsbiot-mesh v1\nvertices 3\n0 0\n1 0\n0 oops\ntriangles 1\n0 1 2 fluid\nboundary 0\n";
    try {
        parse_mesh(bad);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 5);
    }
    EXPECT_THROW(parse_mesh("not a mesh\n"), ParseError);
    const std::string inverted = "nsbiot-mesh v1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 2 1 fluid\nboundary 0\n";
    EXPECT_THROW(parse_mesh(inverted), MeshError);
}

TEST(Split, InterfaceTaggedBetweenSubdomains) {
    Mesh whole = build_structured_rect({0, 1, -1, 1}, 4, 4, Subdomain::poro);
    for (Index t = 0; t < whole.num_triangles(); ++t)
        if (whole.centroid(t).y() > 0) whole.subdomain[t] = Subdomain::fluid;
    whole.finalize();
    auto [f, p] = split_subdomains(whole);
    EXPECT_EQ(f.num_triangles(), 16);
    EXPECT_EQ(p.num_triangles(), 16);
    auto tr = build_interface_traces(f, p);
    EXPECT_EQ(tr.merged.size(), 4u);
    EXPECT_NEAR(tr.length, 1.0, 1e-14);
}

// --- interface traces -------------------------------------------------------

TEST(InterfaceTraces, MatchingGrids) {
    Mesh f = tagged_rect({0, 1, 0, 1}, 4, 3, Subdomain::fluid, Side::bottom);
    Mesh p = tagged_rect({0, 1, -1, 0}, 4, 2, Subdomain::poro, Side::top);
    auto tr = build_interface_traces(f, p);
    EXPECT_EQ(tr.trace_f.size(), 4u);
    EXPECT_EQ(tr.trace_p.size(), 4u);
    EXPECT_EQ(tr.merged.size(), 4u);
    for (const auto& s : tr.trace_f) EXPECT_NEAR(s.normal.y(), -1.0, 1e-15);
    for (const auto& s : tr.trace_p) EXPECT_NEAR(s.normal.y(), 1.0, 1e-15);
}

TEST(InterfaceTraces, NonMatchingMergeOracle) {
    Mesh f = tagged_rect({0, 1, 0, 1}, 8, 2, Subdomain::fluid, Side::bottom);
    Mesh p = tagged_rect({0, 1, -1, 0}, 5, 2, Subdomain::poro, Side::top);
    auto tr = build_interface_traces(f, p);
    // Brute-force oracle: union of breakpoints.
    std::set<long long> pts;
    for (int i = 0; i <= 8; ++i) pts.insert(std::llround(i / 8.0 * 1e9));
    for (int i = 0; i <= 5; ++i) pts.insert(std::llround(i / 5.0 * 1e9));
    ASSERT_EQ(tr.merged.size(), pts.size() - 1);
    EXPECT_EQ(tr.merged.size(), 12u);
    double sum = 0;
    for (const auto& m : tr.merged) {
        sum += m.length();
        const auto& sf = tr.trace_f[m.seg_f];
        const auto& sp = tr.trace_p[m.seg_p];
        EXPECT_GE(m.s0, sf.s0 - 1e-14);
        EXPECT_LE(m.s1, sf.s1 + 1e-14);
        EXPECT_GE(m.s0, sp.s0 - 1e-14);
        EXPECT_LE(m.s1, sp.s1 + 1e-14);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(InterfaceTraces, MergeIsSymmetric) {
    Mesh f1 = tagged_rect({0, 1, 0, 1}, 7, 2, Subdomain::fluid, Side::bottom);
    Mesh p1 = tagged_rect({0, 1, -1, 0}, 3, 2, Subdomain::poro, Side::top);
    Mesh f2 = tagged_rect({0, 1, 0, 1}, 3, 2, Subdomain::fluid, Side::bottom);
    Mesh p2 = tagged_rect({0, 1, -1, 0}, 7, 2, Subdomain::poro, Side::top);
    auto a = build_interface_traces(f1, p1);
    auto b = build_interface_traces(f2, p2);
    ASSERT_EQ(a.merged.size(), b.merged.size());
    for (std::size_t i = 0; i < a.merged.size(); ++i) {
        EXPECT_NEAR(a.merged[i].s0, b.merged[i].s0, 1e-14);
        EXPECT_NEAR((a.merged[i].a - b.merged[i].a).norm(), 0.0, 1e-14);
    }
}

TEST(InterfaceTraces, GeometryMismatchDetected) {
    Mesh f = tagged_rect({0, 1, 0, 1}, 4, 2, Subdomain::fluid, Side::bottom);
    Mesh p = tagged_rect({0, 1.5, -1, 0}, 4, 2, Subdomain::poro, Side::top);
    EXPECT_THROW(build_interface_traces(f, p), GeometryMismatch);
    Mesh p2 = build_structured_rect({0, 1, -1, 0}, 4, 2, Subdomain::poro);
    EXPECT_THROW(build_interface_traces(f, p2), GeometryMismatch);
}

TEST(InterfaceTraces, EmptyWhenNoInterface) {
    Mesh p = build_structured_rect({0, 1, -1, 0}, 2, 2, Subdomain::poro);
    auto tr = build_interface_traces(Mesh{}, p);
    EXPECT_TRUE(tr.empty());
}
