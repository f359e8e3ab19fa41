#include "nsbiot/interpolate.hpp"
#include "nsbiot/postprocess.hpp"
#include "nsbiot/verify.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>

using namespace nsbiot;
namespace fs = std::filesystem;

namespace {

// Minimal structural reader for the legacy ASCII unstructured-grid format:
// checks the header, section counts and that every data array has the
// declared number of tuples.
struct VtkSummary {
    Index points = -1, cells = -1;
    std::map<std::string, std::pair<int, Index>> point_data, cell_data; // name -> (components, tuples)
};

VtkSummary parse_vtk(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    if (line != "# vtk DataFile Version 3.0") throw std::runtime_error("bad header: " + line);
    std::getline(in, line); // title
    std::getline(in, line);
    if (line != "ASCII") throw std::runtime_error("not ASCII");
    std::getline(in, line);
    if (line != "DATASET UNSTRUCTURED_GRID") throw std::runtime_error("bad dataset");
    VtkSummary s;
    std::string kw;
    std::map<std::string, std::pair<int, Index>>* section = nullptr;
    Index section_n = 0;
    while (in >> kw) {
        if (kw == "POINTS") {
            std::string type;
            in >> s.points >> type;
            for (Index i = 0; i < 3 * s.points; ++i) {
                double v;
                if (!(in >> v)) throw std::runtime_error("short POINTS");
            }
        } else if (kw == "CELLS") {
            Index size;
            in >> s.cells >> size;
            for (Index c = 0; c < s.cells; ++c) {
                int n;
                in >> n;
                if (n != 3) throw std::runtime_error("non-triangle cell");
                for (int k = 0; k < n; ++k) {
                    Index v;
                    in >> v;
                    if (v < 0 || v >= s.points) throw std::runtime_error("cell index out of range");
                }
            }
        } else if (kw == "CELL_TYPES") {
            Index n;
            in >> n;
            if (n != s.cells) throw std::runtime_error("CELL_TYPES count");
            for (Index c = 0; c < n; ++c) {
                int t;
                in >> t;
                if (t != 5) throw std::runtime_error("cell type");
            }
        } else if (kw == "POINT_DATA" || kw == "CELL_DATA") {
            in >> section_n;
            section = kw == "POINT_DATA" ? &s.point_data : &s.cell_data;
            if (section_n != (kw == "POINT_DATA" ? s.points : s.cells)) throw std::runtime_error("data count");
        } else if (kw == "SCALARS") {
            if (!section) throw std::runtime_error("SCALARS outside a data section");
            std::string name, type, lt, table;
            int comps;
            in >> name >> type >> comps >> lt >> table;
            if (lt != "LOOKUP_TABLE") throw std::runtime_error("missing LOOKUP_TABLE");
            for (Index i = 0; i < section_n * comps; ++i) {
                double v;
                if (!(in >> v)) throw std::runtime_error("short array " + name);
            }
            (*section)[name] = {comps, section_n};
        } else {
            throw std::runtime_error("unexpected keyword " + kw);
        }
    }
    return s;
}

fs::path temp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("nsbiot_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Discretization coarse() {
    auto [f, p] = example1_meshes({4, 3, 3, 3});
    return make_discretization(std::move(f), std::move(p));
}

} // namespace

TEST(Recovery, PointwiseExamples) {
    const Mat2 I = Mat2::Identity();
    EXPECT_DOUBLE_EQ(recover_pf(-3.5 * I, Vec2::Zero(), 1.0), 3.5);
    Mat2 dev;
    dev << 1.0, 2.0, -0.5, -1.0;
    EXPECT_DOUBLE_EQ(recover_pf(dev, Vec2::Zero(), 1.0), 0.0);
    EXPECT_EQ(recover_sigma_f(dev, Vec2::Zero(), 2.0), dev);
    EXPECT_EQ(recover_sigma_f(dev, Vec2(1, 2), 0.0), dev);
}

TEST(Recovery, SigmaRoundTripAtRandomPoints) {
    std::mt19937 gen(3);
    std::normal_distribution<double> n;
    for (int k = 0; k < 50; ++k) {
        Mat2 s;
        s << n(gen), n(gen), n(gen), n(gen);
        const Vec2 u(n(gen), n(gen));
        const double rho = std::abs(n(gen));
        const Mat2 T = s - rho * u * u.transpose();
        EXPECT_LT((recover_sigma_f(T, u, rho) - s).norm(), 1e-14);
    }
}

TEST(Recovery, PressureOfInterpolatedFieldsMatchesExact) {
    PhysicalParams p;
    const Discretization d = coarse();
    const AnalyticSolution a = example1_solution();
    const DerivedFields ex = derive_fields(a, p);
    const double t = 0.2;
    const SystemState s = interpolate_state(d, exact_fields(ex), t);
    const DgField pf = recover_pf(d, s.x, p.rho);
    ASSERT_EQ(pf.num_triangles(), d.fluid->num_triangles());
    // Error against the nodal exact pressure is interpolation-sized.
    double err = 0;
    for (Index c = 0; c < d.fluid->num_triangles(); ++c)
        for (int i = 0; i < 3; ++i)
            err = std::max(err, std::abs(pf.at(c, i) - a.p_f(d.fluid->vertices[d.fluid->triangles[c][i]], t)));
    EXPECT_LT(err, 1.0);
    // Linear fields are recovered exactly.
    FieldSet lin;
    lin.T_f = [](const Vec2& x, double) -> Mat2 { return -(2 + x.x()) * Mat2::Identity(); };
    const SystemState sl = interpolate_state(d, lin, 0);
    const DgField pl = recover_pf(d, sl.x, p.rho);
    for (Index c = 0; c < d.fluid->num_triangles(); ++c)
        for (int i = 0; i < 3; ++i)
            EXPECT_NEAR(pl.at(c, i), 2 + d.fluid->vertices[d.fluid->triangles[c][i]].x(), 1e-13);
}

TEST(Displacement, AccumulationTelescopes) {
    const Vector eta0 = Vector::LinSpaced(4, 0, 3);
    const Vector c = Vector::Constant(4, 0.5);
    const auto h = accumulate_displacement(eta0, std::vector<Vector>(8, c), 0.25);
    ASSERT_EQ(h.size(), 8u);
    EXPECT_LT((h.back() - (eta0 + c * 2.0)).norm(), 1e-15);
    const auto z = accumulate_displacement(eta0, std::vector<Vector>(3, Vector::Zero(4)), 1.0);
    EXPECT_EQ(z.back(), eta0);
    EXPECT_THROW(accumulate_displacement(eta0, {Vector::Zero(3)}, 1.0), InvalidArgument);
}

TEST(Vtk, TwoTriangleMesh) {
    const Mesh m = build_structured_rect({0, 1, 0, 1}, 1, 1, Subdomain::fluid);
    const fs::path dir = temp_dir("two");
    std::vector<FieldExport> f = {{"a", Attachment::point, 1, {1, 2, 3, 4}},
                                  {"b", Attachment::cell, 2, {1, 2, 3, 4}},
                                  {"c", Attachment::cell, 4, {1, 2, 3, 4, 5, 6, 7, 8}}};
    write_vtk(dir / "m.vtk", m, f);
    const VtkSummary s = parse_vtk(dir / "m.vtk");
    EXPECT_EQ(s.points, 4);
    EXPECT_EQ(s.cells, 2);
    EXPECT_EQ(s.point_data.size() + s.cell_data.size(), f.size());
    EXPECT_EQ(s.cell_data.at("c").first, 4);
    f[0].values.pop_back();
    EXPECT_THROW(write_vtk(dir / "bad.vtk", m, f), InvalidArgument);
}

TEST(Vtk, StateExportRoundTrip) {
    PhysicalParams p;
    const Discretization d = coarse();
    SystemState s = interpolate_state(d, exact_fields(derive_fields(example1_solution(), p)), 0.1);
    s.step = 7;
    const fs::path dir = temp_dir("state");
    const auto paths = export_vtk(d, s, p, dir, "run");
    ASSERT_EQ(paths.size(), 2u);
    EXPECT_EQ(paths[0].filename(), "run_fluid_0007.vtk");
    EXPECT_EQ(paths[1].filename(), "run_poro_0007.vtk");
    const VtkSummary f = parse_vtk(paths[0]), q = parse_vtk(paths[1]);
    EXPECT_EQ(f.points, d.fluid->num_vertices());
    EXPECT_EQ(f.cells, d.fluid->num_triangles());
    EXPECT_EQ(f.point_data.size() + f.cell_data.size(), 4u);
    EXPECT_EQ(q.point_data.size() + q.cell_data.size(), 6u);
    EXPECT_EQ(q.cell_data.at("sigma_p").first, 4);
    EXPECT_EQ(q.cell_data.at("u_p").first, 2);

    ExportOptions o;
    o.fields = {"p_f", "p_p"};
    const auto sel = export_vtk(d, s, p, dir, "sel", o);
    EXPECT_EQ(parse_vtk(sel[0]).cell_data.size(), 1u);
    EXPECT_EQ(parse_vtk(sel[1]).cell_data.size() + parse_vtk(sel[1]).point_data.size(), 1u);
}

TEST(Vtk, PressureOffsetShiftsPressuresAndStresses) {
    PhysicalParams p;
    p.alpha_p = 0.5;
    const Discretization d = coarse();
    const SystemState s = zero_state(d);
    ExportOptions o;
    o.pressure_offset = 100;
    const auto pf = poro_export_fields(d, s, p, o);
    for (const auto& f : pf) {
        if (f.name == "p_p") EXPECT_EQ(f.values.front(), 100.0);
        if (f.name == "sigma_p") EXPECT_EQ(f.values.front(), -50.0);
    }
    for (const auto& f : fluid_export_fields(d, s, p, o))
        if (f.name == "p_f") EXPECT_DOUBLE_EQ(f.values.front(), 100.0);
}

TEST(InterfaceCsv, MatchesExactTraces) {
    PhysicalParams p;
    const Discretization d = coarse();
    const DerivedFields ex = derive_fields(example1_solution(), p);
    const SystemState s = interpolate_state(d, exact_fields(ex), 0.05);
    const auto samples = interface_samples(d, s, p);
    ASSERT_EQ(samples.size(), d.traces->merged.size());
    for (const auto& smp : samples) {
        const Vec2 x(smp.s, 0.0);
        // n_f = (0, -1), n_p = (0, 1), t = (1, 0) on the flat interface.
        EXPECT_NEAR(smp.u_f_n, -ex.u_f(x, 0.05).y(), 0.15);
        EXPECT_NEAR(smp.sigma_p_nt, ex.sigma_p(x, 0.05)(0, 1), 0.5);
    }
    std::ostringstream os;
    write_interface_csv_header(os);
    write_interface_csv(os, 0.05, samples);
    const std::string csv = os.str();
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(samples.size()) + 1);
}
