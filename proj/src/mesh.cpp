#include "nsbiot/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace nsbiot {

namespace {

const std::pair<const char*, std::uint32_t> kTagNames[] = {
    {"fluid_dirichlet", tag::fluid_dirichlet}, {"fluid_neumann", tag::fluid_neumann},
    {"fluid_inflow", tag::fluid_inflow},       {"fluid_outflow", tag::fluid_outflow},
    {"darcy_dirichlet", tag::darcy_dirichlet}, {"darcy_neumann", tag::darcy_neumann},
    {"elast_dirichlet", tag::elast_dirichlet}, {"elast_neumann", tag::elast_neumann},
    {"interface", tag::interface},
};

// Local edge i is opposite vertex i, traversed from the lower local vertex.
constexpr int kEdgeVerts[3][2] = {{1, 2}, {0, 2}, {0, 1}};

} // namespace

std::uint32_t parse_tag(const std::string& text) {
    std::uint32_t flags = 0;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '+')) {
        bool found = false;
        for (const auto& [name, bit] : kTagNames) {
            if (part == name) {
                flags |= bit;
                found = true;
            }
        }
        if (!found) throw InvalidArgument("unknown boundary tag '" + part + "'");
    }
    return flags;
}

std::string tag_to_string(std::uint32_t flags) {
    std::string out;
    for (const auto& [name, bit] : kTagNames) {
        if (flags & bit) {
            if (!out.empty()) out += '+';
            out += name;
        }
    }
    return out.empty() ? "none" : out;
}

double Mesh::area(Index t) const {
    const auto& tri = triangles[t];
    const Vec2 a = vertices[tri[1]] - vertices[tri[0]];
    const Vec2 b = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

Vec2 Mesh::centroid(Index t) const {
    const auto& tri = triangles[t];
    return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

Vec2 Mesh::outward_normal(Index e, Index t) const {
    const Vec2 a = vertices[edges[e].v[0]];
    const Vec2 b = vertices[edges[e].v[1]];
    Vec2 n(b.y() - a.y(), a.x() - b.x());
    n.normalize();
    if (n.dot(0.5 * (a + b) - centroid(t)) < 0) n = -n;
    return n;
}

Index Mesh::find_edge(Index a, Index b) const {
    if (a < 0 || a >= num_vertices() || b < 0 || b >= num_vertices()) return -1;
    for (const auto& [other, e] : vertex_edges_[a])
        if (other == b) return e;
    return -1;
}

void Mesh::finalize() {
    if (subdomain.size() != triangles.size())
        throw MeshError("subdomain list size differs from triangle count",
                        static_cast<Index>(subdomain.size()));

    // Keep tags already assigned to existing edges across re-finalization.
    std::map<std::pair<Index, Index>, std::pair<std::uint32_t, Side>> old;
    for (const auto& e : edges) old[{e.v[0], e.v[1]}] = {e.tag, e.side};

    edges.clear();
    tri_edges.assign(triangles.size(), {-1, -1, -1});
    vertex_edges_.assign(vertices.size(), {});

    const Index nv = num_vertices();
    for (Index t = 0; t < num_triangles(); ++t) {
        for (Index k : triangles[t])
            if (k < 0 || k >= nv) throw MeshError("vertex index out of range", t);
        if (!(area(t) > 0.0)) throw MeshError("triangle has non-positive signed area", t);
        for (int i = 0; i < 3; ++i) {
            // Counterclockwise traversal of the edge opposite vertex i.
            const Index a = triangles[t][(i + 1) % 3];
            const Index b = triangles[t][(i + 2) % 3];
            const Index lo = std::min(a, b), hi = std::max(a, b);
            Index e = find_edge(lo, hi);
            if (e < 0) {
                e = num_edges();
                Edge edge;
                edge.v = {lo, hi};
                edge.tri = {t, -1};
                edges.push_back(edge);
                vertex_edges_[lo].emplace_back(hi, e);
                vertex_edges_[hi].emplace_back(lo, e);
            } else {
                Edge& edge = edges[e];
                if (edge.tri[1] >= 0) throw MeshError("edge shared by more than two triangles", e);
                // Two CCW neighbours traverse a shared edge in opposite directions.
                const Index s = edge.tri[0];
                int dir_s = 0;
                for (int j = 0; j < 3; ++j)
                    if (triangles[s][j] == a && triangles[s][(j + 1) % 3] == b) dir_s = 1;
                if (dir_s == 1) throw MeshError("overlapping triangles across edge", e);
                edge.tri[1] = t;
            }
            tri_edges[t][i] = e;
        }
    }

    for (Index e = 0; e < num_edges(); ++e) {
        auto it = old.find({edges[e].v[0], edges[e].v[1]});
        if (it != old.end()) std::tie(edges[e].tag, edges[e].side) = it->second;
    }
    for (const auto& [key, val] : old) {
        if (val.first != tag::none && find_edge(key.first, key.second) < 0)
            throw MeshError("tagged vertex pair is not a mesh edge", key.first);
    }
    for (Index e = 0; e < num_edges(); ++e) {
        const Edge& edge = edges[e];
        if (edge.tri[1] < 0) continue;
        const bool crosses = subdomain[edge.tri[0]] != subdomain[edge.tri[1]];
        if (crosses) {
            edges[e].tag |= tag::interface;
            if (edge.tag & ~tag::interface)
                throw MeshError("interface edge carries an exterior boundary tag", e);
        } else if (edge.tag != tag::none) {
            throw MeshError("boundary tag on interior edge", e);
        }
    }
}

void Mesh::tag_side(Side side, std::uint32_t flags) {
    for (auto& e : edges)
        if (e.side == side) e.tag |= flags;
}

Mesh build_structured_rect(const Rect& rect, int nx, int ny, Subdomain sub, Diagonal diag) {
    if (nx < 1 || ny < 1) throw InvalidArgument("structured mesh needs nx, ny >= 1");
    if (!(rect.x1 > rect.x0) || !(rect.y1 > rect.y0))
        throw InvalidArgument("degenerate rectangle");
    Mesh m;
    m.vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices.emplace_back(rect.x0 + (rect.x1 - rect.x0) * i / nx,
                                    rect.y0 + (rect.y1 - rect.y0) * j / ny);
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Index a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            if (diag == Diagonal::right) {
                m.triangles.push_back({a, b, c});
                m.triangles.push_back({a, c, d});
            } else {
                m.triangles.push_back({a, b, d});
                m.triangles.push_back({b, c, d});
            }
        }
    }
    m.subdomain.assign(m.triangles.size(), sub);
    m.finalize();
    const double tol = 1e-12 * std::max(rect.x1 - rect.x0, rect.y1 - rect.y0);
    for (auto& e : m.edges) {
        if (e.tri[1] >= 0) continue;
        const Vec2 mid = 0.5 * (m.vertices[e.v[0]] + m.vertices[e.v[1]]);
        if (std::abs(mid.y() - rect.y0) < tol) e.side = Side::bottom;
        else if (std::abs(mid.x() - rect.x1) < tol) e.side = Side::right;
        else if (std::abs(mid.y() - rect.y1) < tol) e.side = Side::top;
        else e.side = Side::left;
    }
    return m;
}

// ---------------------------------------------------------------------------
// ASCII format
// ---------------------------------------------------------------------------

namespace {

struct LineReader {
    std::istringstream in;
    int line = 0;

    explicit LineReader(const std::string& text) : in(text) {}

    // Next non-empty line with comments stripped.
    bool next(std::string& out) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            const auto first = raw.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto last = raw.find_last_not_of(" \t\r");
            out = raw.substr(first, last - first + 1);
            return true;
        }
        return false;
    }

    std::string expect(const char* what) {
        std::string s;
        if (!next(s)) throw ParseError(std::string("unexpected end of file, expected ") + what, line);
        return s;
    }
};

long read_count(LineReader& r, const std::string& keyword) {
    std::istringstream ss(r.expect(keyword.c_str()));
    std::string word;
    long n = -1;
    std::string extra;
    if (!(ss >> word >> n) || word != keyword || n < 0 || (ss >> extra))
        throw ParseError("expected '" + keyword + " <count>'", r.line);
    return n;
}

} // namespace

Mesh parse_mesh(const std::string& text) {
    LineReader r(text);
    if (r.expect("header") != "nsbiot-mesh v1") throw ParseError("bad header, expected 'nsbiot-mesh v1'", r.line);
    Mesh m;
    const long nv = read_count(r, "vertices");
    for (long i = 0; i < nv; ++i) {
        std::istringstream ss(r.expect("vertex"));
        double x, y;
        std::string extra;
        if (!(ss >> x >> y) || (ss >> extra)) throw ParseError("expected 'x y'", r.line);
        m.vertices.emplace_back(x, y);
    }
    const long nt = read_count(r, "triangles");
    for (long i = 0; i < nt; ++i) {
        std::istringstream ss(r.expect("triangle"));
        Index a, b, c;
        std::string sub, extra;
        if (!(ss >> a >> b >> c >> sub) || (ss >> extra))
            throw ParseError("expected 'i j k subdomain'", r.line);
        if (sub == "fluid" || sub == "0") m.subdomain.push_back(Subdomain::fluid);
        else if (sub == "poro" || sub == "1") m.subdomain.push_back(Subdomain::poro);
        else throw ParseError("unknown subdomain '" + sub + "'", r.line);
        m.triangles.push_back({a, b, c});
    }
    const long nb = read_count(r, "boundary");
    std::vector<std::tuple<Index, Index, std::uint32_t, int>> tags;
    for (long i = 0; i < nb; ++i) {
        std::istringstream ss(r.expect("boundary edge"));
        Index a, b;
        std::string name, extra;
        if (!(ss >> a >> b >> name) || (ss >> extra)) throw ParseError("expected 'i j tag'", r.line);
        std::uint32_t flags;
        try {
            flags = parse_tag(name);
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), r.line);
        }
        tags.emplace_back(a, b, flags, r.line);
    }
    std::string extra;
    if (r.next(extra)) throw ParseError("trailing content", r.line);

    m.finalize();
    for (const auto& [a, b, flags, line] : tags) {
        const Index e = m.find_edge(std::min(a, b), std::max(a, b));
        if (e < 0) throw ParseError("boundary entry is not a mesh edge", line);
        if (m.edges[e].tri[1] >= 0 && m.subdomain[m.edges[e].tri[0]] == m.subdomain[m.edges[e].tri[1]])
            throw MeshError("boundary tag on interior edge", e);
        m.edges[e].tag |= flags;
    }
    m.finalize();
    return m;
}

Mesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open mesh file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_mesh(ss.str());
}

void save_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write mesh file '" + path + "'");
    out.precision(17);
    out << "nsbiot-mesh v1\nvertices " << mesh.num_vertices() << "\n";
    for (const auto& v : mesh.vertices) out << v.x() << " " << v.y() << "\n";
    out << "triangles " << mesh.num_triangles() << "\n";
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        out << tri[0] << " " << tri[1] << " " << tri[2] << " "
            << (mesh.subdomain[t] == Subdomain::fluid ? "fluid" : "poro") << "\n";
    }
    std::vector<const Edge*> tagged;
    // Interior interface edges are re-derived from the subdomain flags.
    for (const auto& e : mesh.edges)
        if (e.tag != tag::none && e.tri[1] < 0) tagged.push_back(&e);
    out << "boundary " << tagged.size() << "\n";
    for (const Edge* e : tagged) out << e->v[0] << " " << e->v[1] << " " << tag_to_string(e->tag) << "\n";
}

std::pair<Mesh, Mesh> split_subdomains(const Mesh& mesh) {
    Mesh parts[2];
    for (int s = 0; s < 2; ++s) {
        Mesh& part = parts[s];
        std::vector<Index> remap(mesh.vertices.size(), -1);
        std::vector<char> used(mesh.vertices.size(), 0);
        for (Index t = 0; t < mesh.num_triangles(); ++t)
            if (static_cast<int>(mesh.subdomain[t]) == s)
                for (Index k : mesh.triangles[t]) used[k] = 1;
        for (std::size_t v = 0; v < used.size(); ++v) {
            if (!used[v]) continue;
            remap[v] = part.num_vertices();
            part.vertices.push_back(mesh.vertices[v]);
        }
        for (Index t = 0; t < mesh.num_triangles(); ++t) {
            if (static_cast<int>(mesh.subdomain[t]) != s) continue;
            const auto& tri = mesh.triangles[t];
            part.triangles.push_back({remap[tri[0]], remap[tri[1]], remap[tri[2]]});
            part.subdomain.push_back(mesh.subdomain[t]);
        }
        part.finalize();
        for (const auto& e : mesh.edges) {
            const Index a = remap[e.v[0]], b = remap[e.v[1]];
            if (a < 0 || b < 0) continue;
            const Index pe = part.find_edge(std::min(a, b), std::max(a, b));
            if (pe < 0) continue;
            part.edges[pe].tag = e.tag;
            part.edges[pe].side = e.side;
        }
    }
    return {std::move(parts[0]), std::move(parts[1])};
}

double mesh_size(const Mesh& mesh) {
    if (mesh.empty()) throw InvalidArgument("mesh_size of an empty mesh");
    double h = 0;
    for (const auto& tri : mesh.triangles)
        for (int i = 0; i < 3; ++i)
            h = std::max(h, (mesh.vertices[tri[i]] - mesh.vertices[tri[(i + 1) % 3]]).norm());
    return h;
}

void check_boundary_tags(const Mesh& mesh, Subdomain sub) {
    for (Index e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges[e];
        if (edge.tri[1] >= 0 || (edge.tag & tag::interface)) continue;
        if (sub == Subdomain::fluid) {
            const std::uint32_t f = edge.tag & tag::fluid_any;
            if (f == 0) throw MeshError("fluid boundary edge without a condition", e);
            if ((f & (f - 1)) != 0) throw MeshError("fluid boundary edge with conflicting conditions", e);
        } else {
            const std::uint32_t d = edge.tag & tag::darcy_any;
            const std::uint32_t s = edge.tag & tag::elast_any;
            if (d == 0 || s == 0) throw MeshError("poroelastic boundary edge needs Darcy and elasticity conditions", e);
            if ((d & (d - 1)) != 0 || (s & (s - 1)) != 0)
                throw MeshError("poroelastic boundary edge with conflicting conditions", e);
        }
    }
}

} // namespace nsbiot
