#pragma once

#include "nsbiot/common.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nsbiot {

enum class Subdomain : std::uint8_t { fluid = 0, poro = 1 };

// Boundary condition tags are bit flags: a poroelastic edge carries one Darcy
// and one elasticity condition at the same time.
namespace tag {
inline constexpr std::uint32_t none = 0;
inline constexpr std::uint32_t fluid_dirichlet = 1u << 0;  // u_f given
inline constexpr std::uint32_t fluid_neumann = 1u << 1;    // T_f n given
inline constexpr std::uint32_t fluid_inflow = 1u << 2;     // T_f n = -p_in n
inline constexpr std::uint32_t fluid_outflow = 1u << 3;    // T_f n = -p_out n
inline constexpr std::uint32_t darcy_dirichlet = 1u << 4;  // p_p given
inline constexpr std::uint32_t darcy_neumann = 1u << 5;    // u_p.n given
inline constexpr std::uint32_t elast_dirichlet = 1u << 6;  // u_s given
inline constexpr std::uint32_t elast_neumann = 1u << 7;    // sigma_p n given
inline constexpr std::uint32_t interface = 1u << 8;

inline constexpr std::uint32_t fluid_traction = fluid_neumann | fluid_inflow | fluid_outflow;
inline constexpr std::uint32_t fluid_any = fluid_dirichlet | fluid_traction;
inline constexpr std::uint32_t darcy_any = darcy_dirichlet | darcy_neumann;
inline constexpr std::uint32_t elast_any = elast_dirichlet | elast_neumann;
} // namespace tag

/// Parse "fluid_dirichlet" or "darcy_neumann+elast_dirichlet".
std::uint32_t parse_tag(const std::string& text);
std::string tag_to_string(std::uint32_t flags);

enum class Diagonal { right, left };  // "/" or "\" split of each cell

struct Rect {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
};

enum class Side : std::int8_t { none = -1, bottom = 0, right = 1, top = 2, left = 3 };

struct Edge {
    std::array<Index, 2> v{-1, -1};   // v[0] < v[1]
    std::array<Index, 2> tri{-1, -1}; // tri[1] == -1 on the boundary
    std::uint32_t tag = tag::none;
    Side side = Side::none;            // structured meshes only
};

class Mesh {
public:
    std::vector<Vec2> vertices;
    std::vector<std::array<Index, 3>> triangles;
    std::vector<Subdomain> subdomain;

    // Derived by finalize().
    std::vector<Edge> edges;
    // tri_edges[t][i] is the edge opposite local vertex i.
    std::vector<std::array<Index, 3>> tri_edges;

    Index num_vertices() const { return static_cast<Index>(vertices.size()); }
    Index num_triangles() const { return static_cast<Index>(triangles.size()); }
    Index num_edges() const { return static_cast<Index>(edges.size()); }
    bool empty() const { return triangles.empty(); }

    double area(Index t) const;
    Vec2 centroid(Index t) const;
    bool is_boundary(Index e) const { return edges[e].tri[1] < 0; }

    /// Outward unit normal of edge `e` seen from triangle `t`.
    Vec2 outward_normal(Index e, Index t) const;

    /// Build the edge table and check every invariant. Throws MeshError.
    void finalize();

    /// Tag edges with a matching side (structured meshes).
    void tag_side(Side side, std::uint32_t flags);

    /// OR `flags` into every boundary edge for which pred(midpoint) holds.
    template <class Pred>
    void tag_where(Pred pred, std::uint32_t flags) {
        for (auto& e : edges)
            if (e.tri[1] < 0 && pred(0.5 * (vertices[e.v[0]] + vertices[e.v[1]]))) e.tag |= flags;
    }

    /// Edge index for the vertex pair, or -1.
    Index find_edge(Index a, Index b) const;

private:
    std::vector<std::vector<std::pair<Index, Index>>> vertex_edges_;  // (other vertex, edge)
};

Mesh build_structured_rect(const Rect& rect, int nx, int ny, Subdomain sub,
                           Diagonal diag = Diagonal::right);

/// Read the `nsbiot-mesh v1` ASCII format.
Mesh load_mesh(const std::string& path);
Mesh parse_mesh(const std::string& text);
void save_mesh(const Mesh& mesh, const std::string& path);

/// Split a two-subdomain mesh; edges between subdomains get tag::interface.
std::pair<Mesh, Mesh> split_subdomains(const Mesh& mesh);

/// Maximum element diameter.
double mesh_size(const Mesh& mesh);

/// Every boundary edge must carry at least one condition of each required family.
void check_boundary_tags(const Mesh& mesh, Subdomain sub);

} // namespace nsbiot
