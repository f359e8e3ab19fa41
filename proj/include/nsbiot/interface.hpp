#pragma once

#include "nsbiot/mesh.hpp"

#include <vector>

namespace nsbiot {

/// One mesh edge of the interface seen from one subdomain.
struct TraceSegment {
    Index edge = -1;     // edge index in the owning mesh
    Index element = -1;  // adjacent triangle
    int local_edge = -1; // position of `edge` in tri_edges[element]
    Vec2 a, b;           // endpoints in increasing arclength
    double s0 = 0, s1 = 0;
    Vec2 normal;         // outward from the owning subdomain
    int component = 0;

    double length() const { return s1 - s0; }
    Vec2 point(double s) const { return a + (s - s0) / (s1 - s0) * (b - a); }
};

struct MergedSegment {
    double s0 = 0, s1 = 0;
    Vec2 a, b;
    Index seg_f = -1, seg_p = -1;
    int component = 0;

    double length() const { return s1 - s0; }
};

struct InterfaceTraces {
    std::vector<TraceSegment> trace_f;
    std::vector<TraceSegment> trace_p;
    std::vector<MergedSegment> merged;
    double length = 0;

    bool empty() const { return merged.empty(); }
    Index num_segments_p() const { return static_cast<Index>(trace_p.size()); }
};

/// Unit tangent used by the slip condition, counterclockwise w.r.t. the fluid.
inline Vec2 interface_tangent(const Vec2& n_f) { return Vec2(-n_f.y(), n_f.x()); }

inline constexpr double kGeometryTol = 1e-10;

/// Chain the interface edges of each side and build their common refinement.
/// Either mesh may be empty only if both have no interface edges.
InterfaceTraces build_interface_traces(const Mesh& mesh_f, const Mesh& mesh_p);

/// Ordered trace partition of the tagged edges of one mesh.
std::vector<TraceSegment> extract_trace(const Mesh& mesh);

} // namespace nsbiot
