#include "nsbiot/interface.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace nsbiot {

namespace {

bool lex_less(const Vec2& a, const Vec2& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    return a.y() < b.y();
}

// Point at arclength s; `left` picks the segment ending at s when s is a
// breakpoint, which matters at component junctions.
Vec2 point_at(const std::vector<TraceSegment>& trace, double s, bool left) {
    const TraceSegment* seg;
    if (left) {
        auto it = std::lower_bound(trace.begin(), trace.end(), s,
                                   [](const TraceSegment& g, double v) { return g.s1 < v; });
        seg = (it == trace.end()) ? &trace.back() : &*it;
    } else {
        auto it = std::upper_bound(trace.begin(), trace.end(), s,
                                   [](double v, const TraceSegment& g) { return v < g.s0; });
        seg = (it == trace.begin()) ? &trace.front() : &*std::prev(it);
    }
    return seg->point(std::clamp(s, seg->s0, seg->s1));
}

Index owner(const std::vector<TraceSegment>& trace, double s) {
    auto it = std::upper_bound(trace.begin(), trace.end(), s,
                               [](double v, const TraceSegment& seg) { return v < seg.s0; });
    return static_cast<Index>(std::max<std::ptrdiff_t>(0, (it - trace.begin()) - 1));
}

} // namespace

std::vector<TraceSegment> extract_trace(const Mesh& mesh) {
    std::map<Index, std::vector<Index>> vertex_edges;
    for (Index e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges[e];
        if (!(edge.tag & tag::interface)) continue;
        if (edge.tri[1] >= 0) throw MeshError("interface edge is interior to one subdomain", e);
        vertex_edges[edge.v[0]].push_back(e);
        vertex_edges[edge.v[1]].push_back(e);
    }
    std::vector<Index> endpoints;
    for (const auto& [v, list] : vertex_edges) {
        if (list.size() > 2) throw MeshError("interface branches at vertex", v);
        if (list.size() == 1) endpoints.push_back(v);
    }
    std::sort(endpoints.begin(), endpoints.end(), [&](Index a, Index b) {
        return lex_less(mesh.vertices[a], mesh.vertices[b]);
    });

    struct Chain {
        std::vector<std::pair<Index, Index>> steps; // (edge, start vertex)
    };
    std::vector<Chain> chains;
    std::vector<char> visited(mesh.edges.size(), 0);
    std::size_t walked = 0;
    for (Index start : endpoints) {
        if (visited[vertex_edges[start].front()]) continue;
        Chain chain;
        Index v = start;
        Index e = vertex_edges[start].front();
        while (e >= 0 && !visited[e]) {
            visited[e] = 1;
            chain.steps.emplace_back(e, v);
            const Edge& edge = mesh.edges[e];
            v = edge.v[0] == v ? edge.v[1] : edge.v[0];
            Index next = -1;
            for (Index cand : vertex_edges[v])
                if (!visited[cand]) next = cand;
            e = next;
        }
        walked += chain.steps.size();
        chains.push_back(std::move(chain));
    }
    std::size_t total = 0;
    for (const auto& [v, list] : vertex_edges) total += list.size();
    if (walked * 2 != total) {
        for (Index e = 0; e < mesh.num_edges(); ++e)
            if ((mesh.edges[e].tag & tag::interface) && !visited[e])
                throw MeshError("closed interface loops are not supported", e);
    }

    std::vector<TraceSegment> trace;
    double s = 0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        for (const auto& [e, v] : chains[c].steps) {
            const Edge& edge = mesh.edges[e];
            TraceSegment seg;
            seg.edge = e;
            seg.element = edge.tri[0];
            const auto& te = mesh.tri_edges[seg.element];
            seg.local_edge = static_cast<int>(std::find(te.begin(), te.end(), e) - te.begin());
            const Index w = edge.v[0] == v ? edge.v[1] : edge.v[0];
            seg.a = mesh.vertices[v];
            seg.b = mesh.vertices[w];
            seg.s0 = s;
            s += (seg.b - seg.a).norm();
            seg.s1 = s;
            seg.normal = mesh.outward_normal(e, seg.element);
            seg.component = static_cast<int>(c);
            trace.push_back(seg);
        }
    }
    return trace;
}

InterfaceTraces build_interface_traces(const Mesh& mesh_f, const Mesh& mesh_p) {
    InterfaceTraces out;
    out.trace_f = extract_trace(mesh_f);
    out.trace_p = extract_trace(mesh_p);
    if (out.trace_f.empty() && out.trace_p.empty()) return out;
    if (out.trace_f.empty() || out.trace_p.empty())
        throw GeometryMismatch("interface present on only one side");

    const auto& tf = out.trace_f;
    const auto& tp = out.trace_p;
    if (tf.back().component != tp.back().component)
        throw GeometryMismatch("interface has a different number of components on each side");
    if (std::abs(tf.back().s1 - tp.back().s1) > kGeometryTol)
        throw GeometryMismatch("interface lengths differ: " + std::to_string(tf.back().s1) + " vs " +
                               std::to_string(tp.back().s1));
    out.length = tp.back().s1;

    // Breakpoints of each side must lie on the other side at the same arclength.
    std::vector<std::pair<double, int>> breaks;
    for (const auto& seg : tf) breaks.emplace_back(seg.s0, seg.component);
    for (const auto& seg : tp) breaks.emplace_back(seg.s0, seg.component);
    for (const auto& seg : tf)
        if ((point_at(tp, seg.s0, false) - seg.a).norm() > kGeometryTol ||
            (point_at(tp, seg.s1, true) - seg.b).norm() > kGeometryTol)
            throw GeometryMismatch("fluid trace point not on poroelastic trace");
    for (const auto& seg : tp)
        if ((point_at(tf, seg.s0, false) - seg.a).norm() > kGeometryTol ||
            (point_at(tf, seg.s1, true) - seg.b).norm() > kGeometryTol)
            throw GeometryMismatch("poroelastic trace point not on fluid trace");
    for (const auto& seg : tf)
        if (seg.normal.dot(tp[owner(tp, 0.5 * (seg.s0 + seg.s1))].normal) > -1 + 1e-8)
            throw GeometryMismatch("interface normals are not opposite");

    std::vector<double> s;
    for (const auto& b : breaks) s.push_back(b.first);
    s.push_back(out.length);
    std::sort(s.begin(), s.end());
    std::vector<double> uniq;
    for (double v : s)
        if (uniq.empty() || v - uniq.back() > kGeometryTol) uniq.push_back(v);
    uniq.back() = out.length;

    for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
        MergedSegment m;
        m.s0 = uniq[i];
        m.s1 = uniq[i + 1];
        const double mid = 0.5 * (m.s0 + m.s1);
        m.seg_f = owner(tf, mid);
        m.seg_p = owner(tp, mid);
        const TraceSegment& p = tp[m.seg_p];
        m.a = p.point(m.s0);
        m.b = p.point(m.s1);
        m.component = p.component;
        if (tf[m.seg_f].component != p.component)
            throw GeometryMismatch("merged segment spans different components");
        out.merged.push_back(m);
    }
    return out;
}

} // namespace nsbiot
