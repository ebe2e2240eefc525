#pragma once
// Deliberately naive reference implementations used as test oracles. None of them reuse the
// library's union-find, sweep or enumeration code.

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "perclab/patch.hpp"

namespace oracle {

using perclab::GraphPatch;
using perclab::VertexId;

// Component label per vertex by BFS over open edges, optionally inside a vertex mask.
inline std::vector<int> flood_components(const GraphPatch& patch, const std::vector<std::uint8_t>& open,
                                         const std::vector<std::uint8_t>& allowed = {}) {
    const std::size_t n = patch.num_vertices();
    std::vector<std::vector<VertexId>> adj(n);
    for (std::size_t e = 0; e < patch.num_edges(); ++e) {
        if (!open[e]) continue;
        const auto [a, b] = patch.edge(static_cast<perclab::EdgeId>(e));
        if (!allowed.empty() && (!allowed[a] || !allowed[b])) continue;
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<int> label(n, -1);
    int next = 0;
    for (VertexId s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        std::queue<VertexId> q;
        q.push(s);
        label[s] = next;
        while (!q.empty()) {
            const VertexId v = q.front();
            q.pop();
            for (VertexId w : adj[v])
                if (label[w] < 0) label[w] = next, q.push(w);
        }
        ++next;
    }
    return label;
}

inline bool flood_connected(const GraphPatch& patch, const std::vector<std::uint8_t>& open,
                            const std::vector<VertexId>& A, const std::vector<VertexId>& B,
                            const std::vector<std::uint8_t>& allowed = {}) {
    const auto label = flood_components(patch, open, allowed);
    for (VertexId a : A) {
        if (!allowed.empty() && !allowed[a]) continue;
        for (VertexId b : B) {
            if (!allowed.empty() && !allowed[b]) continue;
            if (label[a] == label[b]) return true;
        }
    }
    return false;
}

// Sum of p^{open} (1-p)^{closed} over all 2^E configurations of the patch edges where event holds.
inline double enumerate(const GraphPatch& patch, double p,
                        const std::function<bool(const std::vector<std::uint8_t>&)>& event) {
    const std::size_t E = patch.num_edges();
    std::vector<std::uint8_t> open(E);
    double total = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << E); ++mask) {
        double w = 1;
        for (std::size_t e = 0; e < E; ++e) {
            open[e] = (mask >> e) & 1;
            w *= open[e] ? p : 1 - p;
        }
        if (event(open)) total += w;
    }
    return total;
}

// BFS distances from a source over all patch edges.
inline std::vector<int> distances(const GraphPatch& patch, VertexId s) {
    std::vector<int> d(patch.num_vertices(), -1);
    std::queue<VertexId> q;
    q.push(s);
    d[s] = 0;
    while (!q.empty()) {
        const VertexId v = q.front();
        q.pop();
        for (const auto& inc : patch.neighbors(v))
            if (d[inc.vertex] < 0) d[inc.vertex] = d[v] + 1, q.push(inc.vertex);
    }
    return d;
}

}  // namespace oracle
