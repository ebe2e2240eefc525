#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "perclab/family.hpp"

namespace perclab {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
    VertexId u;
    VertexId v;
    bool operator==(const Edge&) const = default;
};

// Closed ball B_R(o) of a lattice, with vertices indexed in BFS order from the root
// (so spheres are contiguous index ranges) and edges induced on the ball.
class GraphPatch {
public:
    GraphPatch(GraphFamily family, int radius, int degree, std::vector<VertexKey> keys, std::vector<int> dist,
               std::vector<Edge> edges);

    const GraphFamily& family() const noexcept { return family_; }
    int radius() const noexcept { return radius_; }
    int degree() const noexcept { return degree_; }
    VertexId root() const noexcept { return 0; }

    std::size_t num_vertices() const noexcept { return dist_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }

    int dist(VertexId v) const noexcept { return dist_[v]; }
    const std::vector<int>& distances() const noexcept { return dist_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(EdgeId e) const noexcept { return edges_[e]; }
    bool on_boundary(VertexId v) const noexcept { return dist_[v] == radius_; }

    struct Incidence {
        VertexId vertex;
        EdgeId edge;
    };
    std::span<const Incidence> neighbors(VertexId v) const noexcept {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }
    std::size_t patch_degree(VertexId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

    // |B_n(o)| for 0 <= n <= radius.
    std::uint64_t growth(int n) const;
    // Index range [first, last) of S_r.
    std::pair<VertexId, VertexId> sphere_range(int r) const;
    std::vector<VertexId> sphere(int r) const;
    std::vector<VertexId> ball(int r) const;

    // Lattice coordinates; empty for patches read back from text.
    bool has_keys() const noexcept { return !keys_.empty(); }
    const VertexKey& key(VertexId v) const { return keys_.at(v); }
    std::optional<VertexId> find(const VertexKey& key) const;
    std::optional<EdgeId> find_edge(VertexId a, VertexId b) const;

private:
    GraphFamily family_;
    int radius_;
    int degree_;
    std::vector<VertexKey> keys_;
    std::vector<int> dist_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_;
    std::vector<Incidence> adjacency_;
    std::vector<std::uint64_t> ball_size_;
    std::unordered_map<VertexKey, VertexId, VertexKeyHash> index_;
};

using PatchPtr = std::shared_ptr<const GraphPatch>;

PatchPtr build_patch(const GraphFamily& family, int radius);

// Shared, memoised patches keyed by (family, radius); safe to call concurrently.
PatchPtr cached_patch(const GraphFamily& family, int radius);

std::uint64_t growth(const GraphPatch& patch, int n);

// Line-oriented text form: header, one "v index dist" line per vertex, one "e a b" line per edge.
void write_patch(std::ostream& out, const GraphPatch& patch);
GraphPatch read_patch(std::istream& in);
std::string patch_to_string(const GraphPatch& patch);

// Exact ball sizes without building a patch where a closed form exists (HyperCubic, RegularTree);
// otherwise from a memoised patch. Saturates at UINT64_MAX.
std::uint64_t growth_of(const GraphFamily& family, int n);

}  // namespace perclab
