#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "perclab/patch.hpp"

namespace perclab {

using Path = std::vector<VertexId>;

// Reusable BFS scratch space. Distances are only valid for vertices visited in the
// most recent run (checked with `reached`).
class BfsWorkspace {
public:
    explicit BfsWorkspace(const GraphPatch& patch);

    // BFS from the given sources, optionally restricted to vertices with allowed[v] != 0,
    // stopping after depth max_depth (-1: unlimited).
    void run(std::span<const VertexId> sources, int max_depth = -1, const std::vector<std::uint8_t>* allowed = nullptr);
    void run_from(VertexId source, int max_depth = -1) { run(std::span<const VertexId>(&source, 1), max_depth); }

    bool reached(VertexId v) const noexcept { return stamp_[v] == epoch_; }
    int distance(VertexId v) const noexcept { return reached(v) ? dist_[v] : -1; }
    // Vertices visited by the last run, in BFS order.
    const std::vector<VertexId>& order() const noexcept { return order_; }
    // Smallest-index neighbour one step closer to the sources (lexicographic parent rule).
    VertexId parent(VertexId v) const noexcept { return parent_[v]; }

private:
    const GraphPatch* patch_;
    std::vector<std::uint32_t> stamp_;
    std::vector<int> dist_;
    std::vector<VertexId> parent_;
    std::vector<VertexId> order_;
    std::uint32_t epoch_ = 0;
};

// Graph distance inside the patch.
int patch_distance(const GraphPatch& patch, VertexId u, VertexId v);

// Canonical geodesic: BFS from u, each vertex's parent is its smallest-index neighbour at the
// previous level; the path is read back from v. Deterministic given the patch.
Path geodesic(const GraphPatch& patch, VertexId u, VertexId v);
Path geodesic(const GraphPatch& patch, VertexId u, VertexId v, BfsWorkspace& ws);

struct TubeSpec {
    Path path;
    int thickness = 0;
    std::vector<VertexId> vertex_set;  // sorted
    std::size_t length() const noexcept { return path.empty() ? 0 : path.size() - 1; }
};

TubeSpec tube(const GraphPatch& patch, const Path& path, int r);

// Throws ArgumentError unless consecutive vertices are adjacent in the patch or equal (a lazy stay).
void validate_path(const GraphPatch& patch, const Path& path);

struct ExposedSphere {
    std::vector<VertexId> vertices;  // sorted
    bool stabilized = false;         // same set at escape_radius - 1 (false when that would be <= r)
};

// Vertices u in S_r with a self-avoiding path to S_R whose vertices after u avoid B_r.
ExposedSphere exposed_sphere(const GraphPatch& patch, int r, int escape_radius);

// Whether the path meets the exposed sphere computed with the given escape radius
// (default: the patch radius). The path must start in S_r and end in S_{2r+1}.
bool crossing_hits_exposed(const GraphPatch& patch, int r, const Path& path, int escape_radius = -1);

// Decides whether every path in the patch from S_r to S_{2r+1} meets the exposed sphere.
// A path avoiding a vertex set exists iff S_{2r+1} is reachable from S_r minus that set in the
// graph with the set deleted, so this is exhaustive over all paths.
bool all_crossings_hit_exposed(const GraphPatch& patch, int r, int escape_radius = -1);

struct BoundaryScale {
    int m = 0;
    std::uint64_t boundary_edges = 0;  // |dB_m|
    std::uint64_t ball_size = 0;       // |B_m|
    double ratio = 0;
    std::optional<double> bound;  // d^2/log(d+1) * log|B_2n| / n when 2n <= radius
};

// Pigeonhole scale: the m in [n, 2n-1] minimising |dB_m| / |B_m| (edge boundary).
BoundaryScale boundary_ratio_scale(const GraphPatch& patch, int n);

using GrowthFunction = std::function<std::uint64_t(int)>;

// {n <= n_max : log Gr(m) <= (log m)^D for every integer m in [ceil(n^{1/3}), n]}.
std::vector<int> low_growth_scales(const GrowthFunction& growth, double D, int n_max);
std::vector<int> low_growth_scales(const GraphPatch& patch, double D, int n_max);

// Exact integer cube root rounded up / down.
std::int64_t ceil_cbrt(std::int64_t n);
std::int64_t floor_cbrt(std::int64_t n);

}  // namespace perclab
