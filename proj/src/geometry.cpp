#include "perclab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perclab/errors.hpp"

namespace perclab {

BfsWorkspace::BfsWorkspace(const GraphPatch& patch)
    : patch_(&patch),
      stamp_(patch.num_vertices(), 0),
      dist_(patch.num_vertices(), 0),
      parent_(patch.num_vertices(), 0) {}

void BfsWorkspace::run(std::span<const VertexId> sources, int max_depth, const std::vector<std::uint8_t>* allowed) {
    if (++epoch_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        epoch_ = 1;
    }
    order_.clear();
    for (VertexId s : sources) {
        if (s >= stamp_.size()) throw OutOfPatchError("vertex outside patch");
        if (allowed && !(*allowed)[s]) continue;
        if (stamp_[s] == epoch_) continue;
        stamp_[s] = epoch_;
        dist_[s] = 0;
        parent_[s] = s;
        order_.push_back(s);
    }
    for (std::size_t head = 0; head < order_.size(); ++head) {
        const VertexId v = order_[head];
        if (max_depth >= 0 && dist_[v] >= max_depth) continue;
        for (const auto& inc : patch_->neighbors(v)) {
            const VertexId w = inc.vertex;
            if (allowed && !(*allowed)[w]) continue;
            if (stamp_[w] == epoch_) {
                // lexicographic parent rule: keep the smallest-index predecessor
                if (dist_[w] == dist_[v] + 1 && v < parent_[w]) parent_[w] = v;
                continue;
            }
            stamp_[w] = epoch_;
            dist_[w] = dist_[v] + 1;
            parent_[w] = v;
            order_.push_back(w);
        }
    }
}

int patch_distance(const GraphPatch& patch, VertexId u, VertexId v) {
    BfsWorkspace ws(patch);
    ws.run_from(u);
    if (!ws.reached(v)) throw ArgumentError("vertices are in different components of the patch");
    return ws.distance(v);
}

Path geodesic(const GraphPatch& patch, VertexId u, VertexId v, BfsWorkspace& ws) {
    if (u >= patch.num_vertices() || v >= patch.num_vertices()) throw OutOfPatchError("vertex outside patch");
    if (u == v) return {u};
    ws.run_from(u);
    if (!ws.reached(v)) throw ArgumentError("vertices are in different components of the patch");
    Path path;
    for (VertexId w = v; w != u; w = ws.parent(w)) path.push_back(w);
    path.push_back(u);
    std::reverse(path.begin(), path.end());
    return path;
}

Path geodesic(const GraphPatch& patch, VertexId u, VertexId v) {
    BfsWorkspace ws(patch);
    return geodesic(patch, u, v, ws);
}

void validate_path(const GraphPatch& patch, const Path& path) {
    if (path.empty()) throw ArgumentError("path must contain at least one vertex");
    for (VertexId v : path)
        if (v >= patch.num_vertices()) throw OutOfPatchError("path vertex outside patch");
    for (std::size_t i = 1; i < path.size(); ++i)
        if (path[i - 1] != path[i] && !patch.find_edge(path[i - 1], path[i])) throw ArgumentError("path has non-adjacent consecutive vertices");
}

TubeSpec tube(const GraphPatch& patch, const Path& path, int r) {
    if (r < 0) throw ArgumentError("tube thickness must be nonnegative");
    validate_path(patch, path);
    BfsWorkspace ws(patch);
    ws.run(path, r);
    TubeSpec t{path, r, ws.order()};
    std::sort(t.vertex_set.begin(), t.vertex_set.end());
    return t;
}

ExposedSphere exposed_sphere(const GraphPatch& patch, int r, int escape_radius) {
    if (r < 0) throw ArgumentError("sphere radius must be nonnegative");
    if (escape_radius <= r) throw ArgumentError("escape radius must exceed r");
    if (escape_radius > patch.radius()) throw OutOfPatchError("escape radius exceeds patch radius");
    auto compute = [&](int R) {
        // label vertices of the shell r < d <= R that can reach S_R inside the shell
        std::vector<std::uint8_t> shell(patch.num_vertices(), 0);
        for (VertexId v = 0; v < patch.num_vertices(); ++v) shell[v] = patch.dist(v) > r && patch.dist(v) <= R;
        BfsWorkspace ws(patch);
        const auto target = patch.sphere(R);
        ws.run(target, -1, &shell);
        std::vector<VertexId> out;
        auto [a, b] = patch.sphere_range(r);
        for (VertexId u = a; u < b; ++u) {
            for (const auto& inc : patch.neighbors(u)) {
                if (patch.dist(inc.vertex) == r + 1 && ws.reached(inc.vertex)) {
                    out.push_back(u);
                    break;
                }
            }
        }
        return out;
    };
    ExposedSphere result;
    result.vertices = compute(escape_radius);
    result.stabilized = escape_radius - 1 > r && compute(escape_radius - 1) == result.vertices;
    return result;
}

bool crossing_hits_exposed(const GraphPatch& patch, int r, const Path& path, int escape_radius) {
    validate_path(patch, path);
    if (patch.dist(path.front()) != r || patch.dist(path.back()) != 2 * r + 1)
        throw ArgumentError("crossing must start in S_r and end in S_{2r+1}");
    const int R = escape_radius < 0 ? patch.radius() : escape_radius;
    if (R < 2 * r + 1) throw ArgumentError("escape radius must be at least 2r+1");
    const auto exposed = exposed_sphere(patch, r, R).vertices;
    return std::any_of(path.begin(), path.end(),
                       [&](VertexId v) { return std::binary_search(exposed.begin(), exposed.end(), v); });
}

bool all_crossings_hit_exposed(const GraphPatch& patch, int r, int escape_radius) {
    const int R = escape_radius < 0 ? patch.radius() : escape_radius;
    if (2 * r + 1 > R) throw ArgumentError("patch too small for S_r to S_{2r+1} crossings");
    const auto exposed = exposed_sphere(patch, r, R).vertices;
    std::vector<std::uint8_t> allowed(patch.num_vertices(), 1);
    for (VertexId v : exposed) allowed[v] = 0;
    BfsWorkspace ws(patch);
    ws.run(patch.sphere(r), -1, &allowed);
    auto [a, b] = patch.sphere_range(2 * r + 1);
    for (VertexId v = a; v < b; ++v)
        if (ws.reached(v)) return false;
    return true;
}

BoundaryScale boundary_ratio_scale(const GraphPatch& patch, int n) {
    if (n < 1) throw ArgumentError("scale must be at least 1");
    if (2 * n - 1 > patch.radius()) throw OutOfPatchError("boundary scale needs 2n-1 <= patch radius");
    const auto d = static_cast<std::uint64_t>(patch.degree());
    BoundaryScale best;
    for (int m = n; m <= 2 * n - 1; ++m) {
        // edges leaving B_m all start on S_m; count the missing inner incidences there
        std::uint64_t boundary = 0;
        auto [a, b] = patch.sphere_range(m);
        for (VertexId v = a; v < b; ++v) {
            std::uint64_t inner = 0;
            for (const auto& inc : patch.neighbors(v))
                if (patch.dist(inc.vertex) <= m) ++inner;
            boundary += d - inner;
        }
        const auto size = patch.growth(m);
        const double ratio = static_cast<double>(boundary) / static_cast<double>(size);
        // compare as exact fractions so ties resolve to the smallest m
        if (m == n || static_cast<unsigned __int128>(boundary) * best.ball_size <
                          static_cast<unsigned __int128>(best.boundary_edges) * size) {
            best.m = m;
            best.boundary_edges = boundary;
            best.ball_size = size;
            best.ratio = ratio;
        }
    }
    if (2 * n <= patch.radius()) {
        const double dd = static_cast<double>(d);
        best.bound = dd * dd / std::log(dd + 1.0) * std::log(static_cast<double>(patch.growth(2 * n))) / n;
    }
    return best;
}

std::int64_t floor_cbrt(std::int64_t n) {
    if (n < 0) throw ArgumentError("cube root of a negative number");
    auto c = static_cast<std::int64_t>(std::cbrt(static_cast<double>(n)));
    while (c > 0 && c * c * c > n) --c;
    while ((c + 1) * (c + 1) * (c + 1) <= n) ++c;
    return c;
}

std::int64_t ceil_cbrt(std::int64_t n) {
    const auto f = floor_cbrt(n);
    return f * f * f == n ? f : f + 1;
}

std::vector<int> low_growth_scales(const GrowthFunction& growth, double D, int n_max) {
    if (D < 1) throw ArgumentError("low-growth exponent D must be at least 1");
    // good[m]: log Gr(m) <= (log m)^D
    std::vector<std::uint8_t> good(static_cast<std::size_t>(std::max(n_max, 0)) + 1, 0);
    for (int m = 1; m <= n_max; ++m) {
        const double lhs = std::log(static_cast<double>(growth(m)));
        const double rhs = std::pow(std::log(static_cast<double>(m)), D);
        good[static_cast<std::size_t>(m)] = lhs <= rhs;
    }
    std::vector<int> out;
    for (int n = 1; n <= n_max; ++n) {
        const auto lo = ceil_cbrt(n);
        bool ok = true;
        for (auto m = lo; m <= n && ok; ++m) ok = good[static_cast<std::size_t>(m)];
        if (ok) out.push_back(n);
    }
    return out;
}

std::vector<int> low_growth_scales(const GraphPatch& patch, double D, int n_max) {
    if (n_max > patch.radius()) throw OutOfPatchError("n_max exceeds patch radius");
    return low_growth_scales([&](int m) { return patch.growth(m); }, D, n_max);
}

}  // namespace perclab
