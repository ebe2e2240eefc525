#include "perclab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "perclab/errors.hpp"
#include "perclab/parallel.hpp"
#include "perclab/union_find.hpp"

namespace perclab {

namespace {

struct Counts {
    std::vector<std::uint64_t> c;
};

auto counts_of(std::size_t k) {
    return [k] { return Counts{std::vector<std::uint64_t>(k, 0)}; };
}

void merge_counts(Counts& into, const Counts& from) {
    for (std::size_t i = 0; i < into.c.size(); ++i) into.c[i] += from.c[i];
}

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability must lie in [0,1]");
}

void check_replicas(std::uint64_t replicas) {
    if (replicas < 1) throw ArgumentError("at least one replica is required");
}

}  // namespace

// ---------------------------------------------------------------- exact enumeration

double exact_probability(const GraphPatch& patch, double p, const std::function<bool(const OpenMask&)>& event,
                         std::span<const EdgeId> edges) {
    check_probability(p);
    std::vector<EdgeId> free(edges.begin(), edges.end());
    if (free.empty()) {
        free.resize(patch.num_edges());
        std::iota(free.begin(), free.end(), 0u);
    }
    if (free.size() > kMaxEnumerationEdges) throw ArgumentError("too many edges for exact enumeration");
    const std::size_t k = free.size();
    std::vector<double> weight(k + 1);
    for (std::size_t j = 0; j <= k; ++j)
        weight[j] = std::pow(p, static_cast<double>(j)) * std::pow(1.0 - p, static_cast<double>(k - j));
    OpenMask open(patch.num_edges(), 0);
    double total = 0;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
        for (std::size_t i = 0; i < k; ++i) open[free[i]] = (bits >> i) & 1u;
        if (event(open)) total += weight[static_cast<std::size_t>(std::popcount(bits))];
    }
    return total;
}

// ---------------------------------------------------------------- two-point function

PairGrid est_pair_grid(PatchPtr patch, double p, std::span<const VertexId> A, std::span<const VertexId> B,
                       const Region& lambda, std::uint64_t replicas, std::uint64_t seed, double confidence) {
    check_probability(p);
    check_replicas(replicas);
    if (A.empty() || B.empty()) throw ArgumentError("connection sets must be nonempty");
    const GraphPatch& g = *patch;
    if (!lambda.empty() && lambda.size() != g.num_vertices()) throw ArgumentError("region size mismatch");
    for (VertexId v : A)
        if (v >= g.num_vertices()) throw OutOfPatchError("vertex outside patch");
    for (VertexId v : B)
        if (v >= g.num_vertices()) throw OutOfPatchError("vertex outside patch");
    auto inside = [&](VertexId v) { return lambda.empty() || lambda[v] != 0; };

    // Only edges inside Lambda matter; collect them once.
    std::vector<EdgeId> active;
    for (EdgeId e = 0; e < g.num_edges(); ++e)
        if (inside(g.edge(e).u) && inside(g.edge(e).v)) active.push_back(e);

    const std::size_t rows = A.size(), cols = B.size();
    struct Acc {
        Counts counts;
        UnionFind uf;
    };
    auto acc = replicate(
        0, replicas, [&] { return Acc{Counts{std::vector<std::uint64_t>(rows * cols, 0)}, UnionFind(g.num_vertices())}; },
        [&](Acc& a, std::uint64_t r) {
            a.uf.reset(g.num_vertices());
            for (EdgeId e : active)
                if (edge_label(seed, r, e) <= p) a.uf.unite(g.edge(e).u, g.edge(e).v);
            for (std::size_t i = 0; i < rows; ++i) {
                if (!inside(A[i])) continue;
                for (std::size_t j = 0; j < cols; ++j)
                    if (inside(B[j]) && a.uf.same(A[i], B[j])) ++a.counts.c[i * cols + j];
            }
        },
        [](Acc& into, const Acc& from) { merge_counts(into.counts, from.counts); });

    PairGrid grid;
    grid.rows = rows;
    grid.cols = cols;
    for (std::size_t i = 0; i < rows * cols; ++i)
        grid.cells.push_back(proportion_estimate(acc.counts.c[i], replicas, seed, g.radius(), confidence));
    return grid;
}

McEstimate est_two_point(PatchPtr patch, double p, std::span<const VertexId> A, std::span<const VertexId> B,
                         const Region& lambda, std::uint64_t replicas, std::uint64_t seed, double confidence) {
    const auto grid = est_pair_grid(std::move(patch), p, A, B, lambda, replicas, seed, confidence);
    return *std::min_element(grid.cells.begin(), grid.cells.end(),
                             [](const McEstimate& a, const McEstimate& b) { return a.mean < b.mean; });
}

McEstimate est_two_point(const GraphFamily& family, int radius, double p, VertexId u, VertexId v,
                         const Region& lambda, std::uint64_t replicas, std::uint64_t seed) {
    const VertexId a[1] = {u}, b[1] = {v};
    return est_two_point(cached_patch(family, radius), p, a, b, lambda, replicas, seed);
}

// ---------------------------------------------------------------- corridor function

int corridor_patch_radius(int m, std::optional<int> n) {
    if (m < 0) throw ArgumentError("corridor length must be nonnegative");
    if (n && *n < 0) throw ArgumentError("tube radius must be nonnegative");
    return n ? m + *n : 2 * m + 2;
}

std::vector<Path> default_corridor_paths(const GraphPatch& patch, int m) {
    if (m > patch.radius()) throw OutOfPatchError("corridor length exceeds patch radius");
    const VertexId o = patch.root();
    if (m == 0) return {Path{o}};
    BfsWorkspace ws(patch);
    std::vector<Path> out;
    const auto sm = patch.sphere(m);
    for (VertexId target : {sm.front(), sm[sm.size() / 2], sm.back()}) out.push_back(geodesic(patch, o, target, ws));

    // two legs: out to S_k, then a geodesic of the remaining length from there
    const int k = (m + 1) / 2;
    const VertexId w = patch.sphere(k).front();
    Path two_leg = geodesic(patch, o, w, ws);
    if (m - k > 0) {
        ws.run_from(w, m - k);
        VertexId z = w;
        for (VertexId x : ws.order())
            if (ws.distance(x) == m - k) {
                z = x;
                break;
            }
        Path leg = geodesic(patch, w, z, ws);
        two_leg.insert(two_leg.end(), leg.begin() + 1, leg.end());
    }
    out.push_back(std::move(two_leg));

    // hugging S_k: after reaching it, step to unused neighbours at level k (else k+1)
    Path hug = geodesic(patch, o, w, ws);
    std::vector<std::uint8_t> used(patch.num_vertices(), 0);
    for (VertexId x : hug) used[x] = 1;
    while (static_cast<int>(hug.size()) - 1 < m) {
        const VertexId cur = hug.back();
        VertexId best = cur;
        int best_level = 1 << 30;
        for (const auto& inc : patch.neighbors(cur)) {
            const int lvl = patch.dist(inc.vertex);
            if (used[inc.vertex] || lvl < k || lvl > k + 1) continue;
            if (lvl < best_level || (lvl == best_level && inc.vertex < best)) {
                best = inc.vertex;
                best_level = lvl;
            }
        }
        if (best == cur) break;
        used[best] = 1;
        hug.push_back(best);
    }
    out.push_back(std::move(hug));
    return out;
}

CorridorEstimate est_corridor(const GraphFamily& family, double p, int m, std::optional<int> n,
                              const std::vector<Path>* paths, std::uint64_t replicas, std::uint64_t seed) {
    check_probability(p);
    check_replicas(replicas);
    const int radius = corridor_patch_radius(m, n);
    const PatchPtr patch = cached_patch(family, radius);
    const GraphPatch& g = *patch;
    const std::vector<Path> family_paths = paths ? *paths : default_corridor_paths(g, m);
    if (family_paths.empty()) throw ArgumentError("corridor needs at least one path");

    struct Prepared {
        std::vector<Edge> local_edges;
        std::vector<EdgeId> global_edges;
        std::size_t size = 0;
        std::uint32_t start = 0, end = 0;
    };
    std::vector<Prepared> prepared;
    for (const Path& path : family_paths) {
        if (path.empty()) throw ArgumentError("corridor paths must be nonempty");
        validate_path(g, path);
        if (static_cast<int>(path.size()) - 1 > m) throw ArgumentError("corridor path longer than m");
        std::vector<VertexId> verts;
        if (n) {
            verts = tube(g, path, *n).vertex_set;
        } else {
            verts.resize(g.num_vertices());
            std::iota(verts.begin(), verts.end(), 0u);
        }
        std::unordered_map<VertexId, std::uint32_t> local;
        for (std::uint32_t i = 0; i < verts.size(); ++i) local.emplace(verts[i], i);
        Prepared pr;
        pr.size = verts.size();
        for (VertexId v : verts)
            for (const auto& inc : g.neighbors(v))
                if (v < inc.vertex) {
                    auto it = local.find(inc.vertex);
                    if (it == local.end()) continue;
                    pr.local_edges.push_back({local.at(v), it->second});
                    pr.global_edges.push_back(inc.edge);
                }
        pr.start = local.at(path.front());
        pr.end = local.at(path.back());
        prepared.push_back(std::move(pr));
    }

    struct Acc {
        Counts counts;
        UnionFind uf;
    };
    auto acc = replicate(
        0, replicas, [&] { return Acc{Counts{std::vector<std::uint64_t>(prepared.size(), 0)}, UnionFind()}; },
        [&](Acc& a, std::uint64_t r) {
            for (std::size_t i = 0; i < prepared.size(); ++i) {
                const auto& pr = prepared[i];
                if (pr.start == pr.end) {
                    ++a.counts.c[i];
                    continue;
                }
                a.uf.reset(pr.size);
                for (std::size_t j = 0; j < pr.local_edges.size(); ++j)
                    if (edge_label(seed, r, pr.global_edges[j]) <= p)
                        a.uf.unite(pr.local_edges[j].u, pr.local_edges[j].v);
                if (a.uf.same(pr.start, pr.end)) ++a.counts.c[i];
            }
        },
        [](Acc& into, const Acc& from) { merge_counts(into.counts, from.counts); });

    CorridorEstimate out;
    out.paths_tested = prepared.size();
    out.tube_radius = n;
    std::size_t worst = 0;
    for (std::size_t i = 1; i < prepared.size(); ++i)
        if (acc.counts.c[i] < acc.counts.c[worst]) worst = i;
    out.estimate = proportion_estimate(acc.counts.c[worst], replicas, seed, radius);
    out.worst_path = family_paths[worst];
    return out;
}

// ---------------------------------------------------------------- Piv and two-ghost

std::vector<McEstimate> est_piv_multi(const GraphFamily& family, double p, std::span<const int> inner, int n,
                                      std::uint64_t replicas, std::uint64_t seed, double confidence) {
    check_probability(p);
    check_replicas(replicas);
    for (int m : inner)
        if (m < 1 || m > n) throw ArgumentError("Piv requires 1 <= m <= n");
    const PatchPtr patch = cached_patch(family, n);
    const GraphPatch& g = *patch;
    const auto [s0, s1] = g.sphere_range(n);
    auto acc = replicate(
        0, replicas, counts_of(inner.size()),
        [&](Counts& a, std::uint64_t r) {
            ClusterForest forest(g);
            for (EdgeId e = 0; e < g.num_edges(); ++e)
                if (edge_label(seed, r, e) <= p) forest.add_edge(e);
            // for each crossing cluster its closest approach to the root
            std::vector<std::pair<std::uint32_t, int>> crossing;
            for (VertexId v = s0; v < s1; ++v) crossing.emplace_back(forest.find(v), forest.min_dist(v));
            std::sort(crossing.begin(), crossing.end());
            crossing.erase(std::unique(crossing.begin(), crossing.end()), crossing.end());
            for (std::size_t i = 0; i < inner.size(); ++i) {
                int reach = 0;
                for (const auto& [root, md] : crossing)
                    if (md <= inner[i] && ++reach >= 2) break;
                if (reach >= 2) ++a.c[i];
            }
        },
        merge_counts);
    std::vector<McEstimate> out;
    for (std::size_t i = 0; i < inner.size(); ++i)
        out.push_back(proportion_estimate(acc.c[i], replicas, seed, n, confidence));
    return out;
}

PivEstimate est_piv(const GraphFamily& family, int radius, double p, int m, int n, std::uint64_t replicas,
                    std::uint64_t seed, double C, double eps) {
    if (m < 1 || m > n) throw ArgumentError("Piv requires 1 <= m <= n");
    if (n > radius) throw OutOfPatchError("Piv scale exceeds patch radius");
    const int inner[1] = {m};
    PivEstimate out;
    out.estimate = est_piv_multi(family, p, inner, n, replicas, seed)[0];
    const double gr = static_cast<double>(growth_of(family, n));
    out.ceiling = C * std::pow(std::log(gr) / n, 0.5 - eps);
    return out;
}

EdgeId root_edge(const GraphPatch& patch) {
    const auto nb = patch.neighbors(patch.root());
    if (nb.empty()) throw ArgumentError("root has no incident edge");
    return nb.front().edge;
}

namespace {

// Depth-first cluster exploration with lazily generated labels and epoch stamps.
struct Explorer {
    std::vector<std::uint32_t> stamp;
    std::vector<VertexId> stack;
    std::uint32_t epoch = 0;

    explicit Explorer(std::size_t n) : stamp(n, 0) {}

    std::uint32_t fresh() {
        if (++epoch == 0) {
            std::fill(stamp.begin(), stamp.end(), 0);
            epoch = 1;
        }
        return epoch;
    }
};

}  // namespace

std::vector<McEstimate> est_two_ghost_multi(const GraphFamily& family, int radius, double p,
                                            std::span<const std::uint64_t> ns, std::uint64_t replicas,
                                            std::uint64_t seed) {
    check_probability(p);
    check_replicas(replicas);
    if (ns.empty()) throw ArgumentError("no size thresholds given");
    for (auto n : ns)
        if (n < 1) throw ArgumentError("two-ghost size threshold must be at least 1");
    const std::uint64_t n_max = *std::max_element(ns.begin(), ns.end());
    const PatchPtr patch = cached_patch(family, radius);
    const GraphPatch& g = *patch;
    const EdgeId e0 = root_edge(g);
    const VertexId x = g.edge(e0).u, y = g.edge(e0).v;

    struct Acc {
        Counts counts;
        Explorer ex;
    };
    auto acc = replicate(
        0, replicas, [&] { return Acc{Counts{std::vector<std::uint64_t>(ns.size(), 0)}, Explorer(g.num_vertices())}; },
        [&](Acc& a, std::uint64_t r) {
            if (edge_label(seed, r, e0) <= p) return;
            auto& ex = a.ex;
            // Explores the cluster of `start`; stops early once it is known to be infinite and large.
            // Returns false if it meets a vertex stamped `other`.
            auto explore = [&](VertexId start, std::uint32_t mark, std::uint32_t other, std::uint64_t& size,
                               bool& touches) {
                size = 1;
                touches = g.on_boundary(start);
                ex.stamp[start] = mark;
                ex.stack.assign(1, start);
                while (!ex.stack.empty()) {
                    if (touches && size >= n_max) return true;
                    const VertexId v = ex.stack.back();
                    ex.stack.pop_back();
                    for (const auto& inc : g.neighbors(v)) {
                        const auto s = ex.stamp[inc.vertex];
                        if (s == mark) continue;
                        if (edge_label(seed, r, inc.edge) > p) continue;
                        if (s == other && other != 0) return false;
                        ex.stamp[inc.vertex] = mark;
                        ++size;
                        touches = touches || g.on_boundary(inc.vertex);
                        ex.stack.push_back(inc.vertex);
                    }
                }
                return true;
            };
            const std::uint32_t mx = ex.fresh(), my = ex.fresh();
            std::uint64_t sx = 0, sy = 0;
            bool tx = false, ty = false;
            explore(x, mx, 0, sx, tx);
            if (ex.stamp[y] == mx) return;
            if (!explore(y, my, mx, sy, ty)) return;
            if (tx && ty) return;
            for (std::size_t i = 0; i < ns.size(); ++i)
                if (sx >= ns[i] && sy >= ns[i]) ++a.counts.c[i];
        },
        [](Acc& into, const Acc& from) { merge_counts(into.counts, from.counts); });
    std::vector<McEstimate> out;
    for (std::size_t i = 0; i < ns.size(); ++i)
        out.push_back(proportion_estimate(acc.counts.c[i], replicas, seed, radius));
    return out;
}

McEstimate est_two_ghost(const GraphFamily& family, int radius, double p, std::uint64_t n, std::uint64_t replicas,
                         std::uint64_t seed) {
    const std::uint64_t ns[1] = {n};
    return est_two_ghost_multi(family, radius, p, ns, replicas, seed)[0];
}

// ---------------------------------------------------------------- sphere connection

std::vector<McEstimate> est_sphere_connection_multi(const GraphFamily& family, int radius, double p,
                                                    std::span<const int> rs, std::uint64_t replicas,
                                                    std::uint64_t seed) {
    check_probability(p);
    check_replicas(replicas);
    if (rs.empty()) throw ArgumentError("no radii given");
    for (int r : rs)
        if (r < 0 || r > radius) throw OutOfPatchError("sphere radius outside patch");
    const int r_max = *std::max_element(rs.begin(), rs.end());
    const PatchPtr patch = cached_patch(family, radius);
    const GraphPatch& g = *patch;
    struct Acc {
        Counts counts;
        Explorer ex;
    };
    auto acc = replicate(
        0, replicas, [&] { return Acc{Counts{std::vector<std::uint64_t>(rs.size(), 0)}, Explorer(g.num_vertices())}; },
        [&](Acc& a, std::uint64_t r) {
            auto& ex = a.ex;
            const auto mark = ex.fresh();
            int reach = 0;
            ex.stamp[g.root()] = mark;
            ex.stack.assign(1, g.root());
            while (!ex.stack.empty() && reach < r_max) {
                const VertexId v = ex.stack.back();
                ex.stack.pop_back();
                for (const auto& inc : g.neighbors(v)) {
                    if (ex.stamp[inc.vertex] == mark || edge_label(seed, r, inc.edge) > p) continue;
                    ex.stamp[inc.vertex] = mark;
                    reach = std::max(reach, g.dist(inc.vertex));
                    ex.stack.push_back(inc.vertex);
                }
            }
            for (std::size_t i = 0; i < rs.size(); ++i)
                if (reach >= rs[i]) ++a.counts.c[i];
        },
        [](Acc& into, const Acc& from) { merge_counts(into.counts, from.counts); });
    std::vector<McEstimate> out;
    for (std::size_t i = 0; i < rs.size(); ++i)
        out.push_back(proportion_estimate(acc.counts.c[i], replicas, seed, radius));
    return out;
}

McEstimate est_sphere_connection(const GraphFamily& family, int radius, double p, int r, std::uint64_t replicas,
                                 std::uint64_t seed) {
    const int rs[1] = {r};
    return est_sphere_connection_multi(family, radius, p, rs, replicas, seed)[0];
}

// ---------------------------------------------------------------- critical point

std::string criterion_name(PcCriterion c) { return c == PcCriterion::BoxCrossing ? "box_crossing" : "root_to_sphere"; }

PcCriterion parse_criterion(const std::string& s) {
    if (s == "box_crossing") return PcCriterion::BoxCrossing;
    if (s == "root_to_sphere") return PcCriterion::RootToSphere;
    throw ParseError("unknown criterion: " + s);
}

struct CrossingSampler::Impl {
    PcCriterion criterion;
    int L = 0;
    // box crossing: the lattice restricted to a square, with left/right contact flags
    std::size_t n = 0;
    std::vector<Edge> edges;
    std::vector<std::uint8_t> side;  // bit 0 left, bit 1 right
    // root to sphere
    PatchPtr patch;

    double box_sample(std::uint64_t seed, std::uint64_t replica) const;
    double invasion_sample(std::uint64_t seed, std::uint64_t replica) const;
};

namespace {

// Vertices of a planar lattice whose embedding lies in the square [-L/2, L/2)^2, found by BFS
// from the root through in-square vertices. A vertex touches the left (right) side when one of
// its lattice neighbours lies beyond x = -L/2 (x >= L/2).
void build_box(const GraphFamily& family, int L, std::size_t& n, std::vector<Edge>& edges,
               std::vector<std::uint8_t>& side) {
    const double half = L / 2.0;
    auto inside = [&](const Point2& q) { return q.x >= -half && q.x < half && q.y >= -half && q.y < half; };
    std::unordered_map<VertexKey, VertexId, VertexKeyHash> index;
    std::vector<VertexKey> keys;
    std::vector<VertexKey> nb;
    const VertexKey root = family.root();
    index.emplace(root, 0);
    keys.push_back(root);
    for (std::size_t head = 0; head < keys.size(); ++head) {
        const VertexKey v = keys[head];
        family.neighbors(v, nb);
        std::uint8_t s = 0;
        for (const auto& w : nb) {
            const Point2 q = *family.embed(w);
            if (inside(q)) {
                auto [it, fresh] = index.emplace(w, static_cast<VertexId>(keys.size()));
                if (fresh) keys.push_back(w);
                if (head < it->second) edges.push_back({static_cast<VertexId>(head), it->second});
            } else if (q.x < -half) {
                s |= 1;
            } else if (q.x >= half) {
                s |= 2;
            }
        }
        side.push_back(s);
    }
    // edges to vertices discovered later were recorded from the earlier endpoint only
    n = keys.size();
}

}  // namespace

double CrossingSampler::Impl::box_sample(std::uint64_t seed, std::uint64_t replica) const {
    const std::size_t E = edges.size();
    thread_local std::vector<double> label;
    thread_local std::vector<std::uint32_t> bucket_start, order;
    label.resize(E);
    for (std::size_t e = 0; e < E; ++e) label[e] = edge_label(seed, replica, static_cast<EdgeId>(e));
    // counting sort into E buckets, then sort inside buckets
    const std::size_t B = std::max<std::size_t>(E, 1);
    bucket_start.assign(B + 1, 0);
    for (std::size_t e = 0; e < E; ++e) ++bucket_start[static_cast<std::size_t>(label[e] * B) + 1];
    for (std::size_t b = 0; b < B; ++b) bucket_start[b + 1] += bucket_start[b];
    order.resize(E);
    {
        thread_local std::vector<std::uint32_t> fill;
        fill.assign(bucket_start.begin(), bucket_start.end() - 1);
        for (std::size_t e = 0; e < E; ++e) order[fill[static_cast<std::size_t>(label[e] * B)]++] = static_cast<std::uint32_t>(e);
    }
    UnionFind uf(n + 2);
    const auto left = static_cast<std::uint32_t>(n), right = static_cast<std::uint32_t>(n + 1);
    for (std::size_t v = 0; v < n; ++v) {
        if (side[v] & 1) uf.unite(static_cast<std::uint32_t>(v), left);
        if (side[v] & 2) uf.unite(static_cast<std::uint32_t>(v), right);
    }
    if (uf.same(left, right)) return 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        const auto first = order.begin() + bucket_start[b], last = order.begin() + bucket_start[b + 1];
        if (last - first > 1) std::sort(first, last, [&](std::uint32_t a, std::uint32_t c) { return label[a] < label[c]; });
        for (auto it = first; it != last; ++it) {
            uf.unite(edges[*it].u, edges[*it].v);
            if (uf.same(left, right)) return label[*it];
        }
    }
    return 1.0;
}

double CrossingSampler::Impl::invasion_sample(std::uint64_t seed, std::uint64_t replica) const {
    const GraphPatch& g = *patch;
    if (L == 0) return 0.0;
    thread_local std::vector<std::uint8_t> invaded;
    invaded.assign(g.num_vertices(), 0);
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    double running = 0;
    auto invade = [&](VertexId v) {
        invaded[v] = 1;
        for (const auto& inc : g.neighbors(v))
            if (!invaded[inc.vertex]) heap.emplace(edge_label(seed, replica, inc.edge), inc.vertex);
    };
    invade(g.root());
    while (!heap.empty()) {
        const auto [lab, v] = heap.top();
        heap.pop();
        if (invaded[v]) continue;
        running = std::max(running, lab);
        if (g.dist(v) >= L) return running;
        invade(v);
    }
    return 1.0;
}

CrossingSampler::CrossingSampler(const GraphFamily& family, int L, PcCriterion criterion)
    : impl_(std::make_unique<Impl>()) {
    if (L < 1) throw ArgumentError("scale L must be positive");
    impl_->criterion = criterion;
    impl_->L = L;
    if (criterion == PcCriterion::BoxCrossing) {
        if (!family.planar()) throw CriterionError("box crossing needs a planar family, got " + family.name());
        build_box(family, L, impl_->n, impl_->edges, impl_->side);
    } else {
        if (family.finite()) throw CriterionError("root-to-sphere needs an infinite family");
        impl_->patch = cached_patch(family, L);
        if (impl_->patch->radius() < L || impl_->patch->sphere(L).empty())
            throw CriterionError("sphere S_L is empty for " + family.name());
    }
}

CrossingSampler::~CrossingSampler() = default;
CrossingSampler::CrossingSampler(CrossingSampler&&) noexcept = default;

double CrossingSampler::sample(std::uint64_t seed, std::uint64_t replica) const {
    return impl_->criterion == PcCriterion::BoxCrossing ? impl_->box_sample(seed, replica)
                                                        : impl_->invasion_sample(seed, replica);
}

std::size_t CrossingSampler::num_vertices() const {
    return impl_->criterion == PcCriterion::BoxCrossing ? impl_->n : impl_->patch->num_vertices();
}
std::size_t CrossingSampler::num_edges() const {
    return impl_->criterion == PcCriterion::BoxCrossing ? impl_->edges.size() : impl_->patch->num_edges();
}

PcEstimate est_pc(const GraphFamily& family, int L, PcCriterion criterion, double tolerance, double confidence,
                  std::uint64_t seed, const PcOptions& options) {
    if (!(tolerance > 0)) throw ArgumentError("tolerance must be positive");
    const CrossingSampler sampler(family, L, criterion);
    PcEstimate out;
    out.family = family.name();
    out.L = L;
    out.criterion = criterion;
    out.threshold = std::isnan(options.threshold) ? (criterion == PcCriterion::BoxCrossing ? 0.5 : 0.05)
                                                  : options.threshold;
    out.seed = seed;
    out.confidence = confidence;
    if (!(out.threshold > 0 && out.threshold < 1)) throw DomainError("crossing threshold must lie in (0,1)");

    std::vector<double> samples;
    auto grow = [&](std::uint64_t target) {
        const std::uint64_t have = samples.size();
        if (target <= have) return;
        struct Acc {
            std::vector<std::pair<std::uint64_t, double>> v;
        };
        auto acc = replicate(
            have, target, [] { return Acc{}; }, [&](Acc& a, std::uint64_t r) { a.v.emplace_back(r, sampler.sample(seed, r)); },
            [](Acc& into, Acc& from) { into.v.insert(into.v.end(), from.v.begin(), from.v.end()); });
        for (const auto& [r, s] : acc.v) samples.push_back(s);
        std::sort(samples.begin(), samples.end());
    };
    grow(std::max<std::uint64_t>(options.min_replicas, 1));

    auto resolve = [&](double p) {
        while (true) {
            const auto below = static_cast<std::uint64_t>(std::upper_bound(samples.begin(), samples.end(), p) - samples.begin());
            PcProbe probe{p, proportion_estimate(below, samples.size(), seed, L, confidence), 0};
            probe.crossing.patch_radius = L;
            if (probe.crossing.ci_hi < out.threshold) probe.verdict = -1;
            else if (probe.crossing.ci_lo > out.threshold) probe.verdict = 1;
            if (probe.verdict != 0 || probe.crossing.ci_halfwidth <= options.ci_target ||
                samples.size() >= options.replica_cap) {
                out.probes.push_back(probe);
                return probe.verdict;
            }
            grow(std::min<std::uint64_t>(2 * samples.size(), options.replica_cap));
        }
    };

    double lo = 0, hi = 1;
    while (hi - lo > tolerance) {
        const double mid = (lo + hi) / 2;
        const int v = resolve(mid);
        if (v < 0) {
            lo = mid;
        } else if (v > 0) {
            hi = mid;
        } else {
            bool moved = false;
            if (resolve((lo + mid) / 2) < 0) {
                lo = (lo + mid) / 2;
                moved = true;
            }
            if (resolve((mid + hi) / 2) > 0) {
                hi = (mid + hi) / 2;
                moved = true;
            }
            if (!moved) break;
        }
    }
    out.p_lo = lo;
    out.p_hi = hi;
    out.resolved = hi - lo <= tolerance;
    out.replicas = samples.size();
    const auto N = samples.size();
    const auto k = static_cast<std::size_t>(std::ceil(out.threshold * static_cast<double>(N)));
    const double quantile = samples[std::min(N - 1, k == 0 ? 0 : k - 1)];
    out.p_hat = std::clamp(quantile, lo, hi);
    const double spread = z_value(confidence) * std::sqrt(static_cast<double>(N) * out.threshold * (1 - out.threshold));
    const double centre = out.threshold * static_cast<double>(N);
    const auto lo_rank = static_cast<std::int64_t>(std::floor(centre - spread)) - 1;
    const auto hi_rank = static_cast<std::int64_t>(std::ceil(centre + spread));
    out.p_hat_lo = lo_rank < 0 ? 0.0 : samples[static_cast<std::size_t>(lo_rank)];
    out.p_hat_hi = hi_rank >= static_cast<std::int64_t>(N) ? 1.0 : samples[static_cast<std::size_t>(hi_rank)];
    return out;
}

// ---------------------------------------------------------------- burn-in

int burnin_b(const GraphFamily& family, int radius, std::int64_t m, double p, std::uint64_t replicas,
             std::uint64_t seed) {
    if (m < 2) throw ArgumentError("burn-in scale m must be at least 2");
    const auto outer = static_cast<int>(floor_cbrt(m));
    if (outer > radius) throw OutOfPatchError("m^{1/3} exceeds patch radius");
    const int b_max = outer / 8;
    if (b_max < 1) return 0;
    std::vector<int> inner;
    for (int b = 1; b <= b_max; ++b) inner.push_back(4 * b);
    const auto est = est_piv_multi(family, p, inner, outer, replicas, seed);
    const double limit = 1.0 / std::log(static_cast<double>(m));
    for (int b = b_max; b >= 1; --b)
        if (est[b - 1].ci_hi <= limit) return b;
    return 0;
}

double burnin_from_b(const GraphFamily& family, const std::vector<int>& scales,
                     const std::map<std::int64_t, int>& b_values) {
    if (scales.empty()) return 0.0;
    double best = 0;
    for (int m : scales) {
        auto it = b_values.find(m);
        if (it == b_values.end()) throw ArgumentError("missing b(m) for a scale in range");
        if (it->second <= 1) return std::numeric_limits<double>::infinity();
        const double lm = std::log(static_cast<double>(m));
        const double denom = std::min(lm, std::log(static_cast<double>(growth_of(family, it->second))));
        // log log m < 0 for m < e; the term then contributes nothing
        const double ratio = std::max(0.0, std::log(lm)) / denom;
        best = std::max(best, std::pow(ratio, 0.25));
    }
    return best;
}

BurninResult burnin_total(const GraphFamily& family, int radius, std::int64_t n, double p, double D,
                          std::uint64_t replicas, std::uint64_t seed) {
    if (n < 16) throw DomainError("burn-in needs n >= 16");
    BurninResult out;
    const auto lg = low_growth_scales([&](int k) { return growth_of(family, k); }, D, static_cast<int>(n));
    const double lower = std::sqrt(std::log(static_cast<double>(n)));
    for (int m : lg)
        if (m >= lower) out.scales.push_back(m);
    for (int m : out.scales) {
        const int b = burnin_b(family, radius, m, p, replicas, derive_seed(seed, static_cast<std::uint64_t>(m)));
        out.b_values[m] = b;
        if (b <= 1) {
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
    }
    out.value = burnin_from_b(family, out.scales, out.b_values);
    return out;
}

// ---------------------------------------------------------------- analytic comparisons

double path_counting_bound(double p, int d, int dist) {
    if (d < 2) throw DomainError("path counting bound needs degree at least 2");
    if (dist < 0) throw ArgumentError("distance must be nonnegative");
    const double branching = p * (d - 1);
    if (!(p >= 0) || branching >= 1.0) throw DomainError("path counting bound needs p < 1/(d-1)");
    return (static_cast<double>(d) / (d - 1)) / (1.0 - branching) * std::pow(branching, dist);
}

CerfResult cerf_check(const GraphFamily& family, int radius, double p, int r, int m, int n, std::uint64_t replicas,
                      std::uint64_t seed) {
    if (!(1 < r && r <= m && 2 * m <= n)) throw ArgumentError("Cerf check needs 1 < r <= m <= n/2");
    if (n > radius) throw OutOfPatchError("Cerf scale exceeds patch radius");
    CerfResult out;
    const int inner[1] = {r};
    out.lhs = est_piv_multi(family, p, inner, n, replicas, derive_seed(seed, 1))[0];
    const int one[1] = {1};
    out.piv_half = est_piv_multi(family, p, one, n / 2, replicas, derive_seed(seed, 2))[0];
    const PatchPtr ball = cached_patch(family, m);
    const auto sr = ball->sphere(r);
    out.min_two_point = est_two_point(ball, p, sr, sr, {}, replicas, derive_seed(seed, 3));
    const double factor = static_cast<double>(sr.size()) * static_cast<double>(sr.size()) *
                          static_cast<double>(growth_of(family, m));
    out.rhs = out.min_two_point.mean > 0 ? out.piv_half.mean * factor / out.min_two_point.mean
                                         : std::numeric_limits<double>::infinity();
    out.holds = out.lhs.ci_lo <= out.rhs;
    return out;
}

}  // namespace perclab
