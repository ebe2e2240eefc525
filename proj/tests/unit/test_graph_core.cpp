#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "perclab/errors.hpp"
#include "perclab/family.hpp"
#include "perclab/geometry.hpp"
#include "perclab/patch.hpp"
#include "perclab/rng.hpp"

using namespace perclab;

namespace {

const char* const kFamilies[] = {"HyperCubic(2)", "HyperCubic(3)", "Slab(3,1,4)", "Cylinder(5)",  "Triangular",
                                 "Hexagonal",     "Kagome312",     "RegularTree(3)", "Heisenberg3", "MacroGrid(2)"};

// 3-12 lattice built from geometry alone: honeycomb sites each carry a small triangle, and two
// vertices are adjacent exactly when they sit at unit distance.
std::uint64_t kagome_ball_by_geometry(int R) {
    const double s3 = std::sqrt(3.0);
    const double L = 1 + 2 / s3;  // honeycomb bond so that every 3-12 edge has length 1
    const double t = 1 / s3;      // triangle vertex offset from its honeycomb site
    struct P {
        double x, y;
    };
    std::vector<P> pts;
    const int W = 2 * R + 4;
    for (int i = -W; i <= W; ++i)
        for (int j = -W; j <= W; ++j) {
            const double ax = L * (s3 * i + s3 / 2 * j), ay = L * 1.5 * j;
            const double dirs_a[3][2] = {{0, 1}, {-s3 / 2, -0.5}, {s3 / 2, -0.5}};
            for (auto& d : dirs_a) pts.push_back({ax + t * d[0], ay + t * d[1]});
            const double bx = ax, by = ay + L;
            for (auto& d : dirs_a) pts.push_back({bx - t * d[0], by - t * d[1]});
        }
    // bucket by unit cells to find unit-distance pairs
    std::map<std::pair<long, long>, std::vector<std::size_t>> cells;
    for (std::size_t k = 0; k < pts.size(); ++k)
        cells[{std::lround(std::floor(pts[k].x)), std::lround(std::floor(pts[k].y))}].push_back(k);
    std::vector<std::vector<std::size_t>> adj(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const long cx = std::lround(std::floor(pts[k].x)), cy = std::lround(std::floor(pts[k].y));
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy) {
                auto it = cells.find({cx + dx, cy + dy});
                if (it == cells.end()) continue;
                for (std::size_t o : it->second)
                    if (o != k && std::abs(std::hypot(pts[o].x - pts[k].x, pts[o].y - pts[k].y) - 1) < 1e-9)
                        adj[k].push_back(o);
            }
    }
    // start at the triangle vertex of the honeycomb site nearest the origin
    std::size_t start = 0;
    double best = 1e9;
    for (std::size_t k = 0; k < pts.size(); ++k)
        if (std::hypot(pts[k].x, pts[k].y) < best) best = std::hypot(pts[k].x, pts[k].y), start = k;
    std::vector<int> d(pts.size(), -1);
    std::vector<std::size_t> q{start};
    d[start] = 0;
    for (std::size_t h = 0; h < q.size(); ++h)
        for (std::size_t w : adj[q[h]])
            if (d[w] < 0) d[w] = d[q[h]] + 1, q.push_back(w);
    std::uint64_t count = 0;
    for (int x : d)
        if (x >= 0 && x <= R) ++count;
    return count;
}

using Mat = std::array<std::array<long, 3>, 3>;
Mat mul(const Mat& a, const Mat& b) {
    Mat c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

// Ball size in the integer Heisenberg group under {x, x^-1, y, y^-1} by matrix products.
std::uint64_t heisenberg_ball_by_matrices(int R) {
    const Mat id{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    const Mat gens[4] = {{{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}}},
                         {{{1, -1, 0}, {0, 1, 0}, {0, 0, 1}}},
                         {{{1, 0, 0}, {0, 1, 1}, {0, 0, 1}}},
                         {{{1, 0, 0}, {0, 1, -1}, {0, 0, 1}}}};
    std::map<Mat, int> seen{{id, 0}};
    std::vector<Mat> frontier{id};
    for (int r = 1; r <= R; ++r) {
        std::vector<Mat> next;
        for (const Mat& m : frontier)
            for (const Mat& g : gens) {
                const Mat w = mul(m, g);
                if (seen.emplace(w, r).second) next.push_back(w);
            }
        frontier = std::move(next);
    }
    return seen.size();
}

}  // namespace

TEST_CASE("build_patch: small balls") {
    const auto z2 = build_patch(GraphFamily::parse("HyperCubic(2)"), 1);
    CHECK(z2->num_vertices() == 5);
    CHECK(z2->num_edges() == 4);
    CHECK(build_patch(GraphFamily::parse("RegularTree(3)"), 2)->num_vertices() == 10);
}

TEST_CASE("build_patch: 3-12 ball matches a geometric construction") {
    const auto patch = build_patch(GraphFamily::kagome312(), 6);
    CHECK(patch->num_vertices() == kagome_ball_by_geometry(6));
    for (int r = 0; r <= 6; ++r) CHECK(patch->growth(r) == kagome_ball_by_geometry(r));
}

TEST_CASE("build_patch: invalid parameters") {
    CHECK_THROWS_AS(GraphFamily::parse("RegularTree(2)"), ParameterError);
    CHECK_THROWS_AS(GraphFamily::parse("Slab(2,3,4)"), ParameterError);
    CHECK_THROWS_AS(GraphFamily::parse("Cylinder(0)"), ParameterError);
    CHECK_THROWS_AS(GraphFamily::parse("Nonsense"), ParameterError);
    CHECK_THROWS_AS(build_patch(GraphFamily::hypercubic(2), -1), ArgumentError);
}

TEST_CASE("family names round-trip through parse") {
    for (const char* name : kFamilies) CHECK(GraphFamily::parse(name).name() == name);
}

TEST_CASE("growth: closed forms and Heisenberg recount") {
    const auto z2 = build_patch(GraphFamily::hypercubic(2), 6);
    CHECK(z2->growth(2) == 13);
    for (int n = 0; n <= 6; ++n) CHECK(z2->growth(n) == static_cast<std::uint64_t>(2 * n * n + 2 * n + 1));
    CHECK_THROWS_AS(z2->growth(7), OutOfPatchError);

    const auto tree = build_patch(GraphFamily::regular_tree(3), 9);
    for (int n = 0; n <= 9; ++n) CHECK(tree->growth(n) == (3ull << n) - 2);
    for (int n = 0; n <= 30; ++n) CHECK(growth_of(GraphFamily::regular_tree(3), n) == (3ull << n) - 2);

    const auto heis = build_patch(GraphFamily::heisenberg3(), 6);
    for (int n = 0; n <= 6; ++n) CHECK(heis->growth(n) == heisenberg_ball_by_matrices(n));
}

TEST_CASE("patch invariants on every family") {
    for (const char* name : kFamilies) {
        CAPTURE(name);
        const GraphFamily fam = GraphFamily::parse(name);
        const int R = fam.kind() == FamilyKind::MacroGrid ? 3 : 5;
        const auto patch = build_patch(fam, R);
        const auto d = oracle::distances(*patch, patch->root());
        for (VertexId v = 0; v < patch->num_vertices(); ++v) {
            CHECK(patch->dist(v) == d[v]);
            if (patch->dist(v) < R) CHECK(patch->patch_degree(v) == static_cast<std::size_t>(fam.degree()));
            if (v > 0) CHECK(patch->dist(v - 1) <= patch->dist(v));  // BFS order
        }
        std::set<std::pair<VertexId, VertexId>> seen;
        for (const auto& e : patch->edges()) {
            CHECK(std::abs(patch->dist(e.u) - patch->dist(e.v)) <= 1);
            CHECK(e.u != e.v);
            CHECK(seen.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second);
        }
        for (VertexId v = 0; v < patch->num_vertices(); ++v)
            for (const auto& inc : patch->neighbors(v)) {
                bool back = false;
                for (const auto& r : patch->neighbors(inc.vertex)) back |= r.vertex == v && r.edge == inc.edge;
                CHECK(back);
            }
        if (!fam.finite())
            for (int n = 1; n <= R; ++n) CHECK(patch->growth(n) > patch->growth(n - 1));
        // determinism: a second build is identical
        CHECK(patch_to_string(*build_patch(fam, R)) == patch_to_string(*patch));
    }
}

TEST_CASE("patch text format round-trips") {
    const auto patch = build_patch(GraphFamily::kagome312(), 4);
    std::stringstream ss;
    write_patch(ss, *patch);
    const GraphPatch back = read_patch(ss);
    CHECK(patch_to_string(back) == patch_to_string(*patch));
    CHECK(back.num_edges() == patch->num_edges());
    CHECK(back.degree() == patch->degree());
}

TEST_CASE("exposed_sphere: fully exposed lattices and trees") {
    const auto z2 = build_patch(GraphFamily::hypercubic(2), 4);
    CHECK(exposed_sphere(*z2, 1, 4).vertices == z2->sphere(1));
    const auto tree = build_patch(GraphFamily::regular_tree(3), 5);
    CHECK(exposed_sphere(*tree, 2, 5).vertices == tree->sphere(2));
    const auto z3 = build_patch(GraphFamily::hypercubic(3), 6);
    for (int r = 1; r <= 4; ++r) CHECK(exposed_sphere(*z3, r, 6).vertices == z3->sphere(r));
    CHECK_THROWS_AS(exposed_sphere(*z2, 2, 2), ArgumentError);
}

namespace {
// Exposed sphere by depth-first search for a self-avoiding escape path; a vertex is escaping if
// some neighbour outside B_r reaches S_R without re-entering B_r.
std::vector<VertexId> exposed_by_search(const GraphPatch& patch, int r, int R) {
    std::vector<VertexId> out;
    for (VertexId u : patch.sphere(r)) {
        std::vector<std::uint8_t> used(patch.num_vertices(), 0);
        std::function<bool(VertexId)> dfs = [&](VertexId v) {
            if (patch.dist(v) == R) return true;
            used[v] = 1;
            for (const auto& inc : patch.neighbors(v))
                if (!used[inc.vertex] && patch.dist(inc.vertex) > r && dfs(inc.vertex)) return true;
            return false;
        };
        used[u] = 1;
        bool ok = false;
        for (const auto& inc : patch.neighbors(u))
            if (!ok && patch.dist(inc.vertex) > r && !used[inc.vertex]) ok = dfs(inc.vertex);
        if (ok) out.push_back(u);
    }
    return out;
}
}  // namespace

TEST_CASE("exposed_sphere: 3-12 lattice stabilises and matches path search") {
    const auto patch = build_patch(GraphFamily::kagome312(), 13);
    const ExposedSphere at13 = exposed_sphere(*patch, 5, 13);
    const ExposedSphere at12 = exposed_sphere(*patch, 5, 12);
    CHECK(at13.vertices == at12.vertices);
    CHECK(at13.stabilized);
    CHECK(at13.vertices == exposed_by_search(*patch, 5, 13));
    CHECK(at12.vertices == exposed_by_search(*patch, 5, 12));
}

TEST_CASE("exposed_sphere: nonincreasing in the escape radius") {
    for (const char* name : {"Kagome312", "Hexagonal", "Triangular", "Heisenberg3", "MacroGrid(2)"}) {
        CAPTURE(name);
        const auto patch = build_patch(GraphFamily::parse(name), 8);
        for (int r = 1; r <= 3; ++r) {
            std::vector<VertexId> prev = exposed_sphere(*patch, r, r + 1).vertices;
            for (int R = r + 2; R <= 8; ++R) {
                const auto cur = exposed_sphere(*patch, r, R).vertices;
                CHECK(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
                prev = cur;
            }
        }
    }
}

namespace {
// Enumerates every simple path that starts in S_r and stops at its first visit to S_{2r+1}; any
// longer crossing contains such a path as a prefix of one of its suffixes. Returns the count of
// paths that miss the exposed sphere together with the total.
std::pair<std::uint64_t, std::uint64_t> enumerate_crossings(const GraphPatch& patch, int r) {
    const auto exposed = exposed_sphere(patch, r, patch.radius()).vertices;
    std::vector<std::uint8_t> is_exposed(patch.num_vertices(), 0);
    for (VertexId v : exposed) is_exposed[v] = 1;
    std::uint64_t misses = 0, total = 0;
    std::vector<std::uint8_t> on_path(patch.num_vertices(), 0);
    Path path;
    std::function<void(VertexId)> extend = [&](VertexId v) {
        path.push_back(v);
        on_path[v] = 1;
        if (patch.dist(v) == 2 * r + 1) {
            ++total;
            bool hit = false;
            for (VertexId w : path) hit |= is_exposed[w] != 0;
            if (!hit) ++misses;
            if ((total & 1023) == 1) CHECK(crossing_hits_exposed(patch, r, path) == hit);
        } else {
            for (const auto& inc : patch.neighbors(v))
                if (!on_path[inc.vertex]) extend(inc.vertex);
        }
        on_path[v] = 0;
        path.pop_back();
    };
    for (VertexId s : patch.sphere(r)) extend(s);
    return {misses, total};
}
}  // namespace

TEST_CASE("crossings of the annulus always meet the exposed sphere") {
    for (const char* name : {"HyperCubic(2)", "Triangular", "Hexagonal", "Kagome312", "RegularTree(3)", "Cylinder(3)"}) {
        CAPTURE(name);
        const auto patch = build_patch(GraphFamily::parse(name), 5);
        const auto [misses, total] = enumerate_crossings(*patch, 1);
        CHECK(total > 0);
        CHECK(misses == 0);
        CHECK(all_crossings_hit_exposed(*patch, 1));
    }
    // a larger annulus on the sparse lattices
    for (const char* name : {"Hexagonal", "Kagome312", "RegularTree(3)"}) {
        CAPTURE(name);
        const auto patch = build_patch(GraphFamily::parse(name), 6);
        const auto [misses, total] = enumerate_crossings(*patch, 2);
        CHECK(total > 0);
        CHECK(misses == 0);
    }
}

TEST_CASE("crossing_hits_exposed: geodesic rays and argument checks") {
    const auto z2 = build_patch(GraphFamily::hypercubic(2), 8);
    const auto far = *z2->find({5, 0, 0, 0, 0, 0});
    const Path ray = geodesic(*z2, *z2->find({2, 0, 0, 0, 0, 0}), far);
    CHECK(crossing_hits_exposed(*z2, 2, ray));
    BfsWorkspace ws(*z2);
    for (VertexId s : z2->sphere(2)) {
        // BFS path from s to the nearest vertex of S_5
        ws.run_from(s);
        VertexId target = 0;
        int best = 1 << 30;
        for (VertexId t : z2->sphere(5))
            if (ws.distance(t) < best) best = ws.distance(t), target = t;
        CHECK(crossing_hits_exposed(*z2, 2, geodesic(*z2, s, target)));
    }
    CHECK_THROWS_AS(crossing_hits_exposed(*z2, 2, Path{z2->root()}), ArgumentError);
}

TEST_CASE("boundary_ratio_scale: direct count on Z^2") {
    const auto z2 = build_patch(GraphFamily::hypercubic(2), 8);
    // |dB_m| on Z^2 counted from coordinates: edges with one end at |x|+|y| = m and the other at m+1
    auto boundary = [](int m) {
        std::uint64_t c = 0;
        for (int x = -m; x <= m; ++x)
            for (int y = -m; y <= m; ++y) {
                if (std::abs(x) + std::abs(y) > m) continue;
                const int nb[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
                for (auto& w : nb) c += std::abs(w[0]) + std::abs(w[1]) > m;
            }
        return c;
    };
    int best_m = 0;
    double best = 1e9;
    for (int m = 4; m <= 7; ++m) {
        const double ratio = static_cast<double>(boundary(m)) / static_cast<double>(2 * m * m + 2 * m + 1);
        if (ratio < best) best = ratio, best_m = m;
    }
    const BoundaryScale s = boundary_ratio_scale(*z2, 4);
    CHECK(s.m == best_m);
    CHECK(s.ratio == doctest::Approx(best).epsilon(1e-12));
    CHECK(s.boundary_edges == boundary(best_m));
    REQUIRE(s.bound.has_value());
    CHECK(s.ratio <= *s.bound);

    const BoundaryScale one = boundary_ratio_scale(*z2, 1);
    CHECK(one.m == 1);
    CHECK(one.ratio == doctest::Approx(12.0 / 5.0));

    const auto tree = build_patch(GraphFamily::regular_tree(3), 5);
    CHECK(boundary_ratio_scale(*tree, 2).ratio >= 1.0);
    CHECK_THROWS_AS(boundary_ratio_scale(*z2, 5), OutOfPatchError);
}

TEST_CASE("low_growth_scales: pointwise evaluation") {
    auto member = [](const std::function<double(int)>& log_gr, double D, int n) {
        const int lo = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-12));
        for (int m = std::max(lo, 1); m <= n; ++m)
            if (log_gr(m) > std::pow(std::log(static_cast<double>(m)), D)) return false;
        return true;
    };
    const auto z2 = build_patch(GraphFamily::hypercubic(2), 100);
    auto z2_log = [](int m) { return std::log(2.0 * m * m + 2.0 * m + 1); };
    const auto got = low_growth_scales(*z2, 2.0, 64);
    std::vector<int> want;
    for (int n = 1; n <= 64; ++n)
        if (member(z2_log, 2.0, n)) want.push_back(n);
    CHECK(got == want);

    auto tree_log = [](int m) { return std::log(3.0 * std::pow(2.0, m) - 2); };
    const auto tree_got =
        low_growth_scales([](int m) { return growth_of(GraphFamily::regular_tree(3), m); }, 2.0, 64);
    std::vector<int> tree_want;
    for (int n = 1; n <= 64; ++n)
        if (member(tree_log, 2.0, n)) tree_want.push_back(n);
    CHECK(tree_got == tree_want);

    // With D = 20 every scale whose cube-root floor is at least 3 qualifies; below that the
    // inner scale m = 1 or 2 has (log m)^20 < log Gr(m).
    const auto big = low_growth_scales(*z2, 20.0, 100);
    std::vector<int> z2_want20;
    for (int n = 1; n <= 100; ++n)
        if (member(z2_log, 20.0, n)) z2_want20.push_back(n);
    CHECK(big == z2_want20);
    for (int n = 27; n <= 100; ++n) CHECK(std::find(big.begin(), big.end(), n) != big.end());
}

TEST_CASE("integer cube roots") {
    for (std::int64_t n = 0; n <= 2000; ++n) {
        const auto c = floor_cbrt(n), u = ceil_cbrt(n);
        CHECK(c * c * c <= n);
        CHECK((c + 1) * (c + 1) * (c + 1) > n);
        CHECK(u * u * u >= n);
        if (u > 0) CHECK((u - 1) * (u - 1) * (u - 1) < n);
    }
}

TEST_CASE("geodesic: length equals BFS distance and is deterministic") {
    const auto z2 = build_patch(GraphFamily::hypercubic(2), 6);
    CHECK(geodesic(*z2, 3, 3) == Path{3});
    CHECK(geodesic(*z2, z2->root(), *z2->find({3, 0, 0, 0, 0, 0})).size() == 4);
    for (const char* name : {"Kagome312", "Heisenberg3", "Triangular"}) {
        const auto patch = build_patch(GraphFamily::parse(name), 6);
        CounterStream rng(99, Stream::Misc, 0);
        for (int i = 0; i < 50; ++i) {
            const auto u = static_cast<VertexId>(rng.below(patch->num_vertices()));
            const auto v = static_cast<VertexId>(rng.below(patch->num_vertices()));
            const Path g = geodesic(*patch, u, v);
            CHECK(static_cast<int>(g.size()) - 1 == oracle::distances(*patch, u)[v]);
            CHECK(g.front() == u);
            CHECK(g.back() == v);
            validate_path(*patch, g);
            CHECK(geodesic(*patch, u, v) == g);
        }
    }
}

TEST_CASE("tube: union of balls around the path") {
    const auto z2 = build_patch(GraphFamily::hypercubic(2), 10);
    const VertexId o = z2->root();
    const TubeSpec single = tube(*z2, Path{o}, 3);
    CHECK(single.vertex_set == z2->ball(3));
    CHECK(single.length() == 0);

    const Path g = geodesic(*z2, *z2->find({-3, 0, 0, 0, 0, 0}), *z2->find({3, 0, 0, 0, 0, 0}));
    REQUIRE(g.size() == 7);
    const std::set<VertexId> on_path(g.begin(), g.end());
    CHECK(tube(*z2, g, 0).vertex_set == std::vector<VertexId>(on_path.begin(), on_path.end()));
    std::set<VertexId> want;
    for (VertexId c : g) {
        const auto d = oracle::distances(*z2, c);
        for (VertexId v = 0; v < z2->num_vertices(); ++v)
            if (d[v] <= 2) want.insert(v);
    }
    const TubeSpec t = tube(*z2, g, 2);
    CHECK(t.vertex_set == std::vector<VertexId>(want.begin(), want.end()));
    CHECK(t.length() == 6);
    CHECK_THROWS_AS(validate_path(*z2, Path{o, *z2->find({2, 0, 0, 0, 0, 0})}), ArgumentError);
}
