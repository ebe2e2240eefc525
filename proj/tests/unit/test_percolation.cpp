#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "perclab/errors.hpp"
#include "perclab/estimators.hpp"
#include "perclab/percolation.hpp"

using namespace perclab;

namespace {

// Distinct components of the open subgraph restricted to B_n meeting both sets of vertices.
int crossing_components(const GraphPatch& patch, const OpenMask& open, int n, int m_lo, int m_hi) {
    std::vector<std::uint8_t> inside(patch.num_vertices());
    for (VertexId v = 0; v < inside.size(); ++v) inside[v] = patch.dist(v) <= n;
    const auto label = oracle::flood_components(patch, open, inside);
    std::set<int> inner, outer;
    for (VertexId v = 0; v < inside.size(); ++v) {
        if (patch.dist(v) >= m_lo && patch.dist(v) <= m_hi) inner.insert(label[v]);
        if (patch.dist(v) == n) outer.insert(label[v]);
    }
    int both = 0;
    for (int c : inner) both += outer.count(c) ? 1 : 0;
    return both;
}
}  // namespace

TEST_CASE("sprinkle and delta: examples and identities") {
    CHECK(sprinkle(0.5, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sprinkle(0.5, std::log(2.0)) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(delta(0.3, 0.3) == 0);
    CHECK(delta(0.5, 0.75) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CounterStream rng(1, Stream::Misc, 0);
    // The composed form passes an intermediate probability through a double; once that value is
    // within ~1e-4 of 1 its complement carries too few digits for a 1e-12 match, whatever the
    // implementation. The semigroup law is therefore sampled on p in [0.01, 0.9], |lambda|, |mu| <= 1,
    // and sprinkle itself is compared against a long double reference on the wide range.
    for (int i = 0; i < 2000; ++i) {
        const double p = 0.001 + 0.998 * rng.uniform(), q = 0.001 + 0.998 * rng.uniform();
        const double lam = 4 * rng.uniform() - 2, mu = 4 * rng.uniform() - 2;
        const long double ref = -std::expm1(std::exp(static_cast<long double>(lam)) * std::log1p(-static_cast<long double>(p)));
        CHECK(std::abs(sprinkle(p, lam) - static_cast<double>(ref)) <= 4e-16 * std::max(1.0, static_cast<double>(ref)));
        const double ps = 0.01 + 0.89 * rng.uniform(), a = 2 * rng.uniform() - 1, b = 2 * rng.uniform() - 1;
        CHECK(std::abs(sprinkle(ps, a + b) - sprinkle(sprinkle(ps, a), b)) <= 1e-12);
        CHECK(delta(p, q) >= 0);
        CHECK(delta(p, q) == delta(q, p));
        CHECK(std::abs(sprinkle(std::min(p, q), delta(p, q)) - std::max(p, q)) <= 1e-12);
        CHECK(sprinkle(p, lam) < sprinkle(p, lam + 0.01));
    }
    CHECK_THROWS_AS(sprinkle(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(sprinkle(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(delta(0.5, 1.0), DomainError);
    CHECK_THROWS_AS(delta(-0.1, 0.5), DomainError);
}

TEST_CASE("sample_labels: determinism and uniformity") {
    const auto patch = cached_patch(GraphFamily::hypercubic(2), 240);
    REQUIRE(patch->num_edges() >= 100000);
    const EdgeLabels a = sample_labels(patch, 7), b = sample_labels(patch, 7), c = sample_labels(patch, 8);
    CHECK(a.labels == b.labels);
    CHECK(a.labels != c.labels);
    CHECK(a.generator_id == std::string("philox4x32-10"));
    double sum = 0;
    for (double x : a.labels) {
        CHECK_UNARY(x >= 0.0);
        CHECK_UNARY(x < 1.0);
        sum += x;
    }
    CHECK(std::abs(sum / static_cast<double>(a.labels.size()) - 0.5) <= 0.01);
    // regression value of the generator for seed 7, edge 0
    CHECK(edge_label(7, 0, 0) == a.labels[0]);
}

TEST_CASE("philox: known-answer vector") {
    // Random123 known-answer test for philox4x32-10 with counter and key all ones (0xffffffff).
    const Philox::Block out = Philox::generate(0xFFFFFFFFFFFFFFFFULL, {0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);
    const Philox::Block zero = Philox::generate(0, {0, 0, 0, 0});
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);
    const Philox::Block pi = Philox::generate(0x299f31d0a4093822ULL, {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
    CHECK(pi[0] == 0xd16cfe09u);
    CHECK(pi[1] == 0x94fdccebu);
    CHECK(pi[2] == 0x5001e420u);
    CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("clusters: extremes and flood-fill oracle") {
    const auto patch = cached_patch(GraphFamily::hypercubic(2), 3);
    const EdgeLabels labels = sample_labels(patch, 3);
    CHECK(clusters(labels, 0.0).num_clusters() == patch->num_vertices());
    CHECK(clusters(labels, 1.0).num_clusters() == 1);
    for (std::uint64_t rep = 0; rep < 300; ++rep) {
        const EdgeLabels l = sample_labels(patch, 11, rep);
        const double p = 0.2 + 0.6 * uniform(11, Stream::Misc, rep, 0);
        ClusterForest f = clusters(l, p);
        const auto label = oracle::flood_components(*patch, open_mask(l, p));
        std::size_t total = 0;
        std::set<std::uint32_t> roots;
        for (VertexId u = 0; u < patch->num_vertices(); ++u) {
            roots.insert(f.find(u));
            CHECK(f.find(f.find(u)) == f.find(u));
            for (VertexId v = u + 1; v < patch->num_vertices(); ++v) CHECK((f.same(u, v)) == (label[u] == label[v]));
        }
        for (auto r : roots) total += f.size(r);
        CHECK(total == patch->num_vertices());
        CHECK(roots.size() == f.num_clusters());
        // per-cluster flags against a rescan
        for (VertexId u = 0; u < patch->num_vertices(); ++u) {
            int lo = 1 << 30, hi = -1;
            bool touches = false;
            for (VertexId v = 0; v < patch->num_vertices(); ++v)
                if (label[v] == label[u]) {
                    lo = std::min(lo, patch->dist(v));
                    hi = std::max(hi, patch->dist(v));
                    touches |= patch->on_boundary(v);
                }
            CHECK(f.min_dist(u) == lo);
            CHECK(f.max_dist(u) == hi);
            CHECK(f.touches_boundary(u) == touches);
        }
    }
}

TEST_CASE("label sweep agrees with fresh clusters at every breakpoint") {
    const auto patch = cached_patch(GraphFamily::kagome312(), 4);
    const EdgeLabels labels = sample_labels(patch, 21);
    LabelSweep sweep(labels);
    const auto bps = sweep.breakpoints();
    CHECK(bps.size() == patch->num_edges());
    for (double p : bps) {
        sweep.advance_to(p);
        ClusterForest fresh = clusters(labels, p);
        CHECK(sweep.forest().num_clusters() == fresh.num_clusters());
        for (VertexId v = 0; v < patch->num_vertices(); ++v)
            CHECK(sweep.forest().same(v, 0) == fresh.same(v, 0));
    }
}

TEST_CASE("connected: trivial cases and exhaustive oracle") {
    const auto patch = cached_patch(GraphFamily::hypercubic(2), 2);  // 12 edges
    const EdgeLabels labels = sample_labels(patch, 5);
    const std::vector<VertexId> A{0, 1}, B{1, 7};
    CHECK(connected(labels, 0.0, A, B));
    CHECK_FALSE(connected(labels, 0.0, std::vector<VertexId>{0}, std::vector<VertexId>{8}));
    CHECK_THROWS_AS(connected(labels, 0.5, std::vector<VertexId>{}, B), ArgumentError);

    // every configuration of the 12 edges, several (A, B, Lambda) choices
    const auto s2 = patch->sphere(2);
    Region lambda(patch->num_vertices(), 1);
    lambda[1] = 0;
    const std::vector<VertexId> root{0}, far{s2.front()}, other{s2.back()};
    std::uint64_t mismatches = 0;
    OpenMask open(patch->num_edges());
    for (std::uint64_t mask = 0; mask < (1u << patch->num_edges()); ++mask) {
        for (std::size_t e = 0; e < open.size(); ++e) open[e] = (mask >> e) & 1;
        mismatches += connected(*patch, open, root, far) != oracle::flood_connected(*patch, open, root, far);
        mismatches += connected(*patch, open, far, other) != oracle::flood_connected(*patch, open, far, other);
        mismatches += connected(*patch, open, root, s2, lambda) != oracle::flood_connected(*patch, open, root, s2, lambda);
        const auto label = oracle::flood_components(*patch, open);
        bool b1 = false, b2 = false;
        for (VertexId v : s2) b1 |= label[v] == label[1], b2 |= label[v] == label[2];
        mismatches += wired_connected(*patch, open, 1, 2) != (label[1] == label[2] || (b1 && b2));
    }
    CHECK(mismatches == 0);
}

TEST_CASE("monotone coupling of increasing events") {
    const auto patch = cached_patch(GraphFamily::triangular(), 4);
    const auto s4 = patch->sphere(4);
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const EdgeLabels l = sample_labels(patch, 9, rep);
        bool prev_c = false, prev_w = false;
        for (double p = 0; p <= 1.0; p += 0.05) {
            const bool c = connected(l, p, std::vector<VertexId>{0}, s4);
            const bool w = wired_connected(l, p, 1, 2);
            CHECK((!prev_c || c));
            CHECK((!prev_w || w));
            prev_c = c;
            prev_w = w;
        }
    }
}

TEST_CASE("piv_event: trivial cases and exhaustive value") {
    const auto patch = cached_patch(GraphFamily::hypercubic(2), 2);
    const EdgeLabels l = sample_labels(patch, 1);
    CHECK_FALSE(piv_event(l, 1.0, 1, 2));
    CHECK_FALSE(piv_event(l, 0.0, 1, 2));
    CHECK_THROWS_AS(piv_event(l, 0.5, 2, 1), ArgumentError);

    const double lib = exact_probability(*patch, 0.5, [&](const OpenMask& o) { return piv_event(*patch, o, 1, 2); });
    const double ref = oracle::enumerate(*patch, 0.5, [&](const std::vector<std::uint8_t>& o) {
        return crossing_components(*patch, o, 2, 1, 1) >= 2;
    });
    CHECK(lib == doctest::Approx(ref).epsilon(1e-12));
    CHECK(ref > 0);
    // every configuration agrees, not only the sum
    std::uint64_t mismatches = 0;
    OpenMask open(patch->num_edges());
    for (std::uint64_t mask = 0; mask < (1u << patch->num_edges()); ++mask) {
        for (std::size_t e = 0; e < open.size(); ++e) open[e] = (mask >> e) & 1;
        mismatches += piv_event(*patch, open, 1, 2) != (crossing_components(*patch, open, 2, 1, 1) >= 2);
    }
    CHECK(mismatches == 0);
    // Monte Carlo cross-check
    const PivEstimate mc = est_piv(GraphFamily::hypercubic(2), 2, 0.5, 1, 2, 40000, 77);
    CHECK(std::abs(mc.estimate.mean - ref) <= 3 * mc.estimate.ci_halfwidth);
}

TEST_CASE("piv_two_param: definition on a small annulus") {
    const auto patch = cached_patch(GraphFamily::hexagonal(), 3);
    const GraphPatch& g = *patch;
    const EdgeLabels l = sample_labels(patch, 2);
    CHECK_THROWS_AS(piv_two_param(l, 0.6, 0.5, 1, 3), ArgumentError);
    for (std::uint64_t rep = 0; rep < 50; ++rep) CHECK_FALSE(piv_two_param(sample_labels(patch, 3, rep), 0.5, 1.0, 1, 3));

    // definition: two distinct omega_p clusters of B_n meet B_m and S_n, and no omega_q path in B_n joins them
    auto reference = [&](const OpenMask& op, const OpenMask& oq, int m, int n) {
        std::vector<std::uint8_t> inside(g.num_vertices());
        for (VertexId v = 0; v < inside.size(); ++v) inside[v] = g.dist(v) <= n;
        const auto lp = oracle::flood_components(g, op, inside);
        const auto lq = oracle::flood_components(g, oq, inside);
        std::map<int, std::pair<bool, bool>> seen;
        for (VertexId v = 0; v < inside.size(); ++v) {
            if (!inside[v]) continue;
            if (g.dist(v) <= m) seen[lp[v]].first = true;
            if (g.dist(v) == n) seen[lp[v]].second = true;
        }
        std::set<int> q_of_crossing;
        std::size_t crossing = 0;
        for (auto& [c, f] : seen) {
            if (!(f.first && f.second)) continue;
            ++crossing;
            for (VertexId v = 0; v < inside.size(); ++v)
                if (inside[v] && lp[v] == c) {
                    q_of_crossing.insert(lq[v]);
                    break;
                }
        }
        return crossing >= 2 && q_of_crossing.size() >= 2;
    };
    std::uint64_t mismatches = 0, hits = 0;
    for (std::uint64_t rep = 0; rep < 3000; ++rep) {
        const EdgeLabels lr = sample_labels(patch, 4, rep);
        const OpenMask op = open_mask(lr, 0.55), oq = open_mask(lr, 0.75);
        const bool got = piv_two_param(g, op, oq, 1, 3);
        hits += got;
        mismatches += got != reference(op, oq, 1, 3);
        // with p = q the two-parameter event is the one-parameter event with B_m in place of S_m
        mismatches += piv_two_param(g, op, op, 1, 3) != (crossing_components(g, op, 3, 0, 1) >= 2);
    }
    CHECK(hits > 0);
    CHECK(mismatches == 0);
}

TEST_CASE("two_ghost_event: trivial cases and exhaustive value") {
    const auto patch = cached_patch(GraphFamily::hypercubic(2), 2);
    const EdgeId e = root_edge(*patch);
    const EdgeLabels l = sample_labels(patch, 1);
    CHECK_FALSE(two_ghost_event(l, 1.0, e, 1));
    CHECK_FALSE(two_ghost_event(l, 0.3, e, patch->num_vertices() + 1));
    const std::uint64_t n = 2;
    const double lib = exact_probability(*patch, 0.5, [&](const OpenMask& o) { return two_ghost_event(*patch, o, e, n); });
    const double ref = oracle::enumerate(*patch, 0.5, [&](const std::vector<std::uint8_t>& o) {
        if (o[e]) return false;
        const auto label = oracle::flood_components(*patch, o);
        const auto [x, y] = patch->edge(e);
        if (label[x] == label[y]) return false;
        std::size_t sx = 0, sy = 0;
        bool bx = false, by = false;
        for (VertexId v = 0; v < patch->num_vertices(); ++v) {
            if (label[v] == label[x]) ++sx, bx |= patch->on_boundary(v);
            if (label[v] == label[y]) ++sy, by |= patch->on_boundary(v);
        }
        return sx >= n && sy >= n && (!bx || !by);
    });
    CHECK(lib == doctest::Approx(ref).epsilon(1e-12));
    CHECK(ref > 0);
    const McEstimate mc = est_two_ghost(GraphFamily::hypercubic(2), 2, 0.5, n, 40000, 5);
    CHECK(std::abs(mc.mean - ref) <= 3 * mc.ci_halfwidth);
}

TEST_CASE("wired_connected: trivial cases") {
    const auto patch = cached_patch(GraphFamily::hypercubic(2), 4);
    const EdgeLabels l = sample_labels(patch, 1);
    CHECK(wired_connected(l, 0.0, 3, 3));
    CHECK(wired_connected(l, 1.0, 0, patch->num_vertices() - 1));
    CHECK_FALSE(wired_connected(l, 0.0, 1, 2));
}

TEST_CASE("configuration dump round-trips") {
    const auto patch = cached_patch(GraphFamily::kagome312(), 3);
    const EdgeLabels l = sample_labels(patch, 42, 3);
    const ConfigurationDump d = dump_configuration(l, 0.6);
    std::stringstream ss;
    write_configuration(ss, d);
    const ConfigurationDump back = read_configuration(ss);
    CHECK(back.seed == 42);
    CHECK(back.replica == 3);
    CHECK(back.open_edges == d.open_edges);
    CHECK(mask_from_dump(*patch, back) == open_mask(l, 0.6));
}
