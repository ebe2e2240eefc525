#include "perclab/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "json.hpp"
#include "perclab/errors.hpp"
#include "perclab/geometry.hpp"
#include "perclab/parallel.hpp"
#include "perclab/percolation.hpp"

namespace perclab {

namespace {

void check_unit(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

// sprinkle that tolerates the endpoints reached in floating point
double sprinkle_saturating(double p, double lambda) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return sprinkle(p, lambda);
}

}  // namespace

// ---------------------------------------------------------------- schedule

Schedule make_schedule(double n0, double p0, double K, double burnin_value, int i_max) {
    if (!(n0 >= 16.0)) throw DomainError("n0 must be at least 16");
    if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("p0 must lie in (0, 1)");
    if (i_max < 0) throw ParameterError("i_max must be nonnegative");
    if (K < 0 || burnin_value < 0) throw ParameterError("K and the burn-in must be nonnegative");
    Schedule s;
    s.n0 = n0;
    s.p0 = p0;
    s.K = K;
    s.burnin_value = burnin_value;
    const double base = std::log(std::log(std::log(n0)));
    const double step = std::log(9.0);
    const double a = 1.0 / std::sqrt(std::log(std::log(n0)));
    for (int i = 0; i <= i_max; ++i) s.logloglog_n.push_back(base + i * step);
    for (int i = 0; i < i_max; ++i) {
        // K * burnin with K = 0 must not turn an infinite burn-in into NaN
        const double extra = K == 0 ? 0.0 : K * burnin_value;
        s.delta.push_back(i == 0 ? a + extra : std::pow(3.0, -i) * a);
    }
    s.p.push_back(p0);
    for (int i = 0; i < i_max; ++i) s.p.push_back(sprinkle_saturating(s.p.back(), s.delta[i]));
    return s;
}

double schedule_total_sprinkling(const Schedule& s) {
    const double a = 1.0 / std::sqrt(std::log(std::log(s.n0)));
    const double extra = s.K == 0 ? 0.0 : s.K * s.burnin_value;
    return 1.5 * a + extra;  // a (1 + 1/3 + 1/9 + ...) = 3a/2
}

double p_infinity(const Schedule& s) { return sprinkle_saturating(s.p0, schedule_total_sprinkling(s)); }

double p_infinity_bound(const Schedule& s) {
    const double a = 1.0 / std::sqrt(std::log(std::log(s.n0)));
    const double extra = s.K == 0 ? 0.0 : s.K * s.burnin_value;
    return sprinkle_saturating(s.p0, 2.0 * a + extra);
}

std::string schedule_to_json(const Schedule& s) {
    auto finite_or_string = [](double x) -> nlohmann::json {
        if (std::isfinite(x)) return x;
        return x > 0 ? "inf" : "-inf";
    };
    nlohmann::json j;
    j["n0"] = s.n0;
    j["p0"] = s.p0;
    j["K"] = s.K;
    j["burnin_value"] = finite_or_string(s.burnin_value);
    j["logloglog_n"] = s.logloglog_n;
    nlohmann::json deltas = nlohmann::json::array();
    for (double d : s.delta) deltas.push_back(finite_or_string(d));
    j["delta"] = deltas;
    j["p"] = s.p;
    j["p_infinity"] = p_infinity(s);
    j["p_infinity_bound"] = p_infinity_bound(s);
    return j.dump();
}

// ---------------------------------------------------------------- full space

double full_space_threshold(double n) {
    if (!(n > 1.0)) return 1.0;
    const double ll = std::log(std::log(n));
    if (ll <= 0) return 1.0;
    return std::exp(-std::sqrt(ll));
}

std::vector<VertexId> stratified_ball_sample(const GraphPatch& patch, int n, std::size_t max_exhaustive) {
    if (n < 0 || n > patch.radius()) throw OutOfPatchError("ball radius outside patch");
    if (patch.growth(n) <= max_exhaustive) return patch.ball(n);
    std::vector<VertexId> out;
    for (int k = 0; k <= n; ++k) {
        const auto [first, last] = patch.sphere_range(k);
        if (first == last) continue;
        out.push_back(first);
        if (last - first > 2) out.push_back(first + (last - first) / 2);
        if (last - first > 1) out.push_back(last - 1);
    }
    return out;
}

FullSpaceVerdict eval_full_space(const GraphFamily& family, int radius, int n, double p, std::uint64_t replicas,
                                 std::uint64_t seed) {
    check_unit(p, "p");
    if (n < 0 || n > radius) throw ParameterError("eval_full_space needs 0 <= n <= radius");
    const PatchPtr patch = cached_patch(family, radius);
    const std::vector<VertexId> sample = stratified_ball_sample(*patch, n);
    FullSpaceVerdict out;
    out.sampled = patch->growth(n) > 40;
    out.threshold = full_space_threshold(n);
    if (sample.size() < 2) {
        out.min_estimate = exact_value(1.0, radius);
        out.worst_u = out.worst_v = patch->root();
    } else {
        const PairGrid grid = est_pair_grid(patch, p, sample, sample, {}, replicas, seed);
        bool first = true;
        for (std::size_t i = 0; i < sample.size(); ++i)
            for (std::size_t j = i + 1; j < sample.size(); ++j) {
                ++out.pairs_tested;
                const McEstimate& c = grid.at(i, j);
                if (first || c.mean < out.min_estimate.mean) {
                    out.min_estimate = c;
                    out.worst_u = sample[i];
                    out.worst_v = sample[j];
                    first = false;
                }
            }
    }
    out.margin = out.min_estimate.mean - out.threshold;
    out.holds = out.min_estimate.mean >= out.threshold;
    out.holds_lower = out.min_estimate.ci_lo >= out.threshold;
    out.holds_upper = out.min_estimate.ci_hi >= out.threshold;
    return out;
}

// ---------------------------------------------------------------- corridor

bool CorridorReport::holds() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const CorridorVerdict& v) { return v.holds; });
}

CorridorReport eval_corridor(const GraphFamily& family, int n_prev, int n, double p, double D, int ell_cap,
                             std::uint64_t replicas, std::uint64_t seed) {
    check_unit(p, "p");
    if (n_prev < 1 || n < n_prev) throw ParameterError("eval_corridor needs 1 <= n_prev <= n");
    if (ell_cap < 1) throw ParameterError("ell_cap must be positive");
    const std::vector<int> scales = low_growth_scales([&](int r) { return growth_of(family, r); }, D, n);
    CorridorReport report;
    const double threshold = full_space_threshold(n);
    for (int m : scales) {
        if (m < n_prev) continue;
        CorridorVerdict v;
        v.m = m;
        v.threshold = threshold;
        v.corridor = est_corridor(family, p, ell_cap, m, nullptr, replicas, derive_seed(seed, static_cast<std::uint64_t>(m)));
        v.holds = v.corridor.estimate.mean >= threshold;
        report.verdicts.push_back(std::move(v));
    }
    report.vacuous = report.verdicts.empty();
    return report;
}

// ---------------------------------------------------------------- two-point zone

int two_point_zone(const GraphFamily& family, int radius, double p, int m, double n_for_threshold,
                   std::uint64_t replicas, std::uint64_t seed) {
    check_unit(p, "p");
    if (m < 0 || m > radius) throw ParameterError("two_point_zone needs 0 <= m <= radius");
    if (!(n_for_threshold > 1.0)) throw ParameterError("threshold scale must exceed 1");
    const PatchPtr patch = cached_patch(family, radius);
    const GraphPatch& g = *patch;
    const double threshold = 1.0 / std::log(n_for_threshold);
    const std::vector<VertexId> sample = stratified_ball_sample(g, m);
    if (sample.size() < 2) return m;
    const Region ball = region_of(g, g.ball(m));
    const PairGrid grid = est_pair_grid(patch, p, sample, sample, ball, replicas, seed);

    // worst lower bound among sampled pairs whose farther endpoint sits at distance r
    std::vector<double> worst_at(m + 1, 1.0);
    for (std::size_t i = 0; i < sample.size(); ++i)
        for (std::size_t j = i + 1; j < sample.size(); ++j) {
            const int r = std::max(g.dist(sample[i]), g.dist(sample[j]));
            worst_at[r] = std::min(worst_at[r], grid.at(i, j).ci_lo);
        }
    int zone = 0;
    double running = 1.0;
    for (int r = 1; r <= m; ++r) {
        running = std::min(running, worst_at[r]);
        if (running < threshold) break;
        zone = r;
    }
    return zone;
}

// ---------------------------------------------------------------- well-separated sets

WellSeparatedSet well_separated_set(const GraphFamily& family, int radius, double p1, int m,
                                    double n_for_threshold, double threshold_exponent, VertexId u, VertexId v,
                                    std::uint64_t replicas, std::uint64_t seed, std::optional<int> zone) {
    check_unit(p1, "p1");
    if (m < 0 || m / 2 > radius) throw ParameterError("well_separated_set needs B_{m/2} inside the patch");
    if (!(n_for_threshold > 1.0)) throw ParameterError("threshold scale must exceed 1");
    if (!(threshold_exponent > 0)) throw ParameterError("threshold exponent must be positive");
    const PatchPtr patch = cached_patch(family, radius);
    const GraphPatch& g = *patch;
    if (u >= g.num_vertices() || v >= g.num_vertices()) throw OutOfPatchError("vertex outside patch");
    if (zone && (g.dist(u) > *zone || g.dist(v) > *zone)) throw ArgumentError("u and v must lie in the two-point zone");

    WellSeparatedSet out;
    out.threshold = std::pow(std::log(n_for_threshold), -threshold_exponent);
    out.geodesic = geodesic(g, u, v);
    const Region half = region_of(g, g.ball(m / 2));
    const std::size_t len = out.geodesic.size() - 1;

    std::size_t cur = 0;
    out.indices.push_back(0);
    std::uint64_t step = 0;
    while (cur < len) {
        const std::vector<VertexId> from{out.geodesic[cur]};
        const std::vector<VertexId> rest(out.geodesic.begin() + static_cast<std::ptrdiff_t>(cur), out.geodesic.end());
        const PairGrid grid = est_pair_grid(patch, p1, from, rest, half, replicas, derive_seed(seed, step++));
        std::size_t last_high = 0;
        for (std::size_t j = 0; j < rest.size(); ++j)
            if (grid.at(0, j).ci_hi >= out.threshold) last_high = j;
        std::size_t next = cur + last_high + 1;
        if (next >= len) {
            out.final_clamped = next > len;
            next = len;
        }
        out.indices.push_back(next);
        cur = next;
    }
    for (std::size_t i : out.indices) out.vertices.push_back(out.geodesic[i]);
    return out;
}

// ---------------------------------------------------------------- Hamming bound

HammingCheck hamming_bound_check(const GraphFamily& family, int radius, double p, double q,
                                 std::span<const VertexId> A, std::span<const VertexId> B,
                                 std::uint64_t replicas, std::uint64_t seed) {
    check_unit(p, "p");
    check_unit(q, "q");
    if (!(p < q)) throw ParameterError("hamming_bound_check needs p < q");
    if (A.empty() || B.empty()) throw ArgumentError("A and B must be nonempty");
    if (replicas == 0) throw ParameterError("replicas must be positive");
    const PatchPtr patch = cached_patch(family, radius);
    const GraphPatch& g = *patch;
    for (VertexId x : A)
        if (x >= g.num_vertices()) throw OutOfPatchError("vertex outside patch");
    for (VertexId x : B)
        if (x >= g.num_vertices()) throw OutOfPatchError("vertex outside patch");

    const std::size_t a = A.size();
    struct Acc {
        std::vector<std::uint64_t> to_b;   // per x in A, at p
        std::vector<std::uint64_t> pairs;  // per ordered pair index i*a+j, at p
        std::uint64_t lhs = 0;             // A <-> B at q
        UnionFind uf;
        std::vector<std::uint8_t> mark;
    };
    auto hits_b = [&](Acc& acc, VertexId x) {
        const std::uint32_t r = acc.uf.find(x);
        return acc.mark[r] != 0;
    };
    auto mark_b = [&](Acc& acc) {
        std::fill(acc.mark.begin(), acc.mark.end(), 0);
        for (VertexId y : B) acc.mark[acc.uf.find(y)] = 1;
    };
    auto acc = replicate(
        0, replicas,
        [&] {
            return Acc{std::vector<std::uint64_t>(a, 0), std::vector<std::uint64_t>(a * a, 0), 0,
                       UnionFind(g.num_vertices()), std::vector<std::uint8_t>(g.num_vertices(), 0)};
        },
        [&](Acc& acc, std::uint64_t r) {
            // sweep edges once: labels <= p first, then those in (p, q]
            acc.uf.reset(g.num_vertices());
            std::vector<EdgeId> later;
            for (EdgeId e = 0; e < g.num_edges(); ++e) {
                const double label = edge_label(seed, r, e);
                if (label <= p)
                    acc.uf.unite(g.edge(e).u, g.edge(e).v);
                else if (label <= q)
                    later.push_back(e);
            }
            mark_b(acc);
            for (std::size_t i = 0; i < a; ++i) {
                if (hits_b(acc, A[i])) ++acc.to_b[i];
                for (std::size_t j = i + 1; j < a; ++j)
                    if (acc.uf.same(A[i], A[j])) ++acc.pairs[i * a + j];
            }
            for (EdgeId e : later) acc.uf.unite(g.edge(e).u, g.edge(e).v);
            mark_b(acc);
            for (VertexId x : A)
                if (hits_b(acc, x)) {
                    ++acc.lhs;
                    break;
                }
        },
        [&](Acc& into, const Acc& from) {
            for (std::size_t i = 0; i < a; ++i) into.to_b[i] += from.to_b[i];
            for (std::size_t i = 0; i < a * a; ++i) into.pairs[i] += from.pairs[i];
            into.lhs += from.lhs;
        });

    HammingCheck out;
    out.lhs = proportion_estimate(acc.lhs, replicas, seed, radius);
    std::size_t imin = 0;
    for (std::size_t i = 1; i < a; ++i)
        if (acc.to_b[i] < acc.to_b[imin]) imin = i;
    out.min_to_b = proportion_estimate(acc.to_b[imin], replicas, seed, radius);
    std::uint64_t best = 0;
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = i + 1; j < a; ++j) best = std::max(best, acc.pairs[i * a + j]);
    out.max_pair = a > 1 ? proportion_estimate(best, replicas, seed, radius) : exact_value(0.0, radius);

    const double lower = out.min_to_b.mean;
    const double upper = 2.0 * static_cast<double>(a) * out.max_pair.mean;
    out.theta = std::min(lower, upper);
    out.hypothesis_met = lower >= upper && out.theta < 1.0;
    const double d = (q >= 1.0) ? std::numeric_limits<double>::infinity() : (p <= 0.0 ? 0.0 : delta(p, q));
    // the bound is evaluated with this theta either way; it is only guaranteed when the hypothesis holds
    if (out.theta <= 0.0)
        out.rhs = 0.0;
    else if (d == std::numeric_limits<double>::infinity())
        out.rhs = 1.0;
    else
        out.rhs = 1.0 - std::exp(-d * out.theta * static_cast<double>(a));
    out.holds = out.lhs.ci_hi >= out.rhs;
    return out;
}

// ---------------------------------------------------------------- orange peeling

std::vector<std::size_t> OrangePeelTrace::sizes() const {
    std::vector<std::size_t> out;
    for (const auto& s : steps) out.push_back(s.clusters);
    return out;
}

OrangePeelTrace orange_peel_trace(const GraphFamily& family, int radius, int m, double p_start, double p_end,
                                  double D, std::uint64_t seed, std::optional<double> n_eff) {
    check_unit(p_start, "p_start");
    check_unit(p_end, "p_end");
    if (p_end < p_start) throw ParameterError("orange_peel_trace needs p_start <= p_end");
    if (m < 8 || m / 8 > radius) throw ParameterError("orange_peel_trace needs 8 <= m and m/8 <= radius");
    if (!(D > 0)) throw ParameterError("D must be positive");
    OrangePeelTrace trace;
    trace.n_eff = n_eff.value_or(static_cast<double>(m) * m * m);
    if (!(trace.n_eff > std::exp(1.0))) throw ParameterError("effective n must exceed e");
    const double logn = std::log(trace.n_eff);
    trace.k = 2 * static_cast<int>(std::floor(std::pow(logn, D)));
    trace.eps = std::pow(logn, -(D + 1));
    const double outer = m / 8.0;
    const double shrink = m / 40.0 * std::pow(logn, -D);

    // sprinkling step spread evenly in the delta metric so the last level is p_end
    const bool degenerate = p_start <= 0.0 || p_end >= 1.0 || p_start >= p_end;
    const double total = degenerate ? 0.0 : delta(p_start, p_end);
    auto q_at = [&](int i) {
        if (trace.k == 0 || p_start >= p_end) return p_start;
        if (p_start <= 0.0) return 0.0;
        if (i == trace.k) return p_end;
        if (p_end >= 1.0) return p_start + (p_end - p_start) * i / trace.k;
        return sprinkle(p_start, total * i / trace.k);
    };

    const PatchPtr patch = cached_patch(family, radius);
    const GraphPatch& g = *patch;
    const int R = static_cast<int>(std::floor(outer));
    std::vector<std::pair<double, EdgeId>> order;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
        const Edge& ed = g.edge(e);
        if (g.dist(ed.u) <= R && g.dist(ed.v) <= R) order.emplace_back(edge_label(seed, 0, e), e);
    }
    std::sort(order.begin(), order.end());
    UnionFind uf(g.num_vertices());
    std::size_t next = 0;
    auto advance = [&](double q) {
        while (next < order.size() && order[next].first <= q) {
            const Edge& ed = g.edge(order[next].second);
            uf.unite(ed.u, ed.v);
            ++next;
        }
    };

    std::set<std::uint32_t> current;
    const double q0 = q_at(0);
    advance(q0);
    for (VertexId x : g.sphere(R)) current.insert(uf.find(x));
    trace.steps.push_back({0, outer, q0, current.size()});

    for (int i = 0; i < trace.k; ++i) {
        const double r_next = outer - (i + 1) * shrink;
        if (r_next < 1.0) {
            trace.truncated = true;
            break;
        }
        const int s = static_cast<int>(std::floor(r_next));
        std::set<std::uint32_t> touching;
        for (VertexId x : g.sphere(s)) {
            const std::uint32_t root = uf.find(x);
            if (current.count(root)) touching.insert(root);
        }
        const double q = q_at(i + 1);
        advance(q);
        std::set<std::uint32_t> merged;
        for (std::uint32_t root : touching) merged.insert(uf.find(root));
        current = std::move(merged);
        trace.steps.push_back({i + 1, r_next, q, current.size()});
    }
    return trace;
}

void write_orange_peel_csv(std::ostream& out, const OrangePeelTrace& trace) {
    out << "i,r,q,clusters\n";
    out.precision(17);
    for (const auto& s : trace.steps) out << s.i << ',' << s.r << ',' << s.q << ',' << s.clusters << '\n';
}

}  // namespace perclab
