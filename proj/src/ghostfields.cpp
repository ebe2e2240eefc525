#include "perclab/ghostfields.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "perclab/errors.hpp"
#include "perclab/estimators.hpp"
#include "perclab/geometry.hpp"
#include "perclab/parallel.hpp"
#include "perclab/union_find.hpp"

namespace perclab {

namespace {

void check_unit(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError(std::string(what) + " must lie in [0,1]");
}

void check_vertices(const GraphPatch& g, std::span<const VertexId> s) {
    for (VertexId v : s)
        if (v >= g.num_vertices()) throw OutOfPatchError("vertex outside patch");
}

struct Counts {
    std::vector<std::uint64_t> c;
};

}  // namespace

GhostField sample_ghost(std::span<const VertexId> support, double h, std::uint64_t seed, std::uint64_t replica,
                        Stream stream) {
    check_unit(h, "ghost intensity");
    GhostField g;
    g.support.assign(support.begin(), support.end());
    g.intensity = h;
    g.seed = seed;
    g.replica = replica;
    for (VertexId v : support)
        if (ghost_bit(seed, stream, replica, v, h)) g.included.push_back(v);
    return g;
}

BitsEncoding bits_encoding(double p1, double p2, double h, int d) {
    if (d < 2) throw DomainError("bits encoding needs degree at least 2");
    const double inv = 1.0 / d;
    if (!(p1 >= inv && p1 < p2 && p2 < 1.0)) throw DomainError("bits encoding needs 1/d <= p1 < p2 < 1");
    if (!(h > 0.0 && h <= inv)) throw DomainError("bits encoding needs 0 < h <= 1/d");
    BitsEncoding b;
    // the tiny offset keeps exact integer ratios (p1 = 1/d gives 1) from flooring down
    const double ratio = std::log1p(-p1) / std::log1p(-inv);
    b.m_E = static_cast<int>(std::floor(ratio * (1 + 1e-12)));
    b.q1 = -std::expm1(std::log1p(-p1) / b.m_E);
    b.q2 = -std::expm1(std::log1p(-p2) / b.m_E);
    b.m_G = static_cast<int>(std::floor(std::log(h) / std::log(b.q1) * (1 + 1e-12)));
    const double tol = 1e-12;
    if (std::abs(std::pow(1 - b.q1, b.m_E) - (1 - p1)) > tol || std::abs(std::pow(1 - b.q2, b.m_E) - (1 - p2)) > tol)
        throw DomainError("bits encoding round trip failed");
    if (b.q1 < inv - tol || b.q1 > 2 * inv + tol) throw DomainError("bits encoding q1 outside [1/d, 2/d]");
    if (b.m_G < 1 || std::pow(b.q1, b.m_G) < h * (1 - tol)) throw DomainError("bits encoding ghost depth invalid");
    return b;
}

// ---------------------------------------------------------------- ghost connection

McEstimate est_ghost_connection(PatchPtr patch, double p, std::span<const VertexId> A, std::span<const VertexId> B,
                                double h, const Region& lambda, std::uint64_t replicas, std::uint64_t seed) {
    check_unit(p, "probability");
    check_unit(h, "ghost intensity");
    if (A.empty() || B.empty()) throw ArgumentError("ghost supports must be nonempty");
    if (replicas < 1) throw ArgumentError("at least one replica is required");
    const GraphPatch& g = *patch;
    check_vertices(g, A);
    check_vertices(g, B);
    if (!lambda.empty() && lambda.size() != g.num_vertices()) throw ArgumentError("region size mismatch");
    auto inside = [&](VertexId v) { return lambda.empty() || lambda[v] != 0; };
    std::vector<EdgeId> active;
    for (EdgeId e = 0; e < g.num_edges(); ++e)
        if (inside(g.edge(e).u) && inside(g.edge(e).v)) active.push_back(e);

    struct Acc {
        std::uint64_t hits = 0;
        UnionFind uf;
        std::vector<std::uint32_t> mark;
        std::uint32_t epoch = 0;
    };
    auto acc = replicate(
        0, replicas, [&] { return Acc{0, UnionFind(g.num_vertices()), std::vector<std::uint32_t>(g.num_vertices(), 0), 0}; },
        [&](Acc& a, std::uint64_t r) {
            ++a.epoch;
            bool any = false;
            a.uf.reset(g.num_vertices());
            for (EdgeId e : active)
                if (edge_label(seed, r, e) <= p) a.uf.unite(g.edge(e).u, g.edge(e).v);
            for (VertexId v : A)
                if (inside(v) && ghost_bit(seed, Stream::GhostA, r, v, h)) {
                    a.mark[a.uf.find(v)] = a.epoch;
                    any = true;
                }
            if (!any) return;
            for (VertexId v : B)
                if (inside(v) && ghost_bit(seed, Stream::GhostB, r, v, h) && a.mark[a.uf.find(v)] == a.epoch) {
                    ++a.hits;
                    return;
                }
        },
        [](Acc& into, const Acc& from) { into.hits += from.hits; });
    return proportion_estimate(acc.hits, replicas, seed, g.radius());
}

McEstimate est_ghost_connection(const GraphFamily& family, int radius, double p, std::span<const VertexId> A,
                                std::span<const VertexId> B, double h, const Region& lambda, std::uint64_t replicas,
                                std::uint64_t seed) {
    return est_ghost_connection(cached_patch(family, radius), p, A, B, h, lambda, replicas, seed);
}

double exact_ghost_connection(const GraphPatch& patch, double p, std::span<const VertexId> A,
                              std::span<const VertexId> B, double h, const Region& lambda) {
    check_unit(p, "probability");
    check_unit(h, "ghost intensity");
    check_vertices(patch, A);
    check_vertices(patch, B);
    const std::size_t E = patch.num_edges(), k = A.size() + B.size();
    if (E + k > kMaxEnumerationEdges) throw ArgumentError("instance too large for exact enumeration");
    auto inside = [&](VertexId v) { return lambda.empty() || lambda[v] != 0; };
    double total = 0;
    UnionFind uf(patch.num_vertices());
    for (std::uint64_t eb = 0; eb < (std::uint64_t{1} << E); ++eb) {
        const int open = std::popcount(eb);
        const double we = std::pow(p, open) * std::pow(1 - p, static_cast<double>(E) - open);
        if (we == 0) continue;
        uf.reset(patch.num_vertices());
        for (EdgeId e = 0; e < E; ++e)
            if (((eb >> e) & 1u) && inside(patch.edge(e).u) && inside(patch.edge(e).v))
                uf.unite(patch.edge(e).u, patch.edge(e).v);
        for (std::uint64_t gb = 0; gb < (std::uint64_t{1} << k); ++gb) {
            const int marked = std::popcount(gb);
            const double wg = std::pow(h, marked) * std::pow(1 - h, static_cast<double>(k) - marked);
            if (wg == 0) continue;
            bool hit = false;
            for (std::size_t i = 0; i < A.size() && !hit; ++i) {
                if (!((gb >> i) & 1u) || !inside(A[i])) continue;
                for (std::size_t j = 0; j < B.size() && !hit; ++j)
                    if (((gb >> (A.size() + j)) & 1u) && inside(B[j]) && uf.same(A[i], B[j])) hit = true;
            }
            if (hit) total += we * wg;
        }
    }
    return total;
}

// ---------------------------------------------------------------- event grammar

namespace {

std::string strip(std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
}

int parse_int(const std::string& s, const std::string& context) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        throw ParseError("expected integer in '" + context + "'");
    }
    if (used != s.size() || v < 0) throw ParseError("expected nonnegative integer in '" + context + "'");
    return v;
}

// Splits a comma list at brace depth zero.
std::vector<std::string> split_args(const std::string& s) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '{' || c == '(') ++depth;
        if (c == '}' || c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    return out;
}

VertexSetSpec parse_set(const std::string& s) {
    VertexSetSpec v;
    if (s == "root") {
        v.kind = VertexSetSpec::Kind::Root;
    } else if (s == "all") {
        v.kind = VertexSetSpec::Kind::All;
    } else if (s.rfind("ball:", 0) == 0) {
        v.kind = VertexSetSpec::Kind::Ball;
        v.value = parse_int(s.substr(5), s);
    } else if (s.rfind("sphere:", 0) == 0) {
        v.kind = VertexSetSpec::Kind::Sphere;
        v.value = parse_int(s.substr(7), s);
    } else if (s.size() >= 2 && s.front() == '{' && s.back() == '}') {
        v.kind = VertexSetSpec::Kind::List;
        for (const auto& part : split_args(s.substr(1, s.size() - 2))) v.ids.push_back(static_cast<VertexId>(parse_int(part, s)));
        if (v.ids.empty()) throw ParseError("empty vertex list");
    } else if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
        v.kind = VertexSetSpec::Kind::Vertex;
        v.value = parse_int(s, s);
    } else {
        throw ParseError("unknown vertex set '" + s + "'");
    }
    return v;
}

}  // namespace

std::vector<VertexId> VertexSetSpec::resolve(const GraphPatch& patch) const {
    switch (kind) {
        case Kind::Root: return {patch.root()};
        case Kind::Vertex:
            if (static_cast<std::size_t>(value) >= patch.num_vertices()) throw OutOfPatchError("vertex outside patch");
            return {static_cast<VertexId>(value)};
        case Kind::Ball: return patch.ball(value);
        case Kind::Sphere: return patch.sphere(value);
        case Kind::All: return patch.ball(patch.radius());
        case Kind::List:
            for (VertexId v : ids)
                if (v >= patch.num_vertices()) throw OutOfPatchError("vertex outside patch");
            return ids;
    }
    return {};
}

std::string VertexSetSpec::to_string() const {
    switch (kind) {
        case Kind::Root: return "root";
        case Kind::Vertex: return std::to_string(value);
        case Kind::Ball: return "ball:" + std::to_string(value);
        case Kind::Sphere: return "sphere:" + std::to_string(value);
        case Kind::All: return "all";
        case Kind::List: {
            std::string s = "{";
            for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + std::to_string(ids[i]);
            return s + "}";
        }
    }
    return {};
}

EventSpec parse_event(const std::string& text) {
    const std::string s = strip(text);
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') throw ParseError("malformed event '" + text + "'");
    const std::string name = s.substr(0, open);
    const auto args = split_args(s.substr(open + 1, s.size() - open - 2));
    EventSpec ev;
    ev.text = s;
    if (name == "connect" || name == "ghost") {
        if (args.size() < 2 || args.size() > 3) throw ParseError(name + " takes two or three arguments");
        ev.kind = name == "connect" ? EventSpec::Kind::Connect : EventSpec::Kind::Ghost;
        ev.a = parse_set(args[0]);
        ev.b = parse_set(args[1]);
        if (args.size() == 3) ev.region = parse_set(args[2]);
    } else if (name == "sphere") {
        if (args.size() != 1) throw ParseError("sphere takes one argument");
        ev.kind = EventSpec::Kind::Sphere;
        ev.radius = parse_int(args[0], s);
    } else if (name == "not") {
        parse_event(s.substr(open + 1, s.size() - open - 2));
        ev.kind = EventSpec::Kind::Not;
    } else if (name == "piv") {
        if (args.size() != 2) throw ParseError("piv takes two arguments");
        ev.kind = EventSpec::Kind::Piv;
    } else if (name == "two_ghost") {
        if (args.size() != 1) throw ParseError("two_ghost takes one argument");
        ev.kind = EventSpec::Kind::TwoGhost;
    } else {
        throw ParseError("unknown event '" + name + "'");
    }
    return ev;
}

EventEvaluator::EventEvaluator(PatchPtr patch, EventSpec spec, double h)
    : patch_(std::move(patch)), spec_(std::move(spec)), h_(h) {
    if (!spec_.monotone()) throw NonMonotoneEventError("event '" + spec_.text + "' is not monotone");
    check_unit(h, "ghost intensity");
    if (spec_.kind == EventSpec::Kind::Sphere) {
        if (spec_.radius > patch_->radius()) throw OutOfPatchError("sphere radius outside patch");
        a_ = {patch_->root()};
        b_ = patch_->sphere(spec_.radius);
    } else {
        a_ = spec_.a.resolve(*patch_);
        b_ = spec_.b.resolve(*patch_);
        if (spec_.region) region_ = region_of(*patch_, spec_.region->resolve(*patch_));
    }
}

bool EventEvaluator::operator()(const OpenMask& open, const std::vector<std::uint8_t>& ghost_a,
                                const std::vector<std::uint8_t>& ghost_b) const {
    if (spec_.kind != EventSpec::Kind::Ghost) return connected(*patch_, open, a_, b_, region_);
    std::vector<VertexId> ga, gb;
    for (VertexId v : a_)
        if (ghost_a[v]) ga.push_back(v);
    for (VertexId v : b_)
        if (ghost_b[v]) gb.push_back(v);
    if (ga.empty() || gb.empty()) return false;
    return connected(*patch_, open, ga, gb, region_);
}

bool EventEvaluator::operator()(const OpenMask& open, std::uint64_t seed, std::uint64_t replica) const {
    if (spec_.kind != EventSpec::Kind::Ghost) return connected(*patch_, open, a_, b_, region_);
    std::vector<std::uint8_t> ga(patch_->num_vertices(), 0), gb(patch_->num_vertices(), 0);
    for (VertexId v : a_) ga[v] = ghost_bit(seed, Stream::GhostA, replica, v, h_);
    for (VertexId v : b_) gb[v] = ghost_bit(seed, Stream::GhostB, replica, v, h_);
    return (*this)(open, ga, gb);
}

InfluenceReport est_pivotal_influence(PatchPtr patch, double p, double h, const EventSpec& event,
                                      std::uint64_t replicas, std::uint64_t seed) {
    check_unit(p, "probability");
    if (replicas < 1) throw ArgumentError("at least one replica is required");
    const EventEvaluator eval(patch, event, h);
    const GraphPatch& g = *patch;
    const std::size_t E = g.num_edges();
    struct Acc {
        Counts counts;  // per edge, then event hits
        double sum = 0, sum_sq = 0;
    };
    auto acc = replicate(
        0, replicas, [&] { return Acc{Counts{std::vector<std::uint64_t>(E + 1, 0)}, 0, 0}; },
        [&](Acc& a, std::uint64_t r) {
            OpenMask open(E);
            for (EdgeId e = 0; e < E; ++e) open[e] = edge_label(seed, r, e) <= p;
            std::vector<std::uint8_t> ga(g.num_vertices(), 0), gb(g.num_vertices(), 0);
            if (event.kind == EventSpec::Kind::Ghost) {
                for (VertexId v : eval.set_a()) ga[v] = ghost_bit(seed, Stream::GhostA, r, v, h);
                for (VertexId v : eval.set_b()) gb[v] = ghost_bit(seed, Stream::GhostB, r, v, h);
            }
            if (eval(open, ga, gb)) ++a.counts.c[E];
            std::uint64_t pivotal = 0;
            for (EdgeId e = 0; e < E; ++e) {
                const auto saved = open[e];
                open[e] = 1;
                const bool up = eval(open, ga, gb);
                open[e] = 0;
                const bool down = eval(open, ga, gb);
                open[e] = saved;
                if (up != down) {
                    ++a.counts.c[e];
                    ++pivotal;
                }
            }
            a.sum += static_cast<double>(pivotal);
            a.sum_sq += static_cast<double>(pivotal) * static_cast<double>(pivotal);
        },
        [](Acc& into, const Acc& from) {
            for (std::size_t i = 0; i < into.counts.c.size(); ++i) into.counts.c[i] += from.counts.c[i];
            into.sum += from.sum;
            into.sum_sq += from.sum_sq;
        });
    InfluenceReport rep;
    for (EdgeId e = 0; e < E; ++e) {
        rep.per_edge.push_back(proportion_estimate(acc.counts.c[e], replicas, seed, g.radius()));
        if (rep.per_edge.back().mean > rep.max_influence) {
            rep.max_influence = rep.per_edge.back().mean;
            rep.argmax = e;
        }
    }
    rep.russo_derivative = mean_estimate(acc.sum, acc.sum_sq, replicas, seed, g.radius());
    rep.event = proportion_estimate(acc.counts.c[E], replicas, seed, g.radius());
    return rep;
}

InfluenceReport est_pivotal_influence(const GraphFamily& family, int radius, double p, double h,
                                      const std::string& event, std::uint64_t replicas, std::uint64_t seed) {
    return est_pivotal_influence(cached_patch(family, radius), p, h, parse_event(event), replicas, seed);
}

// ---------------------------------------------------------------- two-ghost coupling

McEstimate est_coupled_two_ghost(const GraphFamily& family, int radius, double p, double h, std::uint64_t replicas,
                                 std::uint64_t seed) {
    check_unit(p, "probability");
    check_unit(h, "ghost intensity");
    if (replicas < 1) throw ArgumentError("at least one replica is required");
    const PatchPtr patch = cached_patch(family, radius);
    const GraphPatch& g = *patch;
    const EdgeId e0 = root_edge(g);
    const VertexId x = g.edge(e0).u, y = g.edge(e0).v;
    struct Acc {
        std::uint64_t hits = 0;
        std::vector<std::uint32_t> stamp;
        std::vector<VertexId> stack;
        std::uint32_t epoch = 0;
    };
    auto acc = replicate(
        0, replicas, [&] { return Acc{0, std::vector<std::uint32_t>(g.num_vertices(), 0), {}, 0}; },
        [&](Acc& a, std::uint64_t r) {
            if (edge_label(seed, r, e0) <= p) return;
            struct Outcome {
                bool ghost = false, touches = false, met_other = false;
            };
            // Explores until the cluster is exhausted, or it is known to reach the boundary and carry a
            // ghost (nothing else about it matters then).
            auto explore = [&](VertexId start, Stream stream, std::uint32_t mark, std::uint32_t other) {
                Outcome o;
                a.stamp[start] = mark;
                a.stack.assign(1, start);
                o.touches = g.on_boundary(start);
                o.ghost = ghost_bit(seed, stream, r, start, h);
                while (!a.stack.empty() && !(o.touches && o.ghost)) {
                    const VertexId v = a.stack.back();
                    a.stack.pop_back();
                    for (const auto& inc : g.neighbors(v)) {
                        const auto s = a.stamp[inc.vertex];
                        if (s == mark || edge_label(seed, r, inc.edge) > p) continue;
                        if (other != 0 && s == other) {
                            o.met_other = true;
                            return o;
                        }
                        a.stamp[inc.vertex] = mark;
                        o.touches = o.touches || g.on_boundary(inc.vertex);
                        o.ghost = o.ghost || ghost_bit(seed, stream, r, inc.vertex, h);
                        a.stack.push_back(inc.vertex);
                    }
                }
                return o;
            };
            a.epoch += 2;
            if (a.epoch < 2) {
                std::fill(a.stamp.begin(), a.stamp.end(), 0);
                a.epoch = 2;
            }
            const std::uint32_t mx = a.epoch - 1, my = a.epoch;
            const Outcome ox = explore(x, Stream::GhostA, mx, 0);
            if (!ox.ghost || a.stamp[y] == mx) return;
            const Outcome oy = explore(y, Stream::GhostB, my, mx);
            if (oy.met_other || !oy.ghost) return;
            if (ox.touches && oy.touches) return;
            ++a.hits;
        },
        [](Acc& into, const Acc& from) { into.hits += from.hits; });
    return proportion_estimate(acc.hits, replicas, seed, radius);
}

std::vector<CoupledGhostResult> two_ghost_coupled_sweep(const GraphFamily& family, int radius, double p,
                                                        std::span<const double> hs, std::uint64_t replicas,
                                                        std::uint64_t seed) {
    if (hs.empty()) throw ArgumentError("no ghost intensities given");
    if (!(p > 0 && p <= 1)) throw DomainError("coupled two-ghost check needs p in (0,1]");
    std::vector<CoupledGhostResult> out;
    double C = 0;
    std::vector<double> lx, ly;
    for (double h : hs) {
        CoupledGhostResult res;
        res.h = h;
        // same seed for every h: ghost marks are monotone in h on shared uniforms
        res.lhs = est_coupled_two_ghost(family, radius, p, h, replicas, seed);
        const double scale = std::sqrt((1 - p) * h / p);
        if (scale > 0) C = std::max(C, res.lhs.mean / scale);
        if (h > 0 && res.lhs.mean > 0) {
            lx.push_back(std::log(h));
            ly.push_back(std::log(res.lhs.mean));
        }
        out.push_back(res);
    }
    std::optional<double> slope;
    if (lx.size() >= 2) slope = ls_slope(lx, ly);
    for (auto& res : out) {
        res.fitted_C = C;
        res.rhs = C * std::sqrt((1 - p) * res.h / p);
        res.slope = slope;
    }
    return out;
}

CoupledGhostResult two_ghost_coupled_check(const GraphFamily& family, int radius, double p, double h,
                                           std::uint64_t replicas, std::uint64_t seed) {
    const double hs[1] = {h};
    return two_ghost_coupled_sweep(family, radius, p, hs, replicas, seed)[0];
}

// ---------------------------------------------------------------- gluing and snowballing

std::optional<int> default_gluing_radius(const GraphFamily& family, double p, double h, int n_cap,
                                         std::uint64_t replicas, std::uint64_t seed) {
    if (!(h > 0 && h <= 1)) throw DomainError("gluing radius needs h in (0,1]");
    const int inner[1] = {1};
    for (int n = 1; n <= n_cap; ++n) {
        const auto est = est_piv_multi(family, p, inner, n, replicas, derive_seed(seed, static_cast<std::uint64_t>(n)));
        if (est[0].ci_hi < h) return static_cast<int>(std::ceil(n / h));
    }
    return std::nullopt;
}

Region thicken(const GraphPatch& patch, const Region& lambda, int r) {
    if (lambda.empty()) return {};
    if (r < 0) throw ArgumentError("thickening radius must be nonnegative");
    std::vector<VertexId> src;
    for (VertexId v = 0; v < lambda.size(); ++v)
        if (lambda[v]) src.push_back(v);
    BfsWorkspace ws(patch);
    ws.run(src, r);
    Region out(patch.num_vertices(), 0);
    for (VertexId v : ws.order()) out[v] = 1;
    return out;
}

bool gluing_event(const GraphPatch& g, const OpenMask& open1, const OpenMask& open2,
                  const std::vector<std::uint8_t>& ghost, std::span<const VertexId> A, std::span<const VertexId> X,
                  std::span<const VertexId> Y, const Region& lambda, const Region& thick) {
    auto in_l = [&](VertexId v) { return lambda.empty() || lambda[v] != 0; };
    auto in_t = [&](VertexId v) { return thick.empty() || thick[v] != 0; };
    UnionFind u1(g.num_vertices()), u2(g.num_vertices());
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        if (open2[e] && in_t(ed.u) && in_t(ed.v)) u2.unite(ed.u, ed.v);
        if (open1[e] && in_l(ed.u) && in_l(ed.v)) u1.unite(ed.u, ed.v);
    }
    auto linked = [&](UnionFind& uf, std::span<const VertexId> S, auto member) {
        for (VertexId s : S) {
            if (!member(s)) continue;
            for (VertexId a : A)
                if (ghost[a] && member(a) && uf.same(s, a)) return true;
        }
        return false;
    };
    if (!linked(u2, X, in_t)) return false;
    if (!linked(u1, Y, in_l)) return false;
    for (VertexId x : X) {
        if (!in_t(x)) continue;
        for (VertexId y : Y)
            if (in_t(y) && u2.same(x, y)) return false;
    }
    return true;
}

McEstimate gluing_event_prob(PatchPtr patch, double p1, double p2, double h, std::span<const VertexId> A,
                             std::span<const VertexId> X, std::span<const VertexId> Y, const Region& lambda, int r,
                             std::uint64_t replicas, std::uint64_t seed) {
    check_unit(p1, "probability");
    check_unit(p2, "probability");
    check_unit(h, "ghost intensity");
    if (p1 > p2) throw ArgumentError("gluing event needs p1 <= p2");
    if (A.empty() || X.empty() || Y.empty()) throw ArgumentError("gluing sets must be nonempty");
    if (replicas < 1) throw ArgumentError("at least one replica is required");
    const GraphPatch& g = *patch;
    check_vertices(g, A);
    check_vertices(g, X);
    check_vertices(g, Y);
    if (!lambda.empty() && lambda.size() != g.num_vertices()) throw ArgumentError("region size mismatch");
    const Region thick = thicken(g, lambda, r);
    auto acc = replicate(
        0, replicas, [] { return std::uint64_t{0}; },
        [&](std::uint64_t& hits, std::uint64_t rep) {
            OpenMask o1(g.num_edges()), o2(g.num_edges());
            for (EdgeId e = 0; e < g.num_edges(); ++e) {
                const double lab = edge_label(seed, rep, e);
                o1[e] = lab <= p1;
                o2[e] = lab <= p2;
            }
            std::vector<std::uint8_t> ghost(g.num_vertices(), 0);
            for (VertexId a : A) ghost[a] = ghost_bit(seed, Stream::GhostA, rep, a, h);
            if (gluing_event(g, o1, o2, ghost, A, X, Y, lambda, thick)) ++hits;
        },
        [](std::uint64_t& into, std::uint64_t from) { into += from; });
    return proportion_estimate(acc, replicas, seed, g.radius());
}

McEstimate gluing_event_prob(const GraphFamily& family, int radius, double p1, double p2, double h,
                             std::span<const VertexId> A, std::span<const VertexId> X, std::span<const VertexId> Y,
                             const Region& lambda, std::optional<int> r, std::uint64_t replicas, std::uint64_t seed) {
    int rr = 0;
    if (r) {
        rr = *r;
    } else {
        const auto found = default_gluing_radius(family, p1, h, radius, replicas, derive_seed(seed, 77));
        if (!found) throw ArgumentError("no admissible gluing radius within the patch; supply r explicitly");
        rr = *found;
    }
    return gluing_event_prob(cached_patch(family, radius), p1, p2, h, A, X, Y, lambda, rr, replicas, seed);
}

SnowballResult snowball_chain(const GraphFamily& family, int radius, double p1, double p2,
                              std::span<const VertexId> centers, int b, double h, std::uint64_t replicas,
                              std::uint64_t seed) {
    if (centers.empty()) throw ArgumentError("snowball chain needs at least one centre");
    if (b < 0) throw ArgumentError("ball radius must be nonnegative");
    check_unit(h, "ghost intensity");
    if (p1 > p2) throw ArgumentError("snowball chain needs p1 <= p2");
    const PatchPtr patch = cached_patch(family, radius);
    check_vertices(*patch, centers);
    BfsWorkspace ws(*patch);
    auto ball_at = [&](VertexId c) {
        ws.run_from(c, b);
        std::vector<VertexId> out = ws.order();
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto first = ball_at(centers.front()), last = ball_at(centers.back());
    SnowballResult res;
    res.lhs = est_two_point(patch, p2, first, last, {}, replicas, derive_seed(seed, 1));
    res.first = est_two_point(patch, p1, first, first, {}, replicas, derive_seed(seed, 2));
    res.last = est_two_point(patch, p1, last, last, {}, replicas, derive_seed(seed, 3));
    res.rhs = res.first.mean * res.last.mean;
    res.ratio = res.rhs > 0 ? res.lhs.mean / res.rhs : std::numeric_limits<double>::infinity();
    return res;
}

}  // namespace perclab
