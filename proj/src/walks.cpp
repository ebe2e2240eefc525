#include "perclab/walks.hpp"

#include <algorithm>
#include <climits>
#include <cmath>

#include "perclab/errors.hpp"
#include "perclab/parallel.hpp"
#include "perclab/rng.hpp"

namespace perclab {

namespace {

bool leak_free(const GraphPatch& patch) {
    for (VertexId v = 0; v < patch.num_vertices(); ++v)
        if (static_cast<int>(patch.patch_degree(v)) != patch.degree()) return false;
    return true;
}

void check_vertex(const GraphPatch& patch, VertexId v) {
    if (v >= patch.num_vertices()) throw OutOfPatchError("vertex outside patch");
}

std::uint64_t growth_at(const GraphPatch& patch, int k) {
    if (k <= patch.radius()) return patch.growth(k);
    return growth_of(patch.family(), k);
}

// One lazy step of the walk law; returns the mass pushed through the patch boundary.
double lazy_step(const GraphPatch& patch, const std::vector<double>& from, std::vector<double>& to) {
    const double d = patch.degree();
    std::fill(to.begin(), to.end(), 0.0);
    double leaked = 0;
    for (VertexId v = 0; v < from.size(); ++v) {
        const double m = from[v];
        if (m == 0) continue;
        to[v] += 0.5 * m;
        const double share = 0.5 * m / d;
        for (const auto& inc : patch.neighbors(v)) to[inc.vertex] += share;
        leaked += share * (d - static_cast<double>(patch.patch_degree(v)));
    }
    return leaked;
}

}  // namespace

Path lazy_walk_until(const GraphPatch& patch, VertexId start, int t, int stop_dist, std::uint64_t seed,
                     std::uint64_t replica) {
    check_vertex(patch, start);
    if (t < 0) throw ArgumentError("walk length must be nonnegative");
    CounterStream rng(seed, Stream::Walk, replica);
    const auto d = static_cast<std::uint64_t>(patch.degree());
    Path path{start};
    path.reserve(static_cast<std::size_t>(t) + 1);
    VertexId cur = start;
    for (int s = 0; s < t; ++s) {
        if (stop_dist >= 0 && patch.dist(cur) >= stop_dist) break;
        const std::uint64_t u = rng.below(2 * d);
        if (u >= d) {
            const auto nb = patch.neighbors(cur);
            const std::uint64_t k = u - d;
            if (k >= nb.size()) throw TruncationError("lazy walk left the patch; enlarge the radius");
            cur = nb[k].vertex;
        }
        path.push_back(cur);
    }
    return path;
}

Path lazy_walk(const GraphPatch& patch, VertexId start, int t, std::uint64_t seed, std::uint64_t replica) {
    return lazy_walk_until(patch, start, t, -1, seed, replica);
}

int max_exact_time(const GraphPatch& patch, VertexId start) {
    check_vertex(patch, start);
    if (patch.family().finite() && leak_free(patch)) return INT_MAX;
    return patch.radius() - patch.dist(start);
}

std::vector<WalkDistribution> heat_kernel_series(const GraphPatch& patch, VertexId start, int t) {
    if (t < 0) throw ArgumentError("time must be nonnegative");
    if (t > max_exact_time(patch, start)) throw TruncationError("exact kernel time exceeds the patch; enlarge the radius");
    std::vector<WalkDistribution> out;
    WalkDistribution cur{&patch, start, 0, std::vector<double>(patch.num_vertices(), 0.0), 0.0};
    cur.mass[start] = 1.0;
    out.push_back(cur);
    for (int s = 1; s <= t; ++s) {
        WalkDistribution next{&patch, start, s, std::vector<double>(patch.num_vertices(), 0.0), cur.truncation_mass};
        next.truncation_mass += lazy_step(patch, cur.mass, next.mass);
        out.push_back(next);
        cur = std::move(next);
    }
    return out;
}

WalkDistribution heat_kernel_exact(const GraphPatch& patch, VertexId start, int t) {
    auto series = heat_kernel_series(patch, start, t);
    return std::move(series.back());
}

double entropy(const WalkDistribution& dist) {
    if (dist.truncation_mass > 0) throw TruncationError("entropy of a truncated distribution");
    double h = 0;
    for (double m : dist.mass)
        if (m > 0) h -= m * std::log(m);
    return h;
}

double total_variation(const WalkDistribution& a, const WalkDistribution& b) {
    if (a.mass.size() != b.mass.size()) throw ArgumentError("distributions live on different patches");
    double s = 0;
    for (std::size_t i = 0; i < a.mass.size(); ++i) s += std::abs(a.mass[i] - b.mass[i]);
    return 0.5 * s;
}

namespace {

constexpr double kSlack = 1e-12;

void record(WalkCheckReport& rep, CheckMargin m, CheckMargin& row_worst, bool& row_started) {
    ++rep.checks;
    const double ratio = m.bound > 0 ? m.value / m.bound : (m.value > 0 ? INFINITY : 0.0);
    if (m.value > m.bound * (1 + kSlack) + kSlack * 1e-3) ++rep.violations;
    if (ratio > rep.max_ratio || rep.checks == 1) {
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        rep.worst = m;
    }
    const double row_ratio = row_worst.bound > 0 ? row_worst.value / row_worst.bound : 0.0;
    if (!row_started || ratio > row_ratio) {
        row_worst = m;
        row_started = true;
    }
}

}  // namespace

WalkCheckReport vc_check(const GraphPatch& patch, int t_max) {
    if (t_max < 1) throw ArgumentError("t_max must be at least 1");
    const VertexId o = patch.root();
    const auto series = heat_kernel_series(patch, o, t_max);
    WalkCheckReport rep;
    rep.name = "varopoulos_carne";
    const double deg_o = static_cast<double>(patch.patch_degree(o));
    for (int t = 1; t <= t_max; ++t) {
        CheckMargin row{};
        bool started = false;
        const auto& mass = series[static_cast<std::size_t>(t)].mass;
        for (VertexId v = 0; v < patch.num_vertices(); ++v) {
            const double d = patch.dist(v);
            const double deg_v = patch.on_boundary(v) ? patch.degree() : static_cast<double>(patch.patch_degree(v));
            const double bound = 2.0 * std::sqrt(deg_v / deg_o) * std::exp(-d * d / (2.0 * t));
            record(rep, CheckMargin{t, o, v, 0, mass[v], bound}, row, started);
        }
        rep.margins.push_back(row);
    }
    return rep;
}

WalkCheckReport ball_escape_check(const GraphPatch& patch, int t_max) {
    if (t_max < 1) throw ArgumentError("t_max must be at least 1");
    WalkCheckReport rep;
    rep.name = "ball_escape";
    const VertexId o = patch.root();
    const int n_max = patch.radius();
    const double d = patch.degree();
    for (int n = 1; n <= n_max; ++n) {
        // walk killed on reaching distance n; the escape probability is the killed mass
        const std::size_t inner = patch.growth(n - 1);
        std::vector<double> cur(inner, 0.0), next(inner, 0.0);
        cur[o] = 1.0;
        double escaped = 0;
        CheckMargin row{};
        bool started = false;
        for (int t = 1; t <= t_max; ++t) {
            std::fill(next.begin(), next.end(), 0.0);
            for (VertexId v = 0; v < inner; ++v) {
                const double m = cur[v];
                if (m == 0) continue;
                next[v] += 0.5 * m;
                for (const auto& inc : patch.neighbors(v)) {
                    if (inc.vertex < inner) next[inc.vertex] += 0.5 * m / d;
                    else escaped += 0.5 * m / d;
                }
            }
            std::swap(cur, next);
            const double bound = 2.0 * (t + 1) * static_cast<double>(patch.growth(n)) * std::exp(-double(n) * n / (2.0 * t));
            record(rep, CheckMargin{t, o, o, n, escaped, bound}, row, started);
        }
        rep.margins.push_back(row);
    }
    return rep;
}

WalkCheckReport cool_inequality_check(const GraphPatch& patch, int t_max) {
    if (t_max < 1) throw ArgumentError("t_max must be at least 1");
    if (t_max + 1 > patch.radius() && max_exact_time(patch, patch.root()) != INT_MAX)
        throw TruncationError("cool inequality check needs t_max + 1 <= patch radius");
    const VertexId o = patch.root();
    const auto from_root = heat_kernel_series(patch, o, t_max);
    std::vector<std::vector<WalkDistribution>> from_nb;
    for (const auto& inc : patch.neighbors(o)) from_nb.push_back(heat_kernel_series(patch, inc.vertex, t_max - 1));
    WalkCheckReport rep;
    rep.name = "cool_inequality";
    double C = 0;
    double h_prev = entropy(from_root[0]);
    for (int t = 1; t <= t_max; ++t) {
        double lhs = 0;
        for (const auto& s : from_nb) {
            const double tv = total_variation(from_root[static_cast<std::size_t>(t)], s[static_cast<std::size_t>(t - 1)]);
            lhs += tv * tv;
        }
        lhs /= static_cast<double>(from_nb.size());
        const double h_t = entropy(from_root[static_cast<std::size_t>(t)]);
        CheckMargin row{};
        bool started = false;
        record(rep, CheckMargin{t, o, o, 0, lhs, h_t - h_prev}, row, started);
        rep.margins.push_back(row);
        const int k = static_cast<int>(std::floor(std::sqrt(static_cast<double>(t))));
        const double lg = std::log(static_cast<double>(growth_at(patch, k)));
        if (lg > 0) C = std::max(C, h_t / (lg * lg));
        h_prev = h_t;
    }
    rep.constant = C;
    return rep;
}

std::vector<KernelDecay> kernel_decay_constant(const GraphPatch& patch, const std::vector<int>& t_set) {
    if (t_set.empty()) return {};
    for (int t : t_set)
        if (t < 4) throw ArgumentError("kernel decay needs t >= 4");
    const int t_max = *std::max_element(t_set.begin(), t_set.end());
    const auto series = heat_kernel_series(patch, patch.root(), t_max);
    std::vector<KernelDecay> out;
    for (int t : t_set) {
        KernelDecay kd;
        kd.t = t;
        const auto& mass = series[static_cast<std::size_t>(t)].mass;
        kd.max_kernel = *std::max_element(mass.begin(), mass.end());
        const int root_t = static_cast<int>(std::floor(std::sqrt(static_cast<double>(t))));
        kd.scale = std::sqrt(static_cast<double>(t)) / std::sqrt(std::log(static_cast<double>(growth_at(patch, root_t))));
        const double cap = 1.0 / kd.max_kernel;
        int k = 0;
        while (static_cast<double>(growth_at(patch, k + 1)) <= cap) ++k;
        kd.radius_allowed = k;
        kd.c_uncapped = k / kd.scale;
        kd.c = std::min(1.0, kd.c_uncapped);
        kd.vacuous = kd.scale < 1.0;
        out.push_back(kd);
    }
    return out;
}

// ---------------------------------------------------------------- ironing

IronedPath iron(const Path& path, int r, const GraphPatch& patch) {
    if (r < 1) throw ArgumentError("ironing thickness must be at least 1");
    if (path.empty()) throw ArgumentError("cannot iron an empty path");
    validate_path(patch, path);
    IronedPath out;
    out.original = path;
    out.thickness = r;
    BfsWorkspace ws(patch);
    const std::size_t len = path.size() - 1;
    std::size_t tau = 0;
    out.crease_times.push_back(0);
    while (tau < len) {
        ws.run_from(path[tau], r);
        std::size_t next = len;
        for (std::size_t s = tau + 1; s <= len; ++s) {
            if (!ws.reached(path[s]) || ws.distance(path[s]) >= r) {
                next = s;
                break;
            }
        }
        out.crease_times.push_back(next);
        tau = next;
    }
    for (auto tm : out.crease_times) out.crease_points.push_back(path[tm]);
    out.ironed.push_back(path.front());
    for (std::size_t i = 0; i + 1 < out.crease_points.size(); ++i) {
        const Path leg = geodesic(patch, out.crease_points[i], out.crease_points[i + 1], ws);
        out.ironed.insert(out.ironed.end(), leg.begin() + 1, leg.end());
    }
    // containments, checked on the patch metric
    auto nbhd = [&](const Path& p, int depth) {
        ws.run(p, depth);
        std::vector<std::uint8_t> in(patch.num_vertices(), 0);
        for (VertexId v : ws.order()) in[v] = 1;
        return in;
    };
    auto subset = [](const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] && !b[i]) return false;
        return true;
    };
    const auto iron_r = nbhd(out.ironed, r), path_2r = nbhd(path, 2 * r);
    out.iron_in_path = subset(iron_r, path_2r);
    const auto path_r = nbhd(path, r), iron_2r = nbhd(out.ironed, 2 * r);
    out.path_in_iron = subset(path_r, iron_2r);
    return out;
}

CreaseBoundResult crease_bound_check(const GraphFamily& family, int t, int m, int r, std::uint64_t replicas,
                                     std::uint64_t seed) {
    if (t < 1 || m < 1 || r < 1) throw ArgumentError("crease bound needs t, m, r >= 1");
    const PatchPtr patch = cached_patch(family, t + 1);
    const GraphPatch& g = *patch;
    const double limit = static_cast<double>(t) / m;
    auto hits = replicate(
        0, replicas, [] { return std::uint64_t{0}; },
        [&](std::uint64_t& h, std::uint64_t rep) {
            const Path walk = lazy_walk(g, g.root(), t, seed, rep);
            if (static_cast<double>(iron(walk, r, g).crease_number()) > limit) ++h;
        },
        [](std::uint64_t& a, std::uint64_t b) { a += b; });
    CreaseBoundResult res;
    res.t = t;
    res.m = m;
    res.r = r;
    res.lhs = proportion_estimate(hits, replicas, seed, t + 1);
    res.rhs = 2.0 * t * m * static_cast<double>(growth_of(family, r)) * std::exp(-double(r) * r / (2.0 * m));
    res.holds = res.lhs.ci_lo <= res.rhs;
    return res;
}

// ---------------------------------------------------------------- coupled walks

namespace {

VertexId draw(CounterStream& rng, const std::vector<double>& weight, double total) {
    double u = rng.uniform() * total;
    VertexId last = 0;
    for (VertexId v = 0; v < weight.size(); ++v) {
        if (weight[v] <= 0) continue;
        last = v;
        if (u < weight[v]) return v;
        u -= weight[v];
    }
    return last;
}

// Trajectory of the lazy walk from `from` conditioned on being at `to` at time t.
Path bridge(const GraphPatch& patch, VertexId from, VertexId to, int t, CounterStream& rng) {
    const auto back = heat_kernel_series(patch, to, t);
    const double d = patch.degree();
    Path path{from};
    VertexId cur = from;
    for (int s = 0; s < t; ++s) {
        const auto& k = back[static_cast<std::size_t>(t - s - 1)].mass;
        std::vector<std::pair<VertexId, double>> opts{{cur, 0.5 * k[cur]}};
        for (const auto& inc : patch.neighbors(cur)) opts.emplace_back(inc.vertex, 0.5 / d * k[inc.vertex]);
        double total = 0;
        for (const auto& o : opts) total += o.second;
        double u = rng.uniform() * total;
        VertexId pick = opts.back().first;
        for (const auto& o : opts) {
            if (o.second <= 0) continue;
            pick = o.first;
            if (u < o.second) break;
            u -= o.second;
        }
        cur = pick;
        path.push_back(cur);
    }
    if (cur != to) throw std::logic_error("bridge sampling missed its endpoint");
    return path;
}

}  // namespace

CoupledPair coupled_pair(const GraphPatch& patch, VertexId x, VertexId y, int t, std::uint64_t seed,
                         std::uint64_t replica) {
    check_vertex(patch, x);
    check_vertex(patch, y);
    if (t < 0) throw ArgumentError("time must be nonnegative");
    const auto px = heat_kernel_exact(patch, x, t), py = heat_kernel_exact(patch, y, t);
    const std::size_t n = patch.num_vertices();
    std::vector<double> common(n), only_x(n), only_y(n);
    double overlap = 0;
    for (std::size_t v = 0; v < n; ++v) {
        common[v] = std::min(px.mass[v], py.mass[v]);
        only_x[v] = px.mass[v] - common[v];
        only_y[v] = py.mass[v] - common[v];
        overlap += common[v];
    }
    CounterStream rng(seed, Stream::Coupling, replica);
    VertexId zx = 0, zy = 0;
    CoupledPair out;
    if (rng.uniform() < overlap) {
        zx = zy = draw(rng, common, overlap);
        out.coalesced = true;
    } else {
        const double rest = 1.0 - overlap;
        zx = draw(rng, only_x, rest);
        zy = draw(rng, only_y, rest);
        out.coalesced = zx == zy;
    }
    for (VertexId z : {zx, zy})
        if (t > max_exact_time(patch, z)) throw TruncationError("bridge endpoint too close to the patch boundary");
    out.walk_x = bridge(patch, x, zx, t, rng);
    out.walk_y = bridge(patch, y, zy, t, rng);
    return out;
}

}  // namespace perclab
