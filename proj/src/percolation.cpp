#include "perclab/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>

#include "perclab/errors.hpp"
#include "perclab/geometry.hpp"

namespace perclab {

double sprinkle(double p, double lambda) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("sprinkle requires 0 < p < 1");
    if (std::isnan(lambda)) throw DomainError("sprinkle requires a real lambda");
    if (lambda == std::numeric_limits<double>::infinity()) return 1.0;
    return -std::expm1(std::exp(lambda) * std::log1p(-p));
}

double delta(double p, double q) {
    if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0)) throw DomainError("delta requires p, q in (0,1)");
    const double lo = std::min(p, q), hi = std::max(p, q);
    return std::log(std::log1p(-hi) / std::log1p(-lo));
}

EdgeLabels sample_labels(PatchPtr patch, std::uint64_t seed, std::uint64_t replica) {
    EdgeLabels out;
    out.labels.resize(patch->num_edges());
    for (EdgeId e = 0; e < out.labels.size(); ++e) out.labels[e] = edge_label(seed, replica, e);
    out.patch = std::move(patch);
    out.seed = seed;
    out.replica = replica;
    return out;
}

void open_mask(std::span<const double> labels, double p, OpenMask& out) {
    out.resize(labels.size());
    for (std::size_t e = 0; e < labels.size(); ++e) out[e] = labels[e] <= p;
}

OpenMask open_mask(const EdgeLabels& labels, double p) {
    OpenMask m;
    open_mask(labels.labels, p, m);
    return m;
}

ClusterForest::ClusterForest(const GraphPatch& patch)
    : patch_(&patch),
      uf_(patch.num_vertices()),
      touches_(patch.num_vertices()),
      min_dist_(patch.distances()),
      max_dist_(patch.distances()) {
    for (VertexId v = 0; v < patch.num_vertices(); ++v) touches_[v] = patch.on_boundary(v);
}

ClusterForest::ClusterForest(const GraphPatch& patch, const OpenMask& open, int restrict_radius)
    : ClusterForest(patch) {
    if (open.size() != patch.num_edges()) throw ArgumentError("open mask size does not match patch");
    for (EdgeId e = 0; e < open.size(); ++e) {
        if (!open[e]) continue;
        const auto& ed = patch.edge(e);
        if (restrict_radius >= 0 && (patch.dist(ed.u) > restrict_radius || patch.dist(ed.v) > restrict_radius))
            continue;
        add_edge(e);
    }
}

bool ClusterForest::add_edge(EdgeId e) {
    const auto& ed = patch_->edge(e);
    const auto a = uf_.find(ed.u), b = uf_.find(ed.v);
    const auto root = uf_.unite(a, b);
    if (root == UINT32_MAX) return false;
    const auto other = root == a ? b : a;
    touches_[root] = touches_[root] | touches_[other];
    min_dist_[root] = std::min(min_dist_[root], min_dist_[other]);
    max_dist_[root] = std::max(max_dist_[root], max_dist_[other]);
    return true;
}

ClusterForest clusters(const EdgeLabels& labels, double p) {
    return ClusterForest(*labels.patch, open_mask(labels, p));
}

LabelSweep::LabelSweep(const EdgeLabels& labels)
    : labels_(&labels), order_(labels.labels.size()), forest_(*labels.patch) {
    for (EdgeId e = 0; e < order_.size(); ++e) order_[e] = e;
    std::stable_sort(order_.begin(), order_.end(),
                     [&](EdgeId a, EdgeId b) { return labels.labels[a] < labels.labels[b]; });
}

void LabelSweep::advance_to(double p) {
    if (p < p_) throw ArgumentError("sweeps only move upward in p");
    while (next_ < order_.size() && labels_->labels[order_[next_]] <= p) forest_.add_edge(order_[next_++]);
    p_ = p;
}

std::vector<double> LabelSweep::breakpoints() const {
    std::vector<double> out;
    for (EdgeId e : order_) out.push_back(labels_->labels[e]);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Region region_of(const GraphPatch& patch, std::span<const VertexId> vertices) {
    Region r(patch.num_vertices(), 0);
    for (VertexId v : vertices) {
        if (v >= r.size()) throw OutOfPatchError("region vertex outside patch");
        r[v] = 1;
    }
    return r;
}

namespace {
void check_mask(const GraphPatch& patch, const OpenMask& open) {
    if (open.size() != patch.num_edges()) throw ArgumentError("open mask size does not match patch");
}
}  // namespace

bool connected(const GraphPatch& patch, const OpenMask& open, std::span<const VertexId> A,
               std::span<const VertexId> B, const Region& lambda) {
    if (A.empty() || B.empty()) throw ArgumentError("connection sets must be nonempty");
    check_mask(patch, open);
    if (!lambda.empty() && lambda.size() != patch.num_vertices()) throw ArgumentError("region size mismatch");
    auto inside = [&](VertexId v) { return lambda.empty() || lambda[v]; };
    std::vector<std::uint8_t> target(patch.num_vertices(), 0), seen(patch.num_vertices(), 0);
    for (VertexId b : B) {
        if (b >= patch.num_vertices()) throw OutOfPatchError("vertex outside patch");
        target[b] = 1;
    }
    std::vector<VertexId> stack;
    for (VertexId a : A) {
        if (a >= patch.num_vertices()) throw OutOfPatchError("vertex outside patch");
        if (inside(a) && !seen[a]) {
            seen[a] = 1;
            stack.push_back(a);
        }
    }
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        if (target[v]) return true;
        for (const auto& inc : patch.neighbors(v)) {
            if (!open[inc.edge] || seen[inc.vertex] || !inside(inc.vertex)) continue;
            seen[inc.vertex] = 1;
            stack.push_back(inc.vertex);
        }
    }
    return false;
}

bool connected(const EdgeLabels& labels, double p, std::span<const VertexId> A, std::span<const VertexId> B,
               const Region& lambda) {
    return connected(*labels.patch, open_mask(labels, p), A, B, lambda);
}

namespace {
void check_scales(const GraphPatch& patch, int m, int n) {
    if (m > n) throw ArgumentError("Piv requires m <= n");
    if (m < 1) throw ArgumentError("Piv requires m >= 1");
    if (n > patch.radius()) throw OutOfPatchError("Piv scale exceeds patch radius");
}

// Roots of clusters of omega ∩ B_n meeting both B_m and S_n. A connected cluster that meets
// B_m and S_n also meets S_m, so this serves both the S_m and the B_m conventions.
std::vector<std::uint32_t> crossing_roots(const GraphPatch& patch, ClusterForest& forest, int m, int n) {
    std::vector<std::uint32_t> roots;
    auto [a, b] = patch.sphere_range(n);
    for (VertexId v = a; v < b; ++v) {
        if (forest.min_dist(v) <= m) roots.push_back(forest.find(v));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}
}  // namespace

bool piv_event(const GraphPatch& patch, const OpenMask& open, int m, int n) {
    check_scales(patch, m, n);
    check_mask(patch, open);
    ClusterForest forest(patch, open, n);
    return crossing_roots(patch, forest, m, n).size() >= 2;
}

bool piv_event(const EdgeLabels& labels, double p, int m, int n) {
    return piv_event(*labels.patch, open_mask(labels, p), m, n);
}

bool piv_two_param(const GraphPatch& patch, const OpenMask& open_p, const OpenMask& open_q, int m, int n) {
    check_scales(patch, m, n);
    check_mask(patch, open_p);
    check_mask(patch, open_q);
    for (EdgeId e = 0; e < open_p.size(); ++e)
        if (open_p[e] && !open_q[e]) throw ArgumentError("piv_two_param requires omega_p ⊆ omega_q (p <= q)");
    ClusterForest fp(patch, open_p, n);
    ClusterForest fq(patch, open_q, n);
    const auto roots = crossing_roots(patch, fp, m, n);
    std::vector<std::uint32_t> joined;
    for (auto r : roots) joined.push_back(fq.find(r));
    std::sort(joined.begin(), joined.end());
    joined.erase(std::unique(joined.begin(), joined.end()), joined.end());
    return joined.size() >= 2;
}

bool piv_two_param(const EdgeLabels& labels, double p, double q, int m, int n) {
    if (p > q) throw ArgumentError("piv_two_param requires p <= q");
    return piv_two_param(*labels.patch, open_mask(labels, p), open_mask(labels, q), m, n);
}

bool two_ghost_event(const GraphPatch& patch, const OpenMask& open, EdgeId e, std::uint64_t n) {
    check_mask(patch, open);
    if (e >= patch.num_edges()) throw OutOfPatchError("edge outside patch");
    if (n < 1) throw ArgumentError("two-ghost size threshold must be at least 1");
    if (open[e]) return false;
    ClusterForest forest(patch, open);
    const auto& ed = patch.edge(e);
    if (forest.same(ed.u, ed.v)) return false;
    if (forest.size(ed.u) < n || forest.size(ed.v) < n) return false;
    return !forest.touches_boundary(ed.u) || !forest.touches_boundary(ed.v);
}

bool two_ghost_event(const EdgeLabels& labels, double p, EdgeId e, std::uint64_t n) {
    return two_ghost_event(*labels.patch, open_mask(labels, p), e, n);
}

bool wired_connected(const GraphPatch& patch, const OpenMask& open, VertexId u, VertexId v) {
    check_mask(patch, open);
    if (u >= patch.num_vertices() || v >= patch.num_vertices()) throw OutOfPatchError("vertex outside patch");
    ClusterForest forest(patch, open);
    return forest.same(u, v) || (forest.touches_boundary(u) && forest.touches_boundary(v));
}

bool wired_connected(const EdgeLabels& labels, double p, VertexId u, VertexId v) {
    return wired_connected(*labels.patch, open_mask(labels, p), u, v);
}

ConfigurationDump dump_configuration(const EdgeLabels& labels, double p) {
    ConfigurationDump d;
    d.seed = labels.seed;
    d.replica = labels.replica;
    d.p = p;
    d.family = labels.patch->family().name();
    d.radius = labels.patch->radius();
    for (EdgeId e = 0; e < labels.labels.size(); ++e)
        if (labels.labels[e] <= p) d.open_edges.push_back(e);
    return d;
}

void write_configuration(std::ostream& out, const ConfigurationDump& d) {
    out << "perclab-config 1\n";
    out << "seed " << d.seed << "\n";
    out << "replica " << d.replica << "\n";
    out << "p " << std::setprecision(17) << d.p << "\n";
    out << "patch " << d.family << ' ' << d.radius << "\n";
    out << "open " << d.open_edges.size() << "\n";
    for (std::size_t i = 0; i < d.open_edges.size(); ++i) out << (i ? " " : "") << d.open_edges[i];
    out << "\n";
}

ConfigurationDump read_configuration(std::istream& in) {
    ConfigurationDump d;
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "perclab-config" || version != 1)
        throw ParseError("configuration dump: bad header");
    std::size_t count = 0;
    if (!(in >> word >> d.seed) || word != "seed") throw ParseError("configuration dump: seed");
    if (!(in >> word >> d.replica) || word != "replica") throw ParseError("configuration dump: replica");
    if (!(in >> word >> d.p) || word != "p") throw ParseError("configuration dump: p");
    if (!(in >> word >> d.family >> d.radius) || word != "patch") throw ParseError("configuration dump: patch");
    if (!(in >> word >> count) || word != "open") throw ParseError("configuration dump: open count");
    d.open_edges.resize(count);
    for (auto& e : d.open_edges)
        if (!(in >> e)) throw ParseError("configuration dump: truncated edge list");
    return d;
}

OpenMask mask_from_dump(const GraphPatch& patch, const ConfigurationDump& dump) {
    if (dump.family != patch.family().name() || dump.radius != patch.radius())
        throw ArgumentError("configuration dump belongs to a different patch");
    OpenMask m(patch.num_edges(), 0);
    for (EdgeId e : dump.open_edges) {
        if (e >= m.size()) throw ParseError("configuration dump: edge outside patch");
        m[e] = 1;
    }
    return m;
}

}  // namespace perclab
