#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "perclab/patch.hpp"
#include "perclab/rng.hpp"
#include "perclab/union_find.hpp"

namespace perclab {

// 1 - (1-p)^{e^lambda}; lambda = +inf gives 1.
double sprinkle(double p, double lambda);
// log[log(1 - max) / log(1 - min)], the sprinkling distance between p and q.
double delta(double p, double q);

// Label of edge e in replica `replica` of the coupling seeded by `seed`.
inline double edge_label(std::uint64_t seed, std::uint64_t replica, EdgeId e) noexcept {
    return uniform(seed, Stream::EdgeLabel, replica, e);
}

struct EdgeLabels {
    PatchPtr patch;
    std::vector<double> labels;
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
    std::string generator_id = kGeneratorId;
};

EdgeLabels sample_labels(PatchPtr patch, std::uint64_t seed, std::uint64_t replica = 0);

// Open-edge indicator of omega_p for given labels (label <= p).
using OpenMask = std::vector<std::uint8_t>;
OpenMask open_mask(const EdgeLabels& labels, double p);
void open_mask(std::span<const double> labels, double p, OpenMask& out);

// Cluster decomposition of an open subgraph with per-cluster flags kept up to date on merges.
class ClusterForest {
public:
    explicit ClusterForest(const GraphPatch& patch);
    ClusterForest(const GraphPatch& patch, const OpenMask& open, int restrict_radius = -1);

    // Add edge e (used by sweeps); returns true when two clusters merged.
    bool add_edge(EdgeId e);

    std::uint32_t find(VertexId v) { return uf_.find(v); }
    bool same(VertexId a, VertexId b) { return uf_.same(a, b); }
    std::uint32_t size(VertexId v) { return uf_.size_of(v); }
    bool touches_boundary(VertexId v) { return touches_[uf_.find(v)] != 0; }
    int min_dist(VertexId v) { return min_dist_[uf_.find(v)]; }
    int max_dist(VertexId v) { return max_dist_[uf_.find(v)]; }
    std::size_t num_clusters() const { return uf_.components(); }
    const GraphPatch& patch() const { return *patch_; }

private:
    const GraphPatch* patch_;
    UnionFind uf_;
    std::vector<std::uint8_t> touches_;
    std::vector<int> min_dist_;
    std::vector<int> max_dist_;
};

ClusterForest clusters(const EdgeLabels& labels, double p);

// Newman-Ziff style sweep: edges are merged in label order, so advancing to p yields
// exactly the clusters of omega_p.
class LabelSweep {
public:
    explicit LabelSweep(const EdgeLabels& labels);
    void advance_to(double p);
    double current_p() const noexcept { return p_; }
    ClusterForest& forest() noexcept { return forest_; }
    // Sorted distinct label values (the breakpoints of the sweep).
    std::vector<double> breakpoints() const;

private:
    const EdgeLabels* labels_;
    std::vector<EdgeId> order_;
    std::size_t next_ = 0;
    double p_ = 0;
    ClusterForest forest_;
};

// Vertex subset represented as a membership mask over patch vertices; empty = whole patch.
using Region = std::vector<std::uint8_t>;
Region region_of(const GraphPatch& patch, std::span<const VertexId> vertices);

// Open path within Lambda (all path vertices in Lambda) from A to B.
bool connected(const GraphPatch& patch, const OpenMask& open, std::span<const VertexId> A,
               std::span<const VertexId> B, const Region& lambda = {});
bool connected(const EdgeLabels& labels, double p, std::span<const VertexId> A, std::span<const VertexId> B,
               const Region& lambda = {});

// At least two distinct clusters of omega ∩ B_n meet both S_m and S_n.
bool piv_event(const GraphPatch& patch, const OpenMask& open, int m, int n);
bool piv_event(const EdgeLabels& labels, double p, int m, int n);

// Two distinct omega_p clusters meet B_m and S_n but are not joined in B_n ∩ omega_q.
bool piv_two_param(const GraphPatch& patch, const OpenMask& open_p, const OpenMask& open_q, int m, int n);
bool piv_two_param(const EdgeLabels& labels, double p, double q, int m, int n);

// e closed, endpoints in distinct clusters each of size >= n, at least one avoiding the boundary.
bool two_ghost_event(const GraphPatch& patch, const OpenMask& open, EdgeId e, std::uint64_t n);
bool two_ghost_event(const EdgeLabels& labels, double p, EdgeId e, std::uint64_t n);

// u <-> v, or both clusters reach the patch boundary.
bool wired_connected(const GraphPatch& patch, const OpenMask& open, VertexId u, VertexId v);
bool wired_connected(const EdgeLabels& labels, double p, VertexId u, VertexId v);

// Replayable configuration dump: header (seed, replica, p, patch) and sorted open-edge list.
struct ConfigurationDump {
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
    double p = 0;
    std::string family;
    int radius = 0;
    std::vector<EdgeId> open_edges;
};
ConfigurationDump dump_configuration(const EdgeLabels& labels, double p);
void write_configuration(std::ostream& out, const ConfigurationDump& dump);
ConfigurationDump read_configuration(std::istream& in);
OpenMask mask_from_dump(const GraphPatch& patch, const ConfigurationDump& dump);

}  // namespace perclab
