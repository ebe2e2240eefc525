#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perclab/family.hpp"
#include "perclab/geometry.hpp"
#include "perclab/patch.hpp"
#include "perclab/percolation.hpp"
#include "perclab/stats.hpp"

namespace perclab {

// ---------------------------------------------------------------- exact enumeration

// Largest number of free edges exact enumeration accepts (2^26 configurations).
inline constexpr std::size_t kMaxEnumerationEdges = 26;

// Sum over all configurations of the listed edges (others closed) of the Bernoulli(p) weight of
// the configurations where `event` holds. `edges` empty means every patch edge.
double exact_probability(const GraphPatch& patch, double p, const std::function<bool(const OpenMask&)>& event,
                         std::span<const EdgeId> edges = {});

// ---------------------------------------------------------------- two-point function

// Minimum over (a, b) in A x B of P_p(a <-> b inside Lambda); every pair is evaluated on the same
// labels in each replica. The returned estimate is the one of the minimising pair.
McEstimate est_two_point(PatchPtr patch, double p, std::span<const VertexId> A, std::span<const VertexId> B,
                         const Region& lambda, std::uint64_t replicas, std::uint64_t seed, double confidence = 0.95);
McEstimate est_two_point(const GraphFamily& family, int radius, double p, VertexId u, VertexId v,
                         const Region& lambda, std::uint64_t replicas, std::uint64_t seed);

// Per-pair connection frequencies on shared labels (row-major over A x B).
struct PairGrid {
    std::vector<McEstimate> cells;
    std::size_t rows = 0, cols = 0;
    const McEstimate& at(std::size_t i, std::size_t j) const { return cells[i * cols + j]; }
};
PairGrid est_pair_grid(PatchPtr patch, double p, std::span<const VertexId> A, std::span<const VertexId> B,
                       const Region& lambda, std::uint64_t replicas, std::uint64_t seed, double confidence = 0.95);

// ---------------------------------------------------------------- corridor function

// Radius of the patch the corridor estimator works on: m + n, or 2m + 2 when n is infinite.
int corridor_patch_radius(int m, std::optional<int> n);

// Default adversarial family of length <= m paths from the root: canonical geodesics to the first,
// middle and last vertex of S_m, a two-leg path turning halfway, and a path hugging S_{m/2}.
std::vector<Path> default_corridor_paths(const GraphPatch& patch, int m);

struct CorridorEstimate {
    McEstimate estimate;        // of the worst path in the family
    Path worst_path;
    std::size_t paths_tested = 0;
    bool upper_bound = true;    // the minimum over a finite family only bounds the infimum from above
    std::optional<int> tube_radius;
};

// kappa_p(m, n): minimum over the path family of P_p(start <-> end inside B_n(path)). n = nullopt
// drops the tube restriction. Paths refer to cached_patch(family, corridor_patch_radius(m, n)).
CorridorEstimate est_corridor(const GraphFamily& family, double p, int m, std::optional<int> n,
                              const std::vector<Path>* paths, std::uint64_t replicas, std::uint64_t seed);

// ---------------------------------------------------------------- Piv and two-ghost

struct PivEstimate {
    McEstimate estimate;
    double ceiling = 0;  // C * [log Gr(n) / n]^{1/2 - eps}
};
PivEstimate est_piv(const GraphFamily& family, int radius, double p, int m, int n, std::uint64_t replicas,
                    std::uint64_t seed, double C = 1.0, double eps = 0.0);

// P_p(Piv[m, n]) for every m in `inner` at once, on shared labels.
std::vector<McEstimate> est_piv_multi(const GraphFamily& family, double p, std::span<const int> inner, int n,
                                      std::uint64_t replicas, std::uint64_t seed, double confidence = 0.95);

// The fixed edge used for two-ghost events: the root's first incidence.
EdgeId root_edge(const GraphPatch& patch);

McEstimate est_two_ghost(const GraphFamily& family, int radius, double p, std::uint64_t n, std::uint64_t replicas,
                         std::uint64_t seed);
// One exploration per replica prices all thresholds.
std::vector<McEstimate> est_two_ghost_multi(const GraphFamily& family, int radius, double p,
                                            std::span<const std::uint64_t> ns, std::uint64_t replicas,
                                            std::uint64_t seed);

// ---------------------------------------------------------------- sphere connection

McEstimate est_sphere_connection(const GraphFamily& family, int radius, double p, int r, std::uint64_t replicas,
                                 std::uint64_t seed);
// Shared labels across radii, so the estimates are nonincreasing in r replica by replica.
std::vector<McEstimate> est_sphere_connection_multi(const GraphFamily& family, int radius, double p,
                                                    std::span<const int> rs, std::uint64_t replicas,
                                                    std::uint64_t seed);

// ---------------------------------------------------------------- critical point

enum class PcCriterion { BoxCrossing, RootToSphere };
std::string criterion_name(PcCriterion c);
PcCriterion parse_criterion(const std::string& s);

struct PcOptions {
    // Crossing threshold; NaN selects 1/2 for box crossing and 0.05 for root-to-sphere.
    double threshold = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t min_replicas = 1000;
    std::uint64_t replica_cap = 1000000;
    double ci_target = 0.005;
};

struct PcProbe {
    double p = 0;
    McEstimate crossing;
    int verdict = 0;  // -1 below threshold, +1 above, 0 unresolved
};

struct PcEstimate {
    std::string family;
    int L = 0;
    PcCriterion criterion = PcCriterion::BoxCrossing;
    double threshold = 0.5;
    double p_hat = 0;
    // distribution-free interval for the threshold quantile from order statistics
    double p_hat_lo = 0;
    double p_hat_hi = 1;
    double p_lo = 0;
    double p_hi = 1;
    bool resolved = false;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
    double confidence = 0.95;
    std::vector<PcProbe> probes;
};

// Per-replica critical label: the smallest p at which the criterion's crossing occurs in that
// replica's coupling. The crossing probability at p is the fraction of samples <= p.
class CrossingSampler {
public:
    CrossingSampler(const GraphFamily& family, int L, PcCriterion criterion);
    ~CrossingSampler();
    CrossingSampler(CrossingSampler&&) noexcept;
    double sample(std::uint64_t seed, std::uint64_t replica) const;
    std::size_t num_vertices() const;
    std::size_t num_edges() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

PcEstimate est_pc(const GraphFamily& family, int L, PcCriterion criterion, double tolerance, double confidence,
                  std::uint64_t seed, const PcOptions& options = {});

// ---------------------------------------------------------------- burn-in

// Largest b in [1, floor(cbrt m)/8] whose Piv[4b, floor(cbrt m)] upper CI bound is <= 1/log m; 0 if none.
int burnin_b(const GraphFamily& family, int radius, std::int64_t m, double p, std::uint64_t replicas,
             std::uint64_t seed);

struct BurninResult {
    double value = 0;                     // may be +infinity
    std::vector<int> scales;              // L(G, D) ∩ [(log n)^{1/2}, n]
    std::map<std::int64_t, int> b_values;  // b(m) for the scales evaluated (stops at the first b <= 1)
};
BurninResult burnin_total(const GraphFamily& family, int radius, std::int64_t n, double p, double D,
                          std::uint64_t replicas, std::uint64_t seed);
// Recomputes the burn-in from stored b(m) values.
double burnin_from_b(const GraphFamily& family, const std::vector<int>& scales,
                     const std::map<std::int64_t, int>& b_values);

// ---------------------------------------------------------------- analytic comparisons

// (d/(d-1)) (1/(1-p(d-1))) (p(d-1))^dist, valid for p < 1/(d-1).
double path_counting_bound(double p, int d, int dist);

struct CerfResult {
    McEstimate lhs;            // P(Piv[r, n])
    McEstimate piv_half;       // P(Piv[1, n/2])
    McEstimate min_two_point;  // min over a, b in S_r of P(a <-> b inside B_m)
    double rhs = 0;
    bool holds = false;  // lhs lower CI bound <= rhs
};
CerfResult cerf_check(const GraphFamily& family, int radius, double p, int r, int m, int n, std::uint64_t replicas,
                      std::uint64_t seed);

}  // namespace perclab
