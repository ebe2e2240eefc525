#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perclab/geometry.hpp"
#include "perclab/patch.hpp"
#include "perclab/stats.hpp"

namespace perclab {

// Lazy walk: stay with probability 1/2, else step to a uniform neighbour of the full lattice.
// Throws TruncationError if the chosen neighbour lies outside the patch.
Path lazy_walk(const GraphPatch& patch, VertexId start, int t, std::uint64_t seed, std::uint64_t replica = 0);

// Same walk, but stops early (without error) once it reaches `stop_dist` from the root.
Path lazy_walk_until(const GraphPatch& patch, VertexId start, int t, int stop_dist, std::uint64_t seed,
                     std::uint64_t replica);

struct WalkDistribution {
    const GraphPatch* patch = nullptr;
    VertexId start = 0;
    int t = 0;
    std::vector<double> mass;  // indexed by vertex
    double truncation_mass = 0;
};

// Largest t for which the time-t law from `start` stays inside the patch.
int max_exact_time(const GraphPatch& patch, VertexId start);

// Time-t law of the lazy walk by t sparse transition steps; requires t <= max_exact_time.
WalkDistribution heat_kernel_exact(const GraphPatch& patch, VertexId start, int t);
// Laws at every time 0..t.
std::vector<WalkDistribution> heat_kernel_series(const GraphPatch& patch, VertexId start, int t);

double entropy(const WalkDistribution& dist);
double total_variation(const WalkDistribution& a, const WalkDistribution& b);

struct CheckMargin {
    int t = 0;
    VertexId u = 0, v = 0;
    int n = 0;  // ball radius for escape checks
    double value = 0;
    double bound = 0;
};

struct WalkCheckReport {
    std::string name;
    std::uint64_t checks = 0;
    std::uint64_t violations = 0;
    double max_ratio = 0;  // largest value / bound seen
    CheckMargin worst;
    std::vector<CheckMargin> margins;  // one row per check
    std::optional<double> constant;     // fitted constant where the check reports one
    bool passed() const noexcept { return violations == 0; }
};

// p_t(o, v) <= 2 sqrt(deg v / deg o) exp(-d(o,v)^2 / 2t) for all v and 1 <= t <= t_max, plus the
// ball-escape bound P(max_{s<=t} d(X_0, X_s) >= n) <= 2(t+1) Gr(n) exp(-n^2/2t). The root stands
// for every vertex by transitivity.
WalkCheckReport vc_check(const GraphPatch& patch, int t_max);
WalkCheckReport ball_escape_check(const GraphPatch& patch, int t_max);

// Average over neighbours x of the root of ||P_o(X_t) - P_x(X_{t-1})||_TV^2 <= H_t - H_{t-1}.
// The report's constant is the smallest C with H_t <= C (log Gr(t^{1/2}))^2 over the range.
WalkCheckReport cool_inequality_check(const GraphPatch& patch, int t_max);

struct KernelDecay {
    int t = 0;
    double max_kernel = 0;  // max_v p_t(o, v)
    double scale = 0;       // t^{1/2} (log Gr(t^{1/2}))^{-1/2}
    int radius_allowed = 0; // largest k with Gr(k) <= 1 / max_kernel
    double c = 0;           // largest c in (0,1] with max_kernel <= 1/Gr(ceil(c * scale)); 0 if none
    double c_uncapped = 0;  // radius_allowed / scale
    bool vacuous = false;   // scale < 1: the inner radius is below one step for every c <= 1
};
std::vector<KernelDecay> kernel_decay_constant(const GraphPatch& patch, const std::vector<int>& t_set);

// ---------------------------------------------------------------- ironing

struct IronedPath {
    Path original;
    int thickness = 0;
    std::vector<std::size_t> crease_times;  // tau_0 = 0 < ... < tau_cr = len
    std::vector<VertexId> crease_points;
    Path ironed;
    bool iron_in_path = false;  // B_r(ironed) ⊆ B_2r(original)
    bool path_in_iron = false;  // B_r(original) ⊆ B_2r(ironed)
    std::size_t crease_number() const noexcept { return crease_times.empty() ? 0 : crease_times.size() - 1; }
};

IronedPath iron(const Path& path, int r, const GraphPatch& patch);

// Empirical check of P(cr_r(X^t) > t/m) <= 2 t m Gr(r) exp(-r^2 / 2m) for lazy walks from the root.
struct CreaseBoundResult {
    int t = 0, m = 0, r = 0;
    McEstimate lhs;
    double rhs = 0;
    bool holds = false;  // lhs lower CI bound <= rhs
};
CreaseBoundResult crease_bound_check(const GraphFamily& family, int t, int m, int r, std::uint64_t replicas,
                                     std::uint64_t seed);

// ---------------------------------------------------------------- coupled walks

struct CoupledPair {
    Path walk_x;
    Path walk_y;
    bool coalesced = false;
};

// Endpoints from the maximal coupling of the exact time-t laws, trajectories by bridge sampling.
CoupledPair coupled_pair(const GraphPatch& patch, VertexId x, VertexId y, int t, std::uint64_t seed,
                         std::uint64_t replica = 0);

}  // namespace perclab
