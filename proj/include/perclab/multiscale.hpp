#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perclab/estimators.hpp"
#include "perclab/family.hpp"
#include "perclab/patch.hpp"
#include "perclab/stats.hpp"

namespace perclab {

// ---------------------------------------------------------------- schedule

// Scales n_i = exp(exp(exp(l_i))) with l_i = l_0 + i log 9 are kept in triple-log form only;
// n_1 is already astronomically large for n_0 = 16.
struct Schedule {
    double n0 = 16;
    double p0 = 0.5;
    double K = 0;
    double burnin_value = 0;
    std::vector<double> logloglog_n;  // i = 0..i_max
    std::vector<double> delta;        // i = 0..i_max-1
    std::vector<double> p;            // i = 0..i_max
};

Schedule make_schedule(double n0, double p0, double K, double burnin_value, int i_max);

// Total sprinkling sum_i delta_i in closed form.
double schedule_total_sprinkling(const Schedule& s);
double p_infinity(const Schedule& s);
// sprinkle(p0, 2 (log log n0)^{-1/2} + K burnin), an upper bound for p_infinity.
double p_infinity_bound(const Schedule& s);

std::string schedule_to_json(const Schedule& s);

// ---------------------------------------------------------------- desk-scale statements

// exp(-(log log n)^{1/2}); 1 when log log n <= 0.
double full_space_threshold(double n);

struct FullSpaceVerdict {
    McEstimate min_estimate;
    VertexId worst_u = 0, worst_v = 0;
    double threshold = 0;
    double margin = 0;          // min_estimate.mean - threshold
    bool holds = false;         // point estimate >= threshold
    bool holds_lower = false;   // lower CI bound >= threshold
    bool holds_upper = false;   // upper CI bound >= threshold
    bool sampled = false;       // pairs were sampled rather than exhaustive
    std::size_t pairs_tested = 0;
};

// Deterministic vertex sample of B_n: all of it when |B_n| <= max_exhaustive, otherwise the
// first, middle and last vertex of each sphere S_0..S_n.
std::vector<VertexId> stratified_ball_sample(const GraphPatch& patch, int n, std::size_t max_exhaustive = 40);

FullSpaceVerdict eval_full_space(const GraphFamily& family, int radius, int n, double p, std::uint64_t replicas,
                                 std::uint64_t seed);

struct CorridorVerdict {
    int m = 0;
    CorridorEstimate corridor;
    double threshold = 0;
    bool holds = false;
    bool at_cap = true;  // path length is ell_cap rather than exp((log m)^10)
};

struct CorridorReport {
    std::vector<CorridorVerdict> verdicts;
    bool vacuous = false;  // no low-growth scale in range
    bool holds() const;
};

CorridorReport eval_corridor(const GraphFamily& family, int n_prev, int n, double p, double D, int ell_cap,
                             std::uint64_t replicas, std::uint64_t seed);

// ---------------------------------------------------------------- two-point zone

// Largest r <= m with min over sampled pairs of B_r of the lower CI bound of P(u <-> v inside B_m)
// at least 1/log(n_for_threshold). The sample of B_r is the restriction of one sample of B_m, so
// the zone is monotone in p on shared labels.
int two_point_zone(const GraphFamily& family, int radius, double p, int m, double n_for_threshold,
                   std::uint64_t replicas, std::uint64_t seed);

struct WellSeparatedSet {
    std::vector<VertexId> vertices;
    std::vector<std::size_t> indices;  // positions along the geodesic
    Path geodesic;
    double threshold = 0;
    // the last step was clamped to v although its pair may exceed the threshold
    bool final_clamped = false;
};

// Greedy walk along a geodesic from u to v: each next vertex is the first one past the last
// position whose connection to the previous pick (inside B_{m/2}, at p1) has upper CI bound at
// least (log n)^{-theta}. When `zone` is given, u and v must lie in B_zone.
WellSeparatedSet well_separated_set(const GraphFamily& family, int radius, double p1, int m,
                                    double n_for_threshold, double threshold_exponent, VertexId u, VertexId v,
                                    std::uint64_t replicas, std::uint64_t seed,
                                    std::optional<int> zone = std::nullopt);

// ---------------------------------------------------------------- sprinkling bound

struct HammingCheck {
    McEstimate lhs;        // P_q(A <-> B)
    McEstimate min_to_b;   // min over x in A of P_p(x <-> B)
    McEstimate max_pair;   // max over distinct x, y in A of P_p(x <-> y)
    double theta = 0;      // min of the two sides of the hypothesis
    double rhs = 0;        // 1 - exp(-delta(p, q) theta |A|)
    bool hypothesis_met = false;
    bool holds = false;    // lhs upper CI bound >= rhs
};

HammingCheck hamming_bound_check(const GraphFamily& family, int radius, double p, double q,
                                 std::span<const VertexId> A, std::span<const VertexId> B,
                                 std::uint64_t replicas, std::uint64_t seed);

// ---------------------------------------------------------------- orange peeling

struct OrangePeelStep {
    int i = 0;
    double r = 0;
    double q = 0;
    std::size_t clusters = 0;
};

struct OrangePeelTrace {
    std::vector<OrangePeelStep> steps;
    int k = 0;
    double eps = 0;
    double n_eff = 0;
    bool truncated = false;  // some r_i < 1
    std::vector<std::size_t> sizes() const;
};

// One shared-label sample (replica 0 of `seed`). k = 2 floor((log n)^D), r_i = m/8 - i m (log n)^{-D}/40,
// and q_i = sprinkle(p_start, i * delta(p_start, p_end) / k) so that q_k = p_end.
OrangePeelTrace orange_peel_trace(const GraphFamily& family, int radius, int m, double p_start, double p_end,
                                  double D, std::uint64_t seed, std::optional<double> n_eff = std::nullopt);

void write_orange_peel_csv(std::ostream& out, const OrangePeelTrace& trace);

}  // namespace perclab
