#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perclab/family.hpp"
#include "perclab/patch.hpp"
#include "perclab/percolation.hpp"
#include "perclab/rng.hpp"
#include "perclab/stats.hpp"

namespace perclab {

struct GhostField {
    std::vector<VertexId> support;
    double intensity = 0;
    std::vector<VertexId> included;  // subset of support, in support order
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;
};

// Vertex v is included iff its uniform on (seed, stream, replica, v) is below h.
inline bool ghost_bit(std::uint64_t seed, Stream stream, std::uint64_t replica, VertexId v, double h) noexcept {
    return uniform(seed, stream, replica, v) < h;
}

GhostField sample_ghost(std::span<const VertexId> support, double h, std::uint64_t seed, std::uint64_t replica = 0,
                        Stream stream = Stream::GhostA);

// Bit-level encoding of edge states and ghost marks as products of independent coins.
struct BitsEncoding {
    int m_E = 0;
    double q1 = 0;
    double q2 = 0;
    int m_G = 0;
};
BitsEncoding bits_encoding(double p1, double p2, double h, int d);

// ---------------------------------------------------------------- ghost connection

// P(some included vertex of A connects inside Lambda to some included vertex of B), ghosts on A and
// on B drawn from independent streams.
McEstimate est_ghost_connection(PatchPtr patch, double p, std::span<const VertexId> A, std::span<const VertexId> B,
                                double h, const Region& lambda, std::uint64_t replicas, std::uint64_t seed);
McEstimate est_ghost_connection(const GraphFamily& family, int radius, double p, std::span<const VertexId> A,
                                std::span<const VertexId> B, double h, const Region& lambda, std::uint64_t replicas,
                                std::uint64_t seed);

// Exact value by enumerating edge states and ghost marks (small instances only).
double exact_ghost_connection(const GraphPatch& patch, double p, std::span<const VertexId> A,
                              std::span<const VertexId> B, double h, const Region& lambda);

// ---------------------------------------------------------------- event grammar
//
//   event  := connect(set, set[, set]) | ghost(set, set[, set]) | sphere(r)
//   set    := root | <vertex index> | ball:r | sphere:r | all | {i,j,...}
//
// connect(A, B, L) is the open connection from A to B inside L; ghost(A, B, L) the same between
// ghost-marked vertices of A and B; sphere(r) is root <-> S_r. not(...), piv(...) and two_ghost(...)
// are recognised but rejected where a monotone event is required.

struct VertexSetSpec {
    enum class Kind { Root, Vertex, Ball, Sphere, All, List };
    Kind kind = Kind::Root;
    int value = 0;
    std::vector<VertexId> ids;
    std::vector<VertexId> resolve(const GraphPatch& patch) const;
    std::string to_string() const;
};

struct EventSpec {
    enum class Kind { Connect, Ghost, Sphere, Not, Piv, TwoGhost };
    Kind kind = Kind::Connect;
    VertexSetSpec a, b;
    std::optional<VertexSetSpec> region;
    int radius = 0;
    std::string text;
    bool monotone() const noexcept { return kind == Kind::Connect || kind == Kind::Ghost || kind == Kind::Sphere; }
};

EventSpec parse_event(const std::string& text);

// Event evaluator bound to a patch; ghost marks come from (seed, replica) at intensity h.
class EventEvaluator {
public:
    EventEvaluator(PatchPtr patch, EventSpec spec, double h);
    bool operator()(const OpenMask& open, std::uint64_t seed, std::uint64_t replica) const;
    bool operator()(const OpenMask& open, const std::vector<std::uint8_t>& ghost_a,
                    const std::vector<std::uint8_t>& ghost_b) const;
    const EventSpec& spec() const noexcept { return spec_; }
    const GraphPatch& patch() const noexcept { return *patch_; }
    const std::vector<VertexId>& set_a() const noexcept { return a_; }
    const std::vector<VertexId>& set_b() const noexcept { return b_; }

private:
    PatchPtr patch_;
    EventSpec spec_;
    double h_;
    std::vector<VertexId> a_, b_;
    Region region_;
};

struct InfluenceReport {
    std::vector<McEstimate> per_edge;  // P(edge pivotal)
    double max_influence = 0;
    EdgeId argmax = 0;
    McEstimate russo_derivative;  // sum over edges of the pivotal indicator
    McEstimate event;             // P(event) on the same samples
};

// Pivotality of every edge, by evaluating the event with the edge forced open and forced closed.
InfluenceReport est_pivotal_influence(PatchPtr patch, double p, double h, const EventSpec& event,
                                      std::uint64_t replicas, std::uint64_t seed);
InfluenceReport est_pivotal_influence(const GraphFamily& family, int radius, double p, double h,
                                      const std::string& event, std::uint64_t replicas, std::uint64_t seed);

// ---------------------------------------------------------------- two-ghost coupling

struct CoupledGhostResult {
    double h = 0;
    McEstimate lhs;
    double rhs = 0;             // C * sqrt((1-p) h / p) with the fitted C
    double fitted_C = 0;        // smallest C making rhs >= lhs over the sweep
    std::optional<double> slope;  // d log lhs / d log h over the sweep
};

// lhs = P(x <-> G_A, y <-> G_B, x </-> y, one of the two clusters avoids the boundary) for the
// root edge (x, y), with A = B = all vertices and independent ghost fields.
McEstimate est_coupled_two_ghost(const GraphFamily& family, int radius, double p, double h, std::uint64_t replicas,
                                 std::uint64_t seed);
std::vector<CoupledGhostResult> two_ghost_coupled_sweep(const GraphFamily& family, int radius, double p,
                                                        std::span<const double> hs, std::uint64_t replicas,
                                                        std::uint64_t seed);
CoupledGhostResult two_ghost_coupled_check(const GraphFamily& family, int radius, double p, double h,
                                           std::uint64_t replicas, std::uint64_t seed);

// ---------------------------------------------------------------- gluing and snowballing

// Smallest r = ceil(n / h) such that P_p(Piv[1, n]) has upper CI bound below h, scanning n up to
// n_cap; nullopt if none qualifies.
std::optional<int> default_gluing_radius(const GraphFamily& family, double p, double h, int n_cap,
                                         std::uint64_t replicas, std::uint64_t seed);

// P(X <-> G_A inside B_r(Lambda) in omega_p2, Y <-> G_A inside Lambda in omega_p1,
//   X </-> Y inside B_r(Lambda) in omega_p2), on shared labels.
McEstimate gluing_event_prob(PatchPtr patch, double p1, double p2, double h, std::span<const VertexId> A,
                             std::span<const VertexId> X, std::span<const VertexId> Y, const Region& lambda, int r,
                             std::uint64_t replicas, std::uint64_t seed);
McEstimate gluing_event_prob(const GraphFamily& family, int radius, double p1, double p2, double h,
                             std::span<const VertexId> A, std::span<const VertexId> X, std::span<const VertexId> Y,
                             const Region& lambda, std::optional<int> r, std::uint64_t replicas, std::uint64_t seed);

// Indicator of the gluing event for one configuration pair (omega_p1 ⊆ omega_p2) and ghost marks.
bool gluing_event(const GraphPatch& patch, const OpenMask& open1, const OpenMask& open2,
                  const std::vector<std::uint8_t>& ghost, std::span<const VertexId> A, std::span<const VertexId> X,
                  std::span<const VertexId> Y, const Region& lambda, const Region& thick);

// r-neighbourhood of a region inside the patch.
Region thicken(const GraphPatch& patch, const Region& lambda, int r);

struct SnowballResult {
    McEstimate lhs;    // tau_{p2}(B_b(first), B_b(last))
    McEstimate first;  // tau_{p1}(B_b(first))
    McEstimate last;   // tau_{p1}(B_b(last))
    double rhs = 0;    // first * last
    double ratio = 0;  // lhs / rhs, the empirical snowballing constant
};
// h is carried into the report only; the chain's conclusion involves the two-point functions alone.
SnowballResult snowball_chain(const GraphFamily& family, int radius, double p1, double p2,
                              std::span<const VertexId> centers, int b, double h, std::uint64_t replicas,
                              std::uint64_t seed);

}  // namespace perclab
