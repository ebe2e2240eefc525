#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "perclab/geometry.hpp"
#include "perclab/patch.hpp"

namespace perclab {

enum class TubeMode { Radial, Annular };

struct TubeFamily {
    PatchPtr patch;
    TubeMode mode = TubeMode::Radial;
    int n = 0;
    std::vector<TubeSpec> tubes;
    int thickness = 0;
    // requested parameters
    int k_target = 0;
    std::size_t ell_target = 0;
    // achieved parameters
    std::size_t k_achieved() const noexcept { return tubes.size(); }
    std::size_t ell_achieved() const noexcept;
    bool construction_failed() const noexcept { return tubes.empty(); }
    int attempts_used = 0;
    // annular endpoints
    std::vector<VertexId> set_a, set_b;
};

// Walks from k equidistant points of the root geodesic towards S_n, ironed at thickness r, clipped
// from the vertex before their first exit of B_n to the vertex before their first exit of B_4n.
// Tubes meeting an earlier tube are dropped and relaunched, up to `attempts` rounds.
TubeFamily build_radial_tubes(PatchPtr patch, int n, int k, int r, int walk_horizon, std::uint64_t seed,
                              int attempts);

// Anchors a_i in A and b_i in B on common spheres between S_n and S_3n; joins each pair by a
// maximally coupled walk pair (ironed, one reversed) when the pair coalesces.
TubeFamily build_annular_tubes(PatchPtr patch, const Path& A, const Path& B, int n, int k, int r, int walk_horizon,
                               std::uint64_t seed, int attempts);

bool verify_plentiful(const TubeFamily& family, std::size_t k, int r, std::size_t ell);

struct PolylogParameters {
    double k = 0, r = 0, ell = 0;
};
// ((log n)^{c lambda}, n (log n)^{-lambda/c}, n (log n)^{lambda/c}).
PolylogParameters polylog_parameters(double c, double lambda, double n);
bool verify_polylog_plentiful(const TubeFamily& family, double c, double lambda, double n);

// Patch text followed by one "tube <thickness> <length>" header and vertex list per tube.
void write_tubes(std::ostream& out, const TubeFamily& family);

}  // namespace perclab
