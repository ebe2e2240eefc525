#include "perclab/tubes.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "perclab/errors.hpp"
#include "perclab/walks.hpp"

namespace perclab {

std::size_t TubeFamily::ell_achieved() const noexcept {
    std::size_t ell = 0;
    for (const auto& t : tubes) ell = std::max(ell, t.length());
    return ell;
}

namespace {

bool disjoint_from(const std::vector<std::uint8_t>& occupied, const TubeSpec& t) {
    for (VertexId v : t.vertex_set)
        if (occupied[v]) return false;
    return true;
}

void occupy(std::vector<std::uint8_t>& occupied, const TubeSpec& t) {
    for (VertexId v : t.vertex_set) occupied[v] = 1;
}

// Segment from the vertex before the first exit of B_inner to the vertex before the first exit
// of B_outer; nullopt if the path never leaves B_outer.
std::optional<Path> clip_crossing(const GraphPatch& patch, const Path& p, int inner, int outer) {
    std::size_t first = p.size();
    for (std::size_t i = 1; i < p.size(); ++i)
        if (patch.dist(p[i]) > inner) {
            first = i - 1;
            break;
        }
    if (first == p.size()) return std::nullopt;
    for (std::size_t i = first + 1; i < p.size(); ++i)
        if (patch.dist(p[i]) > outer) return Path(p.begin() + static_cast<std::ptrdiff_t>(first), p.begin() + static_cast<std::ptrdiff_t>(i));
    return std::nullopt;
}

}  // namespace

TubeFamily build_radial_tubes(PatchPtr patch, int n, int k, int r, int walk_horizon, std::uint64_t seed,
                              int attempts) {
    if (n < 1 || k < 1 || r < 0 || walk_horizon < 0 || attempts < 1) throw ArgumentError("invalid tube parameters");
    const GraphPatch& g = *patch;
    if (4 * n + 1 > g.radius()) throw OutOfPatchError("radial tubes need patch radius > 4n");
    TubeFamily fam;
    fam.patch = patch;
    fam.mode = TubeMode::Radial;
    fam.n = n;
    fam.thickness = r;
    fam.k_target = k;
    const Path spine = geodesic(g, g.root(), g.sphere(n).front());
    std::vector<VertexId> starts;
    for (int i = 0; i < k; ++i) starts.push_back(spine[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) / static_cast<std::size_t>(k)]);
    std::vector<std::uint8_t> occupied(g.num_vertices(), 0);
    std::vector<int> pending(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pending[static_cast<std::size_t>(i)] = i;
    for (int a = 0; a < attempts && !pending.empty(); ++a) {
        fam.attempts_used = a + 1;
        std::vector<int> still;
        for (int i : pending) {
            const std::uint64_t replica = static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(i);
            const Path walk = lazy_walk_until(g, starts[static_cast<std::size_t>(i)], walk_horizon, 4 * n + 1, seed, replica);
            const Path ironed = r >= 1 ? iron(walk, r, g).ironed : walk;
            const auto clipped = clip_crossing(g, ironed, n, 4 * n);
            if (!clipped) {
                still.push_back(i);
                continue;
            }
            TubeSpec t = tube(g, *clipped, r);
            if (!disjoint_from(occupied, t)) {
                still.push_back(i);
                continue;
            }
            occupy(occupied, t);
            fam.tubes.push_back(std::move(t));
        }
        pending = std::move(still);
    }
    return fam;
}

TubeFamily build_annular_tubes(PatchPtr patch, const Path& A, const Path& B, int n, int k, int r, int walk_horizon,
                               std::uint64_t seed, int attempts) {
    if (n < 1 || k < 1 || r < 0 || walk_horizon < 0 || attempts < 1) throw ArgumentError("invalid tube parameters");
    const GraphPatch& g = *patch;
    validate_path(g, A);
    validate_path(g, B);
    auto crosses = [&](const Path& p) {
        bool inner = false, outer = false;
        for (VertexId v : p) {
            inner = inner || g.dist(v) == n;
            outer = outer || g.dist(v) == 3 * n;
        }
        return inner && outer;
    };
    if (!crosses(A) || !crosses(B)) throw ArgumentError("annular tubes need two (n, 3n) crossings");
    TubeFamily fam;
    fam.patch = patch;
    fam.mode = TubeMode::Annular;
    fam.n = n;
    fam.thickness = r;
    fam.k_target = k;
    fam.set_a = A;
    fam.set_b = B;
    auto level_vertex = [&](const Path& p, int level) {
        for (VertexId v : p)
            if (g.dist(v) == level) return v;
        throw ArgumentError("crossing misses a sphere it must cross");
    };
    std::vector<std::pair<VertexId, VertexId>> anchors;
    for (int i = 1; i <= k; ++i) {
        const int level = n + (2 * n * i) / (k + 1);
        anchors.emplace_back(level_vertex(A, level), level_vertex(B, level));
    }
    std::vector<std::uint8_t> occupied(g.num_vertices(), 0);
    std::vector<int> pending(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) pending[static_cast<std::size_t>(i)] = i;
    for (int a = 0; a < attempts && !pending.empty(); ++a) {
        fam.attempts_used = a + 1;
        std::vector<int> still;
        for (int i : pending) {
            const auto [ai, bi] = anchors[static_cast<std::size_t>(i)];
            Path joined;
            if (ai == bi) {
                joined = {ai};
            } else {
                const std::uint64_t replica = static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(i);
                const CoupledPair pair = coupled_pair(g, ai, bi, walk_horizon, seed, replica);
                if (!pair.coalesced) {
                    still.push_back(i);
                    continue;
                }
                joined = r >= 1 ? iron(pair.walk_x, r, g).ironed : pair.walk_x;
                Path back = r >= 1 ? iron(pair.walk_y, r, g).ironed : pair.walk_y;
                std::reverse(back.begin(), back.end());
                joined.insert(joined.end(), back.begin() + 1, back.end());
            }
            TubeSpec t = tube(g, joined, r);
            if (!disjoint_from(occupied, t)) {
                still.push_back(i);
                continue;
            }
            occupy(occupied, t);
            fam.tubes.push_back(std::move(t));
        }
        pending = std::move(still);
    }
    return fam;
}

bool verify_plentiful(const TubeFamily& family, std::size_t k, int r, std::size_t ell) {
    if (family.tubes.size() < k) return false;
    for (const auto& t : family.tubes) {
        if (t.thickness < r || t.length() > ell || t.path.empty()) return false;
        if (family.mode == TubeMode::Radial) {
            const GraphPatch& g = *family.patch;
            if (g.dist(t.path.front()) != family.n || g.dist(t.path.back()) != 4 * family.n) return false;
        } else {
            auto in = [](const std::vector<VertexId>& s, VertexId v) { return std::find(s.begin(), s.end(), v) != s.end(); };
            if (!in(family.set_a, t.path.front()) || !in(family.set_b, t.path.back())) return false;
        }
    }
    // pairwise scan of the sorted vertex sets
    for (std::size_t i = 0; i < family.tubes.size(); ++i)
        for (std::size_t j = i + 1; j < family.tubes.size(); ++j) {
            const auto& a = family.tubes[i].vertex_set;
            const auto& b = family.tubes[j].vertex_set;
            std::size_t x = 0, y = 0;
            while (x < a.size() && y < b.size()) {
                if (a[x] == b[y]) return false;
                if (a[x] < b[y]) ++x;
                else ++y;
            }
        }
    return true;
}

PolylogParameters polylog_parameters(double c, double lambda, double n) {
    if (!(c > 0 && lambda > 0 && n > std::exp(1.0))) throw DomainError("polylog parameters need c, lambda > 0 and n > e");
    const double ln = std::log(n);
    return {std::pow(ln, c * lambda), n * std::pow(ln, -lambda / c), n * std::pow(ln, lambda / c)};
}

bool verify_polylog_plentiful(const TubeFamily& family, double c, double lambda, double n) {
    const auto prm = polylog_parameters(c, lambda, n);
    return verify_plentiful(family, static_cast<std::size_t>(std::ceil(prm.k)), static_cast<int>(std::ceil(prm.r)),
                            static_cast<std::size_t>(std::floor(prm.ell)));
}

void write_tubes(std::ostream& out, const TubeFamily& family) {
    write_patch(out, *family.patch);
    out << "tubes " << family.tubes.size() << ' ' << (family.mode == TubeMode::Radial ? "radial" : "annular") << ' '
        << family.n << '\n';
    for (const auto& t : family.tubes) {
        out << "tube " << t.thickness << ' ' << t.length() << '\n' << "path";
        for (VertexId v : t.path) out << ' ' << v;
        out << '\n' << "set";
        for (VertexId v : t.vertex_set) out << ' ' << v;
        out << '\n';
    }
}

}  // namespace perclab
