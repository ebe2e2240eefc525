#include "perclab/patch.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "perclab/errors.hpp"

namespace perclab {

GraphPatch::GraphPatch(GraphFamily family, int radius, int degree, std::vector<VertexKey> keys, std::vector<int> dist,
                       std::vector<Edge> edges)
    : family_(std::move(family)),
      radius_(radius),
      degree_(degree),
      keys_(std::move(keys)),
      dist_(std::move(dist)),
      edges_(std::move(edges)) {
    const std::size_t n = dist_.size();
    offsets_.assign(n + 1, 0);
    for (const auto& e : edges_) {
        ++offsets_[e.u + 1];
        ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    adjacency_.resize(offsets_[n]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (EdgeId id = 0; id < edges_.size(); ++id) {
        const auto& e = edges_[id];
        adjacency_[fill[e.u]++] = {e.v, id};
        adjacency_[fill[e.v]++] = {e.u, id};
    }
    ball_size_.assign(static_cast<std::size_t>(radius_) + 1, 0);
    for (int d : dist_) ++ball_size_[static_cast<std::size_t>(d)];
    for (std::size_t r = 1; r < ball_size_.size(); ++r) ball_size_[r] += ball_size_[r - 1];
    if (!keys_.empty()) {
        index_.reserve(keys_.size() * 2);
        for (VertexId v = 0; v < keys_.size(); ++v) index_.emplace(keys_[v], v);
    }
}

std::uint64_t GraphPatch::growth(int n) const {
    if (n < 0) throw ArgumentError("growth radius must be nonnegative");
    if (n > radius_) throw OutOfPatchError("growth radius exceeds patch radius");
    return ball_size_[static_cast<std::size_t>(n)];
}

std::pair<VertexId, VertexId> GraphPatch::sphere_range(int r) const {
    if (r < 0) throw ArgumentError("sphere radius must be nonnegative");
    if (r > radius_) throw OutOfPatchError("sphere radius exceeds patch radius");
    const auto first = r == 0 ? 0 : ball_size_[static_cast<std::size_t>(r) - 1];
    return {static_cast<VertexId>(first), static_cast<VertexId>(ball_size_[static_cast<std::size_t>(r)])};
}

std::vector<VertexId> GraphPatch::sphere(int r) const {
    auto [a, b] = sphere_range(r);
    std::vector<VertexId> out(b - a);
    for (VertexId v = a; v < b; ++v) out[v - a] = v;
    return out;
}

std::vector<VertexId> GraphPatch::ball(int r) const {
    const auto n = growth(r);
    std::vector<VertexId> out(n);
    for (VertexId v = 0; v < n; ++v) out[v] = v;
    return out;
}

std::optional<VertexId> GraphPatch::find(const VertexKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<EdgeId> GraphPatch::find_edge(VertexId a, VertexId b) const {
    for (const auto& inc : neighbors(a))
        if (inc.vertex == b) return inc.edge;
    return std::nullopt;
}

PatchPtr build_patch(const GraphFamily& family, int radius) {
    if (radius < 0) throw ArgumentError("patch radius must be nonnegative");
    if (radius > family.max_radius()) throw ParameterError("patch radius too large for " + family.name());
    std::vector<VertexKey> keys{family.root()};
    std::vector<int> dist{0};
    std::unordered_map<VertexKey, VertexId, VertexKeyHash> index{{family.root(), 0}};
    std::vector<VertexKey> nbrs;
    for (std::size_t head = 0; head < keys.size(); ++head) {
        if (dist[head] == radius) continue;
        const VertexKey cur = keys[head];
        family.neighbors(cur, nbrs);
        for (const auto& w : nbrs) {
            if (index.try_emplace(w, static_cast<VertexId>(keys.size())).second) {
                keys.push_back(w);
                dist.push_back(dist[head] + 1);
            }
        }
    }
    std::vector<Edge> edges;
    for (VertexId u = 0; u < keys.size(); ++u) {
        family.neighbors(keys[u], nbrs);
        for (const auto& w : nbrs) {
            auto it = index.find(w);
            if (it != index.end() && it->second > u) edges.push_back({u, it->second});
        }
    }
    return std::make_shared<const GraphPatch>(family, radius, family.degree(), std::move(keys), std::move(dist),
                                              std::move(edges));
}

PatchPtr cached_patch(const GraphFamily& family, int radius) {
    static std::mutex mu;
    static std::map<std::pair<std::string, int>, PatchPtr> cache;
    const auto key = std::make_pair(family.name(), radius);
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto patch = build_patch(family, radius);
    std::lock_guard lock(mu);
    // keep memory bounded: large patches are rebuilt on demand rather than pinned forever
    if (cache.size() > 64) cache.clear();
    cache.emplace(key, patch);
    return patch;
}

std::uint64_t growth(const GraphPatch& patch, int n) { return patch.growth(n); }

void write_patch(std::ostream& out, const GraphPatch& patch) {
    out << "perclab-patch 1\n";
    out << "family " << patch.family().name() << "\n";
    out << "radius " << patch.radius() << "\n";
    out << "degree " << patch.degree() << "\n";
    out << "vertices " << patch.num_vertices() << "\n";
    out << "edges " << patch.num_edges() << "\n";
    for (VertexId v = 0; v < patch.num_vertices(); ++v) out << "v " << v << ' ' << patch.dist(v) << '\n';
    for (const auto& e : patch.edges()) out << "e " << e.u << ' ' << e.v << '\n';
}

std::string patch_to_string(const GraphPatch& patch) {
    std::ostringstream s;
    write_patch(s, patch);
    return s.str();
}

namespace {
template <class T>
T expect_field(std::istream& in, const std::string& name) {
    std::string word;
    T value{};
    if (!(in >> word) || word != name || !(in >> value)) throw ParseError("patch text: expected field '" + name + "'");
    return value;
}
}  // namespace

GraphPatch read_patch(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "perclab-patch" || version != 1)
        throw ParseError("patch text: bad header");
    const auto family = GraphFamily::parse(expect_field<std::string>(in, "family"));
    const int radius = expect_field<int>(in, "radius");
    const int degree = expect_field<int>(in, "degree");
    const auto nv = expect_field<std::size_t>(in, "vertices");
    const auto ne = expect_field<std::size_t>(in, "edges");
    std::vector<int> dist(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        std::string tag;
        std::size_t idx = 0;
        int d = 0;
        if (!(in >> tag >> idx >> d) || tag != "v" || idx != i || d < 0 || d > radius)
            throw ParseError("patch text: bad vertex line " + std::to_string(i));
        dist[i] = d;
    }
    std::vector<Edge> edges(ne);
    for (std::size_t i = 0; i < ne; ++i) {
        std::string tag;
        VertexId a = 0, b = 0;
        if (!(in >> tag >> a >> b) || tag != "e" || a >= nv || b >= nv || a == b)
            throw ParseError("patch text: bad edge line " + std::to_string(i));
        edges[i] = {a, b};
    }
    return GraphPatch(family, radius, degree, {}, std::move(dist), std::move(edges));
}

namespace {
std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}
std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
    return a * b;
}
std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        // exact: r * (n - k + i) / i stays integral at every step
        const unsigned __int128 t = static_cast<unsigned __int128>(r) * static_cast<unsigned>(n - k + i) / i;
        if (t > UINT64_MAX) return UINT64_MAX;
        r = static_cast<std::uint64_t>(t);
    }
    return r;
}
}  // namespace

std::uint64_t growth_of(const GraphFamily& family, int n) {
    if (n < 0) throw ArgumentError("growth radius must be nonnegative");
    if (family.kind() == FamilyKind::HyperCubic) {
        const int d = family.params()[0];
        std::uint64_t total = 0;
        for (int k = 0; k <= std::min(d, n); ++k)
            total = saturating_add(total, saturating_mul(saturating_mul(std::uint64_t{1} << k, binomial(d, k)),
                                                         binomial(n, k)));
        return total;
    }
    if (family.kind() == FamilyKind::RegularTree) {
        const std::uint64_t d = static_cast<std::uint64_t>(family.params()[0]);
        std::uint64_t total = 1, layer = 1;
        for (int r = 1; r <= n; ++r) {
            layer = saturating_mul(layer, r == 1 ? d : d - 1);
            total = saturating_add(total, layer);
        }
        return total;
    }
    return cached_patch(family, n)->growth(n);
}

}  // namespace perclab
