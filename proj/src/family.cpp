#include "perclab/family.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "perclab/errors.hpp"

namespace perclab {

namespace {

constexpr int kMaxDim = 6;

// Brick-wall honeycomb: vertex (x,y) pairs with (x,y+1) when x+y is even, else (x,y-1).
std::int64_t honeycomb_vertical(std::int64_t x, std::int64_t y) {
    return ((x + y) % 2 == 0) ? y + 1 : y - 1;
}

Point2 honeycomb_point(std::int64_t x, std::int64_t y) {
    // unit bond length, zigzag rows along x
    const bool up = ((x + y) % 2 == 0);
    return {static_cast<double>(x) * std::numbers::sqrt3 / 2.0, static_cast<double>(y) * 1.5 + (up ? 0.25 : -0.25)};
}

// Triangle vertices of the 3-12 lattice sit this fraction of the way along each honeycomb bond;
// it equalises the triangle edges and the inter-triangle edges.
constexpr double kTruncation = 1.0 / (2.0 + std::numbers::sqrt3);

VertexKey honeycomb_partner(const VertexKey& v, int dir) {
    VertexKey w{};
    w[0] = v[0];
    w[1] = v[1];
    if (dir == 0) w[0] = v[0] + 1;
    else if (dir == 1) w[0] = v[0] - 1;
    else w[1] = honeycomb_vertical(v[0], v[1]);
    return w;
}

std::int64_t mod(std::int64_t a, std::int64_t m) {
    const std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace

GraphFamily::GraphFamily(FamilyKind kind, std::vector<int> params) : kind_(kind), params_(std::move(params)) {}

GraphFamily GraphFamily::hypercubic(int d) {
    if (d < 1 || d > kMaxDim) throw ParameterError("HyperCubic dimension must be in [1, 6]");
    return GraphFamily(FamilyKind::HyperCubic, {d});
}

GraphFamily GraphFamily::slab(int d, int k, int m) {
    if (d < 1 || d > kMaxDim) throw ParameterError("Slab dimension must be in [1, 6]");
    if (k < 0 || k > d) throw ParameterError("Slab requires 0 <= k <= d");
    if (m < 1) throw ParameterError("Slab requires m >= 1");
    return GraphFamily(FamilyKind::Slab, {d, k, m});
}

GraphFamily GraphFamily::cylinder(int m) {
    if (m < 1) throw ParameterError("Cylinder requires m >= 1");
    return GraphFamily(FamilyKind::Cylinder, {m});
}

GraphFamily GraphFamily::triangular() { return GraphFamily(FamilyKind::Triangular, {}); }
GraphFamily GraphFamily::hexagonal() { return GraphFamily(FamilyKind::Hexagonal, {}); }
GraphFamily GraphFamily::kagome312() { return GraphFamily(FamilyKind::Kagome312, {}); }

GraphFamily GraphFamily::regular_tree(int degree) {
    if (degree < 3) throw ParameterError("RegularTree degree must be >= 3");
    if (degree > 64) throw ParameterError("RegularTree degree must be <= 64");
    return GraphFamily(FamilyKind::RegularTree, {degree});
}

GraphFamily GraphFamily::heisenberg3() { return GraphFamily(FamilyKind::Heisenberg3, {}); }

GraphFamily GraphFamily::macro_grid(int n) {
    if (n < 1) throw ParameterError("MacroGrid requires n >= 1");
    return GraphFamily(FamilyKind::MacroGrid, {n});
}

GraphFamily GraphFamily::parse(std::string_view text) {
    std::string s;
    for (char c : text)
        if (c != ' ' && c != '\t') s.push_back(c);
    std::string head = s;
    std::vector<int> args;
    if (auto open = s.find('('); open != std::string::npos) {
        if (s.back() != ')') throw ParameterError("malformed family name: " + std::string(text));
        head = s.substr(0, open);
        std::stringstream in(s.substr(open + 1, s.size() - open - 2));
        std::string item;
        while (std::getline(in, item, ',')) {
            try {
                std::size_t used = 0;
                args.push_back(std::stoi(item, &used));
                if (used != item.size()) throw ParameterError("bad integer");
            } catch (const std::exception&) {
                throw ParameterError("malformed family parameter '" + item + "' in " + std::string(text));
            }
        }
    }
    auto want = [&](std::size_t n) {
        if (args.size() != n) throw ParameterError(head + " expects " + std::to_string(n) + " parameter(s)");
    };
    if (head == "HyperCubic" || head == "Z") {
        want(1);
        return hypercubic(args[0]);
    }
    if (head == "Slab") {
        want(3);
        return slab(args[0], args[1], args[2]);
    }
    if (head == "Cylinder") {
        want(1);
        return cylinder(args[0]);
    }
    if (head == "Triangular") {
        want(0);
        return triangular();
    }
    if (head == "Hexagonal") {
        want(0);
        return hexagonal();
    }
    if (head == "Kagome312") {
        want(0);
        return kagome312();
    }
    if (head == "RegularTree") {
        want(1);
        return regular_tree(args[0]);
    }
    if (head == "Heisenberg3") {
        want(0);
        return heisenberg3();
    }
    if (head == "MacroGrid") {
        want(1);
        return macro_grid(args[0]);
    }
    throw ParameterError("unknown graph family: " + std::string(text));
}

std::string GraphFamily::name() const {
    auto with = [&](const char* head) {
        std::string out = head;
        if (!params_.empty()) {
            out += '(';
            for (std::size_t i = 0; i < params_.size(); ++i) {
                if (i) out += ',';
                out += std::to_string(params_[i]);
            }
            out += ')';
        }
        return out;
    };
    switch (kind_) {
        case FamilyKind::HyperCubic: return with("HyperCubic");
        case FamilyKind::Slab: return with("Slab");
        case FamilyKind::Cylinder: return with("Cylinder");
        case FamilyKind::Triangular: return "Triangular";
        case FamilyKind::Hexagonal: return "Hexagonal";
        case FamilyKind::Kagome312: return "Kagome312";
        case FamilyKind::RegularTree: return with("RegularTree");
        case FamilyKind::Heisenberg3: return "Heisenberg3";
        case FamilyKind::MacroGrid: return with("MacroGrid");
    }
    return "?";
}

namespace {
int periodic_degree(int m) { return m == 1 ? 0 : (m == 2 ? 1 : 2); }
}  // namespace

int GraphFamily::degree() const noexcept {
    switch (kind_) {
        case FamilyKind::HyperCubic: return 2 * params_[0];
        case FamilyKind::Slab: return 2 * (params_[0] - params_[1]) + params_[1] * periodic_degree(params_[2]);
        case FamilyKind::Cylinder: return 2 + periodic_degree(params_[0]);
        case FamilyKind::Triangular: return 6;
        case FamilyKind::Hexagonal: return 3;
        case FamilyKind::Kagome312: return 3;
        case FamilyKind::RegularTree: return params_[0];
        case FamilyKind::Heisenberg3: return 4;
        case FamilyKind::MacroGrid: return 4 * params_[0];
    }
    return 0;
}

bool GraphFamily::planar() const noexcept {
    switch (kind_) {
        case FamilyKind::HyperCubic: return params_[0] == 2;
        case FamilyKind::Triangular:
        case FamilyKind::Hexagonal:
        case FamilyKind::Kagome312: return true;
        default: return false;
    }
}

bool GraphFamily::finite() const noexcept {
    if (kind_ == FamilyKind::Slab) return params_[0] == params_[1];
    return false;
}

int GraphFamily::max_radius() const noexcept {
    if (kind_ == FamilyKind::RegularTree) {
        // words are stored base-degree in one signed 64-bit integer
        const double bits = std::log2(static_cast<double>(params_[0]));
        return static_cast<int>(std::floor(62.0 / bits));
    }
    return std::numeric_limits<int>::max() / 2;
}

void GraphFamily::neighbors(const VertexKey& v, std::vector<VertexKey>& out) const {
    out.clear();
    switch (kind_) {
        case FamilyKind::HyperCubic:
        case FamilyKind::Slab:
        case FamilyKind::Cylinder: {
            int d = 0, k = 0, m = 1;
            if (kind_ == FamilyKind::HyperCubic) d = params_[0];
            else if (kind_ == FamilyKind::Slab) d = params_[0], k = params_[1], m = params_[2];
            else d = 2, k = 1, m = params_[0];
            for (int i = 0; i < d; ++i) {
                const bool periodic = i >= d - k;
                if (!periodic) {
                    VertexKey w = v;
                    ++w[i];
                    out.push_back(w);
                    w[i] -= 2;
                    out.push_back(w);
                } else if (m >= 2) {
                    VertexKey w = v;
                    w[i] = mod(v[i] + 1, m);
                    out.push_back(w);
                    if (m >= 3) {
                        w[i] = mod(v[i] - 1, m);
                        out.push_back(w);
                    }
                }
            }
            return;
        }
        case FamilyKind::Triangular: {
            static constexpr int dx[6] = {1, -1, 0, 0, 1, -1};
            static constexpr int dy[6] = {0, 0, 1, -1, -1, 1};
            for (int i = 0; i < 6; ++i) {
                VertexKey w = v;
                w[0] += dx[i];
                w[1] += dy[i];
                out.push_back(w);
            }
            return;
        }
        case FamilyKind::Hexagonal:
            for (int dir = 0; dir < 3; ++dir) out.push_back(honeycomb_partner(v, dir));
            return;
        case FamilyKind::Kagome312: {
            // v = (x, y, corner); corner names the honeycomb bond the triangle vertex points along
            const int corner = static_cast<int>(v[2]);
            for (int c = 0; c < 3; ++c) {
                if (c == corner) continue;
                VertexKey w = v;
                w[2] = c;
                out.push_back(w);
            }
            VertexKey w = honeycomb_partner(v, corner);
            w[2] = corner == 0 ? 1 : (corner == 1 ? 0 : 2);
            out.push_back(w);
            return;
        }
        case FamilyKind::RegularTree: {
            // v = (word length, word digits base degree, last letter in the low digit)
            const std::int64_t deg = params_[0];
            const std::int64_t len = v[0], code = v[1];
            for (std::int64_t g = 0; g < deg; ++g) {
                VertexKey w{};
                if (len > 0 && code % deg == g) {
                    w[0] = len - 1;
                    w[1] = code / deg;
                } else {
                    w[0] = len + 1;
                    w[1] = code * deg + g;
                }
                out.push_back(w);
            }
            return;
        }
        case FamilyKind::Heisenberg3: {
            // right multiplication of (a,b,c) ~ [[1,a,c],[0,1,b],[0,0,1]] by x^{+-1}, y^{+-1}
            const auto a = v[0], b = v[1], c = v[2];
            out.push_back({a + 1, b, c, 0, 0, 0});
            out.push_back({a - 1, b, c, 0, 0, 0});
            out.push_back({a, b + 1, c + a, 0, 0, 0});
            out.push_back({a, b - 1, c - a, 0, 0, 0});
            return;
        }
        case FamilyKind::MacroGrid: {
            // v = (sx, sy, i), i in [0, 4n): clique K_{4n} at each site; vertex i carries the
            // inter-clique edge in direction i mod 4 (rotating assignment), paired with slot i/4
            // of the opposite direction in the neighbouring clique.
            const std::int64_t size = 4LL * params_[0];
            for (std::int64_t j = 0; j < size; ++j) {
                if (j == v[2]) continue;
                out.push_back({v[0], v[1], j, 0, 0, 0});
            }
            static constexpr int dx[4] = {1, 0, -1, 0};
            static constexpr int dy[4] = {0, 1, 0, -1};
            const int dir = static_cast<int>(v[2] % 4);
            const std::int64_t slot = v[2] / 4;
            const int back = (dir + 2) % 4;
            out.push_back({v[0] + dx[dir], v[1] + dy[dir], 4 * slot + back, 0, 0, 0});
            return;
        }
    }
}

std::optional<Point2> GraphFamily::embed(const VertexKey& v) const {
    switch (kind_) {
        case FamilyKind::HyperCubic:
            if (params_[0] != 2) return std::nullopt;
            return Point2{static_cast<double>(v[0]), static_cast<double>(v[1])};
        case FamilyKind::Triangular:
            return Point2{static_cast<double>(v[0]) + 0.5 * static_cast<double>(v[1]),
                          static_cast<double>(v[1]) * std::numbers::sqrt3 / 2.0};
        case FamilyKind::Hexagonal: {
            const Point2 p = honeycomb_point(v[0], v[1]);
            return Point2{p.x / std::numbers::sqrt3, p.y / std::numbers::sqrt3};
        }
        case FamilyKind::Kagome312: {
            const Point2 p = honeycomb_point(v[0], v[1]);
            const VertexKey w = honeycomb_partner(v, static_cast<int>(v[2]));
            const Point2 q = honeycomb_point(w[0], w[1]);
            return Point2{(p.x + kTruncation * (q.x - p.x)) / std::numbers::sqrt3,
                          (p.y + kTruncation * (q.y - p.y)) / std::numbers::sqrt3};
        }
        default: return std::nullopt;
    }
}

}  // namespace perclab
