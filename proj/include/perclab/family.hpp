#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace perclab {

enum class FamilyKind {
    HyperCubic,
    Slab,
    Cylinder,
    Triangular,
    Hexagonal,
    Kagome312,
    RegularTree,
    Heisenberg3,
    MacroGrid,
};

// Coordinates of a lattice vertex under its family's local rule. Unused slots are zero.
using VertexKey = std::array<std::int64_t, 6>;

struct VertexKeyHash {
    std::size_t operator()(const VertexKey& k) const noexcept {
        std::uint64_t h = 0x9E3779B97F4A7C15ULL;
        for (auto c : k) {
            h ^= static_cast<std::uint64_t>(c) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
            h *= 0xBF58476D1CE4E5B9ULL;
            h ^= h >> 31;
        }
        return static_cast<std::size_t>(h);
    }
};

struct Point2 {
    double x = 0;
    double y = 0;
};

class GraphFamily {
public:
    static GraphFamily hypercubic(int d);
    static GraphFamily slab(int d, int k, int m);
    static GraphFamily cylinder(int m);
    static GraphFamily triangular();
    static GraphFamily hexagonal();
    static GraphFamily kagome312();
    static GraphFamily regular_tree(int degree);
    static GraphFamily heisenberg3();
    static GraphFamily macro_grid(int n);

    // Accepts the names produced by name(), e.g. "HyperCubic(2)", "Slab(3,1,4)", "Kagome312".
    static GraphFamily parse(std::string_view text);

    FamilyKind kind() const noexcept { return kind_; }
    const std::vector<int>& params() const noexcept { return params_; }
    std::string name() const;
    int degree() const noexcept;
    bool planar() const noexcept;
    bool finite() const noexcept;

    VertexKey root() const noexcept { return VertexKey{}; }
    // Neighbours of `v` in a fixed order; the rule never emits duplicates or loops.
    void neighbors(const VertexKey& v, std::vector<VertexKey>& out) const;
    // Euclidean embedding for planar families, scaled so one translation period is 1.
    std::optional<Point2> embed(const VertexKey& v) const;
    // Largest ball radius the key encoding supports (trees store words in one integer).
    int max_radius() const noexcept;

    bool operator==(const GraphFamily& o) const { return kind_ == o.kind_ && params_ == o.params_; }

private:
    GraphFamily(FamilyKind kind, std::vector<int> params);
    FamilyKind kind_;
    std::vector<int> params_;
};

}  // namespace perclab
