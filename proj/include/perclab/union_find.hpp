#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace perclab {

// Union by size with path halving.
class UnionFind {
public:
    explicit UnionFind(std::size_t n = 0) { reset(n); }

    void reset(std::size_t n) {
        parent_.resize(n);
        std::iota(parent_.begin(), parent_.end(), 0u);
        size_.assign(n, 1);
        components_ = n;
    }

    std::uint32_t find(std::uint32_t x) noexcept {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Returns the new root, or UINT32_MAX if already joined.
    std::uint32_t unite(std::uint32_t a, std::uint32_t b) noexcept {
        a = find(a);
        b = find(b);
        if (a == b) return UINT32_MAX;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        --components_;
        return a;
    }

    bool same(std::uint32_t a, std::uint32_t b) noexcept { return find(a) == find(b); }
    std::uint32_t size_of(std::uint32_t x) noexcept { return size_[find(x)]; }
    std::size_t components() const noexcept { return components_; }
    std::size_t universe() const noexcept { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
    std::size_t components_ = 0;
};

}  // namespace perclab
