#pragma once

#include <array>
#include <cstdint>

namespace perclab {

// Philox4x32-10 counter-based generator. Every random number in the library is
// a pure function of (seed, stream, replica, index), so results do not depend
// on thread count or evaluation order.
class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block generate(std::uint64_t key, Block ctr) noexcept {
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return ctr;
    }
};

enum class Stream : std::uint16_t {
    EdgeLabel = 1,
    GhostA = 2,
    GhostB = 3,
    Walk = 4,
    Coupling = 5,
    Tubes = 6,
    Misc = 7,
};

inline constexpr const char* kGeneratorId = "philox4x32-10";

// 64 random bits for (seed, stream, replica, index). Replica is limited to 48 bits.
inline std::uint64_t random_bits(std::uint64_t seed, Stream stream, std::uint64_t replica,
                                 std::uint64_t index) noexcept {
    const Philox::Block ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                            static_cast<std::uint32_t>(replica),
                            static_cast<std::uint32_t>((replica >> 32) & 0xFFFFu) |
                                (std::uint32_t{static_cast<std::uint16_t>(stream)} << 16)};
    const auto out = Philox::generate(seed, ctr);
    return (std::uint64_t{out[0]} << 32) | out[1];
}

inline double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in [0,1).
inline double uniform(std::uint64_t seed, Stream stream, std::uint64_t replica, std::uint64_t index) noexcept {
    return to_unit(random_bits(seed, stream, replica, index));
}

// Sequential view of one (seed, stream, replica) counter range, for consumers
// that need an unbounded number of draws (walks, samplers).
class CounterStream {
public:
    CounterStream(std::uint64_t seed, Stream stream, std::uint64_t replica, std::uint64_t start = 0)
        : seed_(seed), stream_(stream), replica_(replica), next_(start) {}

    std::uint64_t bits() noexcept { return random_bits(seed_, stream_, replica_, next_++); }
    double uniform() noexcept { return to_unit(bits()); }

    // Unbiased integer in [0, n) (Lemire's multiply-and-reject).
    std::uint64_t below(std::uint64_t n) noexcept {
        if (n <= 1) return 0;
        while (true) {
            const unsigned __int128 m = static_cast<unsigned __int128>(bits()) * n;
            const auto low = static_cast<std::uint64_t>(m);
            if (low >= n || low >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    std::uint64_t position() const noexcept { return next_; }

private:
    std::uint64_t seed_;
    Stream stream_;
    std::uint64_t replica_;
    std::uint64_t next_;
};

// Derives an independent 64-bit seed from a parent seed and a tag, used when an
// experiment needs several unrelated label families from one config seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return random_bits(seed ^ 0x5DEECE66DULL, Stream::Misc, 0xFFFFFFFFFFFFULL, tag);
}

}  // namespace perclab
