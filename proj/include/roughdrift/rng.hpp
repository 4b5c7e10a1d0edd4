#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace roughdrift {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Stateless: the output is a pure function of (key, counter).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    explicit constexpr Philox4x32(Key key) : key_(key) {}
    explicit constexpr Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    constexpr Counter operator()(Counter ctr) const {
        Key k = key_;
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0};
        }
        return ctr;
    }

private:
    Key key_;
};

/// Uniform in (0, 1) from 64 random bits, 53-bit resolution, never 0 or 1.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Stream tags separate independent uses of the same seed.
enum class Stream : std::uint32_t {
    brownian = 0,
    probes = 1,
    auxiliary = 2,
};

/// Standard normals keyed by (seed, stream, index, step, slot).
///
/// Each call produces the pair of normals for slot pair `pair` of
/// (index, step): axes 2*pair and 2*pair + 1. Values for one path never
/// depend on how paths are partitioned across workers.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed, Stream stream = Stream::brownian)
        : gen_(seed), stream_(static_cast<std::uint32_t>(stream)) {}

    std::array<double, 2> pair(std::uint64_t index, std::uint32_t step, std::uint32_t pair) const {
        const auto out = gen_({step, static_cast<std::uint32_t>(index),
                               static_cast<std::uint32_t>(index >> 32), (stream_ << 16) | pair});
        const double u1 = to_open_unit(out[0], out[1]);
        const double u2 = to_open_unit(out[2], out[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    double normal(std::uint64_t index, std::uint32_t step, std::uint32_t slot) const {
        const auto p = pair(index, step, slot / 2);
        return p[slot % 2];
    }

    /// Uniform in (0, 1) for auxiliary draws (probe placement and the like).
    double uniform(std::uint64_t index, std::uint32_t step, std::uint32_t slot) const {
        const auto out = gen_({step, static_cast<std::uint32_t>(index),
                               static_cast<std::uint32_t>(index >> 32), (stream_ << 16) | (slot / 2)});
        return slot % 2 == 0 ? to_open_unit(out[0], out[1]) : to_open_unit(out[2], out[3]);
    }

private:
    Philox4x32 gen_;
    std::uint32_t stream_;
};

}  // namespace roughdrift
