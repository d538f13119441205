// Counter-based random streams.
//
// Every stochastic entity (synapse, neuron, topology builder, stimulus
// builder) owns an independent stream keyed by (seed, kind, id). A stream's
// only mutable state is a 64-bit counter, so draws on one stream never
// perturb another and the whole generator state serializes trivially.
#pragma once

#include <array>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace hhnet {

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{M0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{M1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

enum class StreamKind : std::uint32_t { topology = 1, stimulus = 2, neuron = 3, synapse = 4 };

class RandomStream {
public:
    RandomStream() = default;
    RandomStream(std::uint64_t seed, StreamKind kind, std::uint32_t id, std::uint64_t counter = 0)
        : seed_(seed), kind_(kind), id_(id), counter_(counter) {}

    /// Uniform double in [0, 1) with 53 random bits. Consumes one block.
    double uniform() {
        const auto block = next_block();
        return to_unit(block[0], block[1]);
    }

    /// Standard normal via Box-Muller (cosine branch). Consumes one block.
    double gaussian() {
        const auto block = next_block();
        const double u1 = 1.0 - to_unit(block[0], block[1]);  // (0, 1]
        const double u2 = to_unit(block[2], block[3]);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Gaussian with the given mean and *variance*.
    double gaussian(double mean, double variance) {
        return mean + std::sqrt(variance) * gaussian();
    }

    /// Uniform integer in [0, n) by modulo reduction of a 64-bit draw; bias is
    /// at most n / 2^64.
    std::uint64_t below(std::uint64_t n) {
        const auto block = next_block();
        const std::uint64_t x = (std::uint64_t{block[0]} << 32) | block[1];
        return x % n;
    }

    std::uint64_t counter() const { return counter_; }
    void set_counter(std::uint64_t c) { counter_ = c; }
    std::uint64_t seed() const { return seed_; }
    StreamKind kind() const { return kind_; }
    std::uint32_t id() const { return id_; }

    friend bool operator==(const RandomStream&, const RandomStream&) = default;

private:
    std::array<std::uint32_t, 4> next_block() {
        const std::uint64_t c = counter_++;
        return philox4x32({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32), id_,
                           static_cast<std::uint32_t>(kind_)},
                          {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    }

    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

    std::uint64_t seed_ = 0;
    StreamKind kind_ = StreamKind::topology;
    std::uint32_t id_ = 0;
    std::uint64_t counter_ = 0;
};

/// Anything that can feed the stochastic synapse and topology operations.
template <class R>
concept UniformGaussianSource = requires(R r, double a, double b) {
    { r.uniform() } -> std::convertible_to<double>;
    { r.gaussian(a, b) } -> std::convertible_to<double>;
};

}  // namespace hhnet
