#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hhnet/rng.hpp"

using namespace hhnet;

TEST(Philox, KnownAnswerVectors) {
    // Reference outputs of Philox4x32-10 for fixed (counter, key) inputs.
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
              (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
              (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, SameKeySameSequence) {
    RandomStream a(42, StreamKind::synapse, 7), b(42, StreamKind::synapse, 7);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.uniform(), b.uniform());
}

TEST(RandomStream, StreamsAreIndependentOfEachOther) {
    RandomStream a(42, StreamKind::synapse, 7);
    std::vector<double> ref;
    for (int i = 0; i < 100; ++i) ref.push_back(a.uniform());

    // interleave draws on other streams; stream 7 must not notice
    RandomStream b(42, StreamKind::synapse, 7), other(42, StreamKind::synapse, 8), nrn(42, StreamKind::neuron, 7);
    for (int i = 0; i < 100; ++i) {
        other.gaussian();
        nrn.uniform();
        ASSERT_EQ(b.uniform(), ref[i]);
    }
}

TEST(RandomStream, DifferentKeysDiffer) {
    std::set<double> first;
    for (std::uint64_t seed : {1u, 2u})
        for (auto kind : {StreamKind::topology, StreamKind::stimulus, StreamKind::neuron, StreamKind::synapse})
            for (std::uint32_t id : {0u, 1u, 1000u}) first.insert(RandomStream(seed, kind, id).uniform());
    EXPECT_EQ(first.size(), 2u * 4u * 3u);
}

TEST(RandomStream, CounterResumes) {
    RandomStream a(9, StreamKind::synapse, 3);
    for (int i = 0; i < 17; ++i) a.gaussian(1.0, 2.0);
    RandomStream b(9, StreamKind::synapse, 3, a.counter());
    for (int i = 0; i < 50; ++i) ASSERT_EQ(a.uniform(), b.uniform());
}

TEST(RandomStream, UniformInHalfOpenUnitInterval) {
    RandomStream r(1, StreamKind::topology, 0);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    // mean 1/2, sd of the mean sqrt(1/12/n)
    EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RandomStream, GaussianMoments) {
    RandomStream r(5, StreamKind::topology, 0);
    const int n = 200000;
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
        const double g = r.gaussian(10.0, 4.0);  // variance 4
        s += g;
        ss += g * g;
    }
    const double mean = s / n;
    const double var = ss / n - mean * mean;
    EXPECT_NEAR(mean, 10.0, 4 * 2.0 / std::sqrt(n));
    EXPECT_NEAR(var, 4.0, 0.05);
}

TEST(RandomStream, BelowIsUniformOverRange) {
    RandomStream r(3, StreamKind::stimulus, 0);
    std::array<int, 7> hist{};
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const auto k = r.below(7);
        ASSERT_LT(k, 7u);
        ++hist[k];
    }
    for (int c : hist) EXPECT_NEAR(c, n / 7.0, 5 * std::sqrt(n / 7.0));
}
