// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace thz;

TEST_CASE("philox known answers")
{
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("same key triple gives the same sequence")
{
    CounterRng a(5, 9, make_substream(Substream::Noise, 3));
    CounterRng b(5, 9, make_substream(Substream::Noise, 3));
    for (int i = 0; i < 1000; ++i)
        CHECK(a() == b());
}

TEST_CASE("distinct keys give distinct streams")
{
    std::set<std::uint64_t> firsts;
    for (std::uint64_t seed : {1u, 2u})
        for (std::uint64_t stream : {0u, 1u, 1000u})
            for (auto tag : {Substream::Channel, Substream::Bits, Substream::Noise, Substream::Drop})
                for (std::uint32_t idx : {0u, 1u})
                {
                    CounterRng r(seed, stream, make_substream(tag, idx));
                    firsts.insert(r.next_u64());
                }
    CHECK(firsts.size() == 2 * 3 * 4 * 2);
}

TEST_CASE("substream word keeps tag and index apart")
{
    CHECK(make_substream(Substream::Noise, 0) != make_substream(Substream::Bits, 0));
    CHECK(make_substream(Substream::Noise, 1) != make_substream(Substream::Noise, 2));
    CHECK((make_substream(Substream::Noise, 0x01234567u) >> 24) == 3u);
}

TEST_CASE("uniform ranges")
{
    CounterRng r(1, 0, 0);
    for (int i = 0; i < 100000; ++i)
    {
        const double u = r.uniform();
        const double v = r.uniform_open();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("moments of the continuous samplers")
{
    CounterRng r(2, 0, 0);
    const int n = 400000;
    double m = 0, m2 = 0, e = 0, cre = 0, cim = 0, c2 = 0;
    for (int i = 0; i < n; ++i)
    {
        const double x = r.normal();
        m += x;
        m2 += x * x;
        e += r.exponential(4.0);
        const auto z = r.complex_normal(2.0);
        cre += z.real();
        cim += z.imag();
        c2 += std::norm(z);
    }
    CHECK(std::abs(m / n) < 0.01);
    CHECK(std::abs(m2 / n - 1.0) < 0.01);
    CHECK(std::abs(e / n - 0.25) < 0.0025);
    CHECK(std::abs(cre / n) < 0.01);
    CHECK(std::abs(cim / n) < 0.01);
    CHECK(std::abs(c2 / n - 2.0) < 0.02);
}

TEST_CASE("poisson mean and variance")
{
    CounterRng r(3, 0, 0);
    const int n = 200000;
    for (double mean : {0.5, 7.854, 30.0})
    {
        double s = 0, s2 = 0;
        for (int i = 0; i < n; ++i)
        {
            const auto k = static_cast<double>(r.poisson(mean));
            s += k;
            s2 += k * k;
        }
        const double mu = s / n;
        CHECK(std::abs(mu / mean - 1.0) < 0.01);
        CHECK(std::abs((s2 / n - mu * mu) / mean - 1.0) < 0.03);
    }
}

TEST_CASE("bits are balanced")
{
    CounterRng r(4, 0, 0);
    int ones = 0;
    for (int i = 0; i < 100000; ++i)
        ones += r.bit();
    CHECK(std::abs(ones - 50000) < 800);
}
