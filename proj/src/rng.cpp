// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/rng.hpp"

#include <cmath>
#include <numbers>

namespace thz
{

namespace
{
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi, std::uint32_t &lo) noexcept
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}
} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) noexcept
{
    for (int round = 0; round < 10; ++round)
    {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, substream, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)}
{
}

void CounterRng::refill() noexcept
{
    block_ = philox4x32(counter_, key_);
    ++counter_[0];
    used_ = 0;
}

CounterRng::result_type CounterRng::operator()() noexcept
{
    if (used_ == 4)
        refill();
    return block_[used_++];
}

std::uint64_t CounterRng::next_u64() noexcept
{
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return (hi << 32) | lo;
}

double CounterRng::uniform() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform_open() noexcept
{
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double CounterRng::normal() noexcept
{
    if (has_spare_)
    {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

std::complex<double> CounterRng::complex_normal(double variance) noexcept
{
    const double s = std::sqrt(0.5 * variance);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

double CounterRng::exponential(double rate) noexcept
{
    return -std::log(uniform_open()) / rate;
}

std::uint64_t CounterRng::poisson(double mean) noexcept
{
    if (!(mean > 0.0))
        return 0;
    if (mean < 30.0)
    {
        // Inversion by sequential search.
        const double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u >= cdf && k < 1000)
        {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    // Knuth multiplication on chunks keeps each factor well above underflow.
    std::uint64_t total = 0;
    double remaining = mean;
    while (remaining > 0.0)
    {
        const double chunk = remaining > 20.0 ? 20.0 : remaining;
        remaining -= chunk;
        const double limit = std::exp(-chunk);
        double prod = uniform_open();
        while (prod > limit)
        {
            ++total;
            prod *= uniform_open();
        }
    }
    return total;
}

int CounterRng::bit() noexcept
{
    return static_cast<int>((*this)() >> 31);
}

} // namespace thz
