// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_RNG_HPP
#define THZ_RNG_HPP

#include <array>
#include <complex>
#include <cstdint>

namespace thz
{

// Philox4x32-10 block function. Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

// Purpose tags folded into the substream word. Two generators with different
// (seed, stream, substream) triples never share a counter block.
enum class Substream : std::uint32_t
{
    Channel = 1,
    Bits = 2,
    Noise = 3,
    Drop = 4,
    Generic = 15
};

constexpr std::uint32_t make_substream(Substream tag, std::uint32_t index = 0) noexcept
{
    return (static_cast<std::uint32_t>(tag) << 24) | (index & 0x00FFFFFFu);
}

// Counter-based generator keyed by (seed, stream, substream). The output
// sequence depends only on the key triple, never on scheduling.
class CounterRng
{
public:
    using result_type = std::uint32_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return 0xFFFFFFFFu; }

    result_type operator()() noexcept;
    std::uint64_t next_u64() noexcept;

    double uniform() noexcept;          // [0, 1)
    double uniform_open() noexcept;     // (0, 1]
    double normal() noexcept;           // N(0, 1)
    std::complex<double> complex_normal(double variance = 1.0) noexcept; // CN(0, variance)
    double exponential(double rate) noexcept;
    std::uint64_t poisson(double mean) noexcept;
    int bit() noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace thz

#endif
