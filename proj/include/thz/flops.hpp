// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_FLOPS_HPP
#define THZ_FLOPS_HPP

#include <cstdint>

namespace thz
{

// Operation tallies, incremented at block granularity by the kernels that
// accept a FlopCounter pointer. A null pointer disables counting.
//
// Real-operation conversion:
//   complex multiply = 4 RML + 2 RAD
//   complex add      = 2 RAD
//   real division and square root are tallied as RML
struct FlopCounter
{
    std::uint64_t cmul = 0;
    std::uint64_t cadd = 0;
    std::uint64_t rmul = 0;
    std::uint64_t radd = 0;
    std::uint64_t rdiv = 0;
    std::uint64_t rsqrt = 0;

    std::uint64_t rml() const noexcept { return 4 * cmul + rmul + rdiv + rsqrt; }
    std::uint64_t rad() const noexcept { return 2 * cmul + 2 * cadd + radd; }
    std::uint64_t flops() const noexcept { return rml() + rad(); }

    FlopCounter &operator+=(const FlopCounter &o) noexcept
    {
        cmul += o.cmul;
        cadd += o.cadd;
        rmul += o.rmul;
        radd += o.radd;
        rdiv += o.rdiv;
        rsqrt += o.rsqrt;
        return *this;
    }
};

inline void tally(FlopCounter *c, std::uint64_t cmul, std::uint64_t cadd, std::uint64_t rmul = 0,
                  std::uint64_t radd = 0, std::uint64_t rdiv = 0, std::uint64_t rsqrt = 0) noexcept
{
    if (c == nullptr)
        return;
    c->cmul += cmul;
    c->cadd += cadd;
    c->rmul += rmul;
    c->radd += radd;
    c->rdiv += rdiv;
    c->rsqrt += rsqrt;
}

// Per-phase breakdown of one detection call.
struct ComplexityReport
{
    FlopCounter decomposition; // QRD work
    FlopCounter puncturing;    // WRD elementary row operations on top of the QRD
    FlopCounter products;      // detection: transforms, back-substitution, distances, cancellation

    FlopCounter total() const noexcept
    {
        FlopCounter t = decomposition;
        t += puncturing;
        t += products;
        return t;
    }
    std::uint64_t rad() const noexcept { return total().rad(); }
    std::uint64_t rml() const noexcept { return total().rml(); }
    std::uint64_t flops() const noexcept { return rad() + rml(); }
};

} // namespace thz

#endif
