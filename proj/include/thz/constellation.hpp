// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_CONSTELLATION_HPP
#define THZ_CONSTELLATION_HPP

#include "thz/numerics.hpp"

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace thz
{

// Indices into Constellation::points(); every entry is a valid label.
using SymbolVector = std::vector<int>;
using BitVector = std::vector<std::uint8_t>;

// Square Gray-mapped QAM (BPSK for order 2) with average symbol energy p.
//
// Layout: a label of m = log2(L) bits is split MSB-first into an in-phase
// half and a quadrature half, each the reflected Gray code of the level index
// k along its axis. Level k sits at amplitude 2k - (La - 1) before scaling,
// La = sqrt(L). BPSK uses the in-phase axis only: bit 0 -> -sqrt(p).
class Constellation
{
public:
    Constellation(int order, double power);

    int order() const noexcept { return order_; }
    int bits_per_symbol() const noexcept { return bits_; }
    double power() const noexcept { return power_; }
    // Half the distance between adjacent levels on one axis.
    double scale() const noexcept { return scale_; }

    const std::vector<cd> &points() const noexcept { return points_; }
    cd point(int label) const { return points_.at(static_cast<std::size_t>(label)); }

    // Nearest point. Ties resolve toward larger real part, then larger
    // imaginary part.
    int slice(cd v) const noexcept;

    // Bits of a label, MSB first.
    void label_bits(int label, std::uint8_t *out) const noexcept;
    int bits_label(const std::uint8_t *bits) const noexcept;

    bool operator==(const Constellation &o) const noexcept { return order_ == o.order_ && power_ == o.power_; }

private:
    int axis_index(double t) const noexcept;

    int order_;
    int bits_;
    int levels_; // per axis
    double power_;
    double scale_;
    std::vector<cd> points_;
};

Constellation build_qam(int order, double power);

SymbolVector modulate(std::span<const std::uint8_t> bits, const Constellation &c);
BitVector demap(std::span<const int> symbols, const Constellation &c);
ComplexVector to_complex(std::span<const int> symbols, const Constellation &c);

unsigned gray_encode(unsigned k) noexcept;
unsigned gray_decode(unsigned g) noexcept;

} // namespace thz

#endif
