// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/constellation.hpp"

#include "thz/errors.hpp"

#include <cmath>
#include <string>

namespace thz
{

unsigned gray_encode(unsigned k) noexcept
{
    return k ^ (k >> 1);
}

unsigned gray_decode(unsigned g) noexcept
{
    unsigned k = g;
    for (unsigned shift = 1; shift < 32; shift <<= 1)
        k ^= k >> shift;
    return k;
}

Constellation::Constellation(int order, double power) : order_(order), power_(power)
{
    if (order != 2 && order != 4 && order != 16 && order != 64)
        raise(ErrorCode::UnsupportedOrder, "constellation order " + std::to_string(order));
    if (!(power > 0.0) || !std::isfinite(power))
        raise(ErrorCode::InvalidArgument, "constellation power must be positive");

    bits_ = static_cast<int>(std::lround(std::log2(order)));
    if (order == 2)
    {
        levels_ = 2;
        scale_ = std::sqrt(power);
        points_ = {cd(-scale_, 0.0), cd(scale_, 0.0)};
        return;
    }

    levels_ = 1 << (bits_ / 2);
    // Mean energy of the unscaled grid is 2 (La^2 - 1) / 3.
    const double base = 2.0 * (levels_ * levels_ - 1) / 3.0;
    scale_ = std::sqrt(power / base);

    const int half = bits_ / 2;
    const unsigned mask = (1u << half) - 1u;
    points_.resize(static_cast<std::size_t>(order));
    for (int label = 0; label < order; ++label)
    {
        const auto ki = static_cast<int>(gray_decode(static_cast<unsigned>(label) >> half));
        const auto kq = static_cast<int>(gray_decode(static_cast<unsigned>(label) & mask));
        points_[static_cast<std::size_t>(label)] =
            cd(scale_ * (2 * ki - (levels_ - 1)), scale_ * (2 * kq - (levels_ - 1)));
    }
}

int Constellation::axis_index(double t) const noexcept
{
    // t in units of scale_: level k sits at 2k - (La - 1).
    const double pos = (t / scale_ + (levels_ - 1)) * 0.5;
    double k = std::floor(pos + 0.5);
    if (!(k >= 0.0))
        k = 0.0;
    if (k > levels_ - 1)
        k = levels_ - 1;
    return static_cast<int>(k);
}

int Constellation::slice(cd v) const noexcept
{
    const int ki = axis_index(v.real());
    if (order_ == 2)
        return ki;
    const int kq = axis_index(v.imag());
    const int half = bits_ / 2;
    return static_cast<int>((gray_encode(static_cast<unsigned>(ki)) << half) | gray_encode(static_cast<unsigned>(kq)));
}

void Constellation::label_bits(int label, std::uint8_t *out) const noexcept
{
    for (int b = 0; b < bits_; ++b)
        out[b] = static_cast<std::uint8_t>((label >> (bits_ - 1 - b)) & 1);
}

int Constellation::bits_label(const std::uint8_t *bits) const noexcept
{
    int label = 0;
    for (int b = 0; b < bits_; ++b)
        label = (label << 1) | (bits[b] & 1);
    return label;
}

Constellation build_qam(int order, double power)
{
    return Constellation(order, power);
}

SymbolVector modulate(std::span<const std::uint8_t> bits, const Constellation &c)
{
    const auto m = static_cast<std::size_t>(c.bits_per_symbol());
    if (bits.size() % m != 0)
        raise(ErrorCode::LengthMismatch,
              std::to_string(bits.size()) + " bits not divisible by " + std::to_string(m) + " bits per symbol");
    SymbolVector out(bits.size() / m);
    for (std::size_t s = 0; s < out.size(); ++s)
        out[s] = c.bits_label(bits.data() + s * m);
    return out;
}

BitVector demap(std::span<const int> symbols, const Constellation &c)
{
    const auto m = static_cast<std::size_t>(c.bits_per_symbol());
    BitVector out(symbols.size() * m);
    for (std::size_t s = 0; s < symbols.size(); ++s)
    {
        if (symbols[s] < 0 || symbols[s] >= c.order())
            raise(ErrorCode::OutOfRange, "symbol label " + std::to_string(symbols[s]));
        c.label_bits(symbols[s], out.data() + s * m);
    }
    return out;
}

ComplexVector to_complex(std::span<const int> symbols, const Constellation &c)
{
    ComplexVector out(static_cast<Eigen::Index>(symbols.size()));
    for (std::size_t s = 0; s < symbols.size(); ++s)
        out(static_cast<Eigen::Index>(s)) = c.point(symbols[s]);
    return out;
}

} // namespace thz
