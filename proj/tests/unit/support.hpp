// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_TEST_SUPPORT_HPP
#define THZ_TEST_SUPPORT_HPP

#include "thz/constellation.hpp"
#include "thz/errors.hpp"
#include "thz/numerics.hpp"
#include "thz/rng.hpp"

#include <doctest.h>

#include <cstdint>
#include <functional>

namespace thz::test
{

inline CounterRng make_rng(std::uint64_t seed)
{
    return CounterRng(seed, 0, make_substream(Substream::Generic));
}

inline ComplexMatrix gaussian(int m, int n, CounterRng &rng)
{
    ComplexMatrix h(m, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i)
            h(i, j) = rng.complex_normal();
    return h;
}

inline SymbolVector random_symbols(int n, const Constellation &c, CounterRng &rng)
{
    SymbolVector x(static_cast<std::size_t>(n));
    for (auto &v : x)
        v = static_cast<int>(rng() % static_cast<unsigned>(c.order()));
    return x;
}

inline ComplexVector noise(int m, double sigma2, CounterRng &rng)
{
    ComplexVector v(m);
    for (int i = 0; i < m; ++i)
        v(i) = rng.complex_normal(sigma2);
    return v;
}

// Upper-triangular with real positive diagonal, well away from singular.
inline ComplexMatrix random_upper(int n, CounterRng &rng)
{
    ComplexMatrix r = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
    {
        r(i, i) = 0.5 + rng.uniform();
        for (int j = i + 1; j < n; ++j)
            r(i, j) = 0.5 * rng.complex_normal();
    }
    return r;
}

// Code of the Error thrown by fn; fails the test when nothing is thrown.
inline ErrorCode code_of(const std::function<void()> &fn)
{
    try
    {
        fn();
    }
    catch (const Error &e)
    {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

} // namespace thz::test

#endif
