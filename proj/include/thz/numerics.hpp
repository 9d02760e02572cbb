// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_NUMERICS_HPP
#define THZ_NUMERICS_HPP

#include "thz/flops.hpp"

#include <Eigen/Dense>
#include <complex>

namespace thz
{

using cd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct DecompositionOptions
{
    double rank_tolerance = 1e-10; // relative to ||H||_F
    FlopCounter *counter = nullptr;
};

// H = Q R, Q is M x N with orthonormal columns, R is N x N upper triangular
// with real positive diagonal (imaginary parts exactly zero).
struct QrFactors
{
    ComplexMatrix q;
    ComplexMatrix r;
};

// W^H H = Rp. Rp keeps the diagonal and the last column; entries (u, v) with
// u < v < N-1 (0-based) are exactly zero. W has unit-norm columns and its last
// column equals the last column of Q.
struct WrFactors
{
    ComplexMatrix w;
    ComplexMatrix r;
};

// Householder QR with a final phase correction. Throws RankDeficient when a
// pivot |r_kk| falls below tolerance * ||H||_F, DimensionMismatch when M < N.
QrFactors qr_decompose(const ComplexMatrix &h, const DecompositionOptions &opts = {});

// Punctures an existing QR factorization with elementary row operations on R.
// Row u of the result is the unit vector in span(H) orthogonal to every column
// except u and N-1. Rows N-2 and N-1 are taken from the QR unchanged.
WrFactors puncture(const QrFactors &qr, const DecompositionOptions &opts = {});

// qr_decompose followed by puncture. For N <= 2 the result equals the QR.
WrFactors wr_decompose(const ComplexMatrix &h, const DecompositionOptions &opts = {});

// Bottom-right S x S block. Throws OutOfRange unless 1 <= S <= N.
ComplexMatrix trailing_submatrix(const ComplexMatrix &r, Eigen::Index size);

// Structure-aware products used by the detectors. Counts only the operations
// implied by the nonzero pattern.
ComplexVector upper_product(const ComplexMatrix &r, const ComplexVector &x, FlopCounter *counter = nullptr);
ComplexVector punctured_product(const ComplexMatrix &rp, const ComplexVector &x, FlopCounter *counter = nullptr);

// Conjugate-transpose transform Q^H y (or W^H y).
ComplexVector adjoint_apply(const ComplexMatrix &q, const ComplexVector &y, FlopCounter *counter = nullptr);

// Spectral condition number via singular values.
double condition_number(const ComplexMatrix &h);

bool all_finite(const ComplexMatrix &m) noexcept;

} // namespace thz

#endif
