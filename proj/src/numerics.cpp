// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/numerics.hpp"

#include "thz/errors.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace thz
{

QrFactors qr_decompose(const ComplexMatrix &h, const DecompositionOptions &opts)
{
    const Eigen::Index M = h.rows();
    const Eigen::Index N = h.cols();
    if (N < 1 || M < N)
        raise(ErrorCode::DimensionMismatch,
              "qr_decompose needs M >= N >= 1, got " + std::to_string(M) + "x" + std::to_string(N));
    if (!all_finite(h))
        raise(ErrorCode::InvalidArgument, "qr_decompose: non-finite channel entry");

    FlopCounter *fc = opts.counter;
    const double tol = opts.rank_tolerance * h.norm();

    ComplexMatrix a = h;
    std::vector<ComplexVector> reflectors(static_cast<std::size_t>(N));
    std::vector<double> betas(static_cast<std::size_t>(N), 0.0);

    for (Eigen::Index k = 0; k < N; ++k)
    {
        const Eigen::Index m = M - k;
        auto x = a.col(k).tail(m);
        const double xnorm = x.norm();
        tally(fc, 0, 0, 2 * m, 2 * m - 1, 0, 1);
        if (!(xnorm > tol) || xnorm == 0.0)
            raise(ErrorCode::RankDeficient, "QR pivot " + std::to_string(k) + " below tolerance");

        const double x0abs = std::abs(x(0));
        const cd phase = x0abs > 0.0 ? x(0) / x0abs : cd(1.0, 0.0);
        tally(fc, 0, 0, 2, 1, 2, 1);
        const cd alpha = -phase * xnorm;

        ComplexVector v = x;
        v(0) -= alpha;
        tally(fc, 0, 1, 2);
        const double vnorm2 = 2.0 * xnorm * (xnorm + x0abs);
        tally(fc, 0, 0, 2, 1);
        const double beta = 2.0 / vnorm2;
        tally(fc, 0, 0, 0, 0, 1);

        for (Eigen::Index j = k + 1; j < N; ++j)
        {
            auto col = a.col(j).tail(m);
            const cd s = beta * v.dot(col); // v^H col
            col.noalias() -= s * v;
            tally(fc, 2 * m, 2 * m - 1, 2, 0);
        }
        a(k, k) = alpha;
        a.col(k).tail(m - 1).setZero();

        reflectors[static_cast<std::size_t>(k)] = std::move(v);
        betas[static_cast<std::size_t>(k)] = beta;
    }

    ComplexMatrix q = ComplexMatrix::Identity(M, N);
    for (Eigen::Index k = N - 1; k >= 0; --k)
    {
        const Eigen::Index m = M - k;
        const ComplexVector &v = reflectors[static_cast<std::size_t>(k)];
        const double beta = betas[static_cast<std::size_t>(k)];
        for (Eigen::Index j = k; j < N; ++j)
        {
            auto col = q.col(j).tail(m);
            const cd s = beta * v.dot(col);
            col.noalias() -= s * v;
            tally(fc, 2 * m, 2 * m - 1, 2, 0);
        }
    }

    ComplexMatrix r = a.topRows(N).triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < N; ++k)
    {
        const double mag = std::abs(r(k, k));
        const cd d = std::conj(r(k, k)) / mag;
        r.row(k).tail(N - k - 1) *= d;
        q.col(k) *= std::conj(d);
        r(k, k) = cd(mag, 0.0);
        tally(fc, static_cast<std::uint64_t>(N - k - 1 + M), 0, 2, 1, 2, 1);
    }
    return {std::move(q), std::move(r)};
}

WrFactors puncture(const QrFactors &qr, const DecompositionOptions &opts)
{
    const Eigen::Index M = qr.q.rows();
    const Eigen::Index N = qr.r.cols();
    if (qr.r.rows() != N || qr.q.cols() != N)
        raise(ErrorCode::DimensionMismatch, "puncture: inconsistent QR factor shapes");

    WrFactors out{qr.q, qr.r};
    if (N <= 2)
        return out;

    FlopCounter *fc = opts.counter;
    const double tol = opts.rank_tolerance * qr.r.norm();
    const Eigen::Index last = N - 1;

    ComplexMatrix &rp = out.r;
    ComplexMatrix l = ComplexMatrix::Identity(N, N);

    // Bottom-up: rows v > u are already punctured when row u is processed, so
    // subtracting f * row v touches only (u, v) and (u, last).
    for (Eigen::Index u = N - 3; u >= 0; --u)
    {
        for (Eigen::Index v = u + 1; v <= N - 2; ++v)
        {
            const cd f = rp(u, v) / rp(v, v).real();
            rp(u, v) = cd(0.0, 0.0);
            rp(u, last) -= f * rp(v, last);
            l.row(u).segment(v, N - 1 - v) -= f * l.row(v).segment(v, N - 1 - v);
            tally(fc, static_cast<std::uint64_t>(1 + (N - 1 - v)), static_cast<std::uint64_t>(1 + (N - 1 - v)), 0, 0,
                  2);
        }
    }

    // W = Q L^H, then unit-normalize columns u <= N-3 and the matching rows.
    for (Eigen::Index u = 0; u <= N - 3; ++u)
    {
        const Eigen::Index span = N - 1 - u;
        ComplexVector wu = qr.q.middleCols(u, span) * l.row(u).segment(u, span).adjoint();
        tally(fc, static_cast<std::uint64_t>(M * span), static_cast<std::uint64_t>(M * (span - 1)));
        const double s = wu.norm();
        tally(fc, 0, 0, 2 * M, 2 * M - 1, 0, 1);
        const double diag = rp(u, u).real() / s;
        if (!(diag > tol))
            raise(ErrorCode::RankDeficient, "WR pivot " + std::to_string(u) + " below tolerance");
        const double inv = 1.0 / s;
        out.w.col(u) = wu * inv;
        rp(u, u) = cd(diag, 0.0);
        rp(u, last) *= inv;
        tally(fc, 0, 0, 2 * M + 3, 0, 2);
    }
    return out;
}

WrFactors wr_decompose(const ComplexMatrix &h, const DecompositionOptions &opts)
{
    return puncture(qr_decompose(h, opts), opts);
}

ComplexMatrix trailing_submatrix(const ComplexMatrix &r, Eigen::Index size)
{
    const Eigen::Index N = r.cols();
    if (size < 1 || size > N || r.rows() != N)
        raise(ErrorCode::OutOfRange,
              "trailing_submatrix size " + std::to_string(size) + " outside [1, " + std::to_string(N) + "]");
    return r.bottomRightCorner(size, size);
}

ComplexVector upper_product(const ComplexMatrix &r, const ComplexVector &x, FlopCounter *counter)
{
    const Eigen::Index N = r.cols();
    if (r.rows() != N || x.size() != N)
        raise(ErrorCode::DimensionMismatch, "upper_product: shape mismatch");
    // Exact zeros above the diagonal are skipped, so a diagonal input costs
    // N multiplications.
    ComplexVector out(N);
    std::uint64_t muls = 0;
    std::uint64_t adds = 0;
    for (Eigen::Index u = 0; u < N; ++u)
    {
        cd acc = r(u, u) * x(u);
        ++muls;
        for (Eigen::Index v = u + 1; v < N; ++v)
            if (r(u, v) != cd(0.0))
            {
                acc += r(u, v) * x(v);
                ++muls;
                ++adds;
            }
        out(u) = acc;
    }
    tally(counter, muls, adds);
    return out;
}

ComplexVector punctured_product(const ComplexMatrix &rp, const ComplexVector &x, FlopCounter *counter)
{
    const Eigen::Index N = rp.cols();
    if (rp.rows() != N || x.size() != N)
        raise(ErrorCode::DimensionMismatch, "punctured_product: shape mismatch");
    // Reads only the diagonal and the last column; zeros there are skipped too.
    ComplexVector out(N);
    const Eigen::Index last = N - 1;
    std::uint64_t muls = 0;
    std::uint64_t adds = 0;
    for (Eigen::Index u = 0; u < last; ++u)
    {
        out(u) = rp(u, u) * x(u);
        ++muls;
        if (rp(u, last) != cd(0.0))
        {
            out(u) += rp(u, last) * x(last);
            ++muls;
            ++adds;
        }
    }
    out(last) = rp(last, last) * x(last);
    tally(counter, muls + 1, adds);
    return out;
}

ComplexVector adjoint_apply(const ComplexMatrix &q, const ComplexVector &y, FlopCounter *counter)
{
    if (q.rows() != y.size())
        raise(ErrorCode::DimensionMismatch, "adjoint_apply: shape mismatch");
    tally(counter, static_cast<std::uint64_t>(q.rows() * q.cols()),
          static_cast<std::uint64_t>((q.rows() - 1) * q.cols()));
    return q.adjoint() * y;
}

double condition_number(const ComplexMatrix &h)
{
    Eigen::JacobiSVD<ComplexMatrix> svd(h);
    const auto &s = svd.singularValues();
    if (s.size() == 0)
        return 0.0;
    const double smin = s(s.size() - 1);
    return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

bool all_finite(const ComplexMatrix &m) noexcept
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
                return false;
    return true;
}

} // namespace thz
