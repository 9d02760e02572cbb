// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "support.hpp"
#include "thz/analysis.hpp"
#include "thz/detectors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace thz;
using thz::test::code_of;
using thz::test::gaussian;
using thz::test::make_rng;
using thz::test::noise;
using thz::test::random_symbols;
using thz::test::random_upper;

namespace
{

int nearest(cd v, const Constellation &c)
{
    int best = 0;
    for (int k = 1; k < c.order(); ++k)
        if (std::norm(v - c.point(k)) < std::norm(v - c.point(best)))
            best = k;
    return best;
}

// Exhaustive argmin of ||y - A x||^2 over X^S, written without the
// library's odometer or column table.
SymbolVector enumerate(const ComplexVector &y, const ComplexMatrix &a, const Constellation &c)
{
    const int s = static_cast<int>(a.cols());
    long long total = 1;
    for (int i = 0; i < s; ++i)
        total *= c.order();
    SymbolVector best;
    double bd = std::numeric_limits<double>::infinity();
    for (long long code = 0; code < total; ++code)
    {
        SymbolVector x(static_cast<std::size_t>(s));
        long long rest = code;
        for (int i = s - 1; i >= 0; --i)
        {
            x[static_cast<std::size_t>(i)] = static_cast<int>(rest % c.order());
            rest /= c.order();
        }
        ComplexVector v = y;
        for (int i = 0; i < s; ++i)
            v -= a.col(i) * c.point(x[static_cast<std::size_t>(i)]);
        const double d = v.squaredNorm();
        if (d < bd)
        {
            bd = d;
            best = x;
        }
    }
    return best;
}

// Layer-by-layer cancellation, bottom to top.
SymbolVector manual_nc(const ComplexVector &yt, const ComplexMatrix &r, const Constellation &c)
{
    const int s = static_cast<int>(r.cols());
    SymbolVector x(static_cast<std::size_t>(s));
    for (int n = s - 1; n >= 0; --n)
    {
        cd z = yt(n);
        for (int v = n + 1; v < s; ++v)
            z -= r(n, v) * c.point(x[static_cast<std::size_t>(v)]);
        x[static_cast<std::size_t>(n)] = nearest(z / r(n, n), c);
    }
    return x;
}

std::vector<DetectorKind> all_kinds() { return {std::begin(kAllDetectors), std::end(kAllDetectors)}; }

} // namespace

TEST_CASE("detector names round trip")
{
    for (auto k : kAllDetectors)
        CHECK(parse_detector(to_string(k)) == k);
    CHECK(parse_detector("ssd") == DetectorKind::SSD);
    CHECK(code_of([] { parse_detector("MMSE"); }) == ErrorCode::InvalidArgument);
    CHECK(uses_wrd(DetectorKind::PNC));
    CHECK(uses_wrd(DetectorKind::PCD));
    CHECK(uses_wrd(DetectorKind::SSD));
    CHECK_FALSE(uses_wrd(DetectorKind::LORD));
    CHECK(uses_shifts(DetectorKind::LORD));
    CHECK(uses_shifts(DetectorKind::SSD));
    CHECK_FALSE(uses_shifts(DetectorKind::CD));
}

TEST_CASE("stream plan validation")
{
    const auto c1 = build_qam(4, 1.0);
    const auto c2 = build_qam(4, 10.0);
    CHECK_NOTHROW(StreamPlan(4, {StreamSpec{4, c1, {}}, StreamSpec{2, c2, {}}}));
    CHECK(StreamPlan(4, {StreamSpec{4, c1, {}}, StreamSpec{2, c2, {}}}).columns(1) == std::vector<int>{2, 3});
    CHECK(code_of([&] { StreamPlan(4, {StreamSpec{3, c1, {}}}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { StreamPlan(4, {StreamSpec{4, c2, {}}, StreamSpec{2, c1, {}}}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([&] { StreamPlan(4, {StreamSpec{4, c1, {}}, StreamSpec{2, c2, {}}, StreamSpec{3, build_qam(4, 99), {}}}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([&] { StreamPlan(4, {StreamSpec{4, c1, {}}, StreamSpec{2, c2, {0, 2}}}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([&] { StreamPlan(4, {StreamSpec{4, c1, {}}, StreamSpec{2, c2, {3, 1}}}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([&] { StreamPlan(0, {}); }) == ErrorCode::InvalidArgument);

    const StreamPlan gap(4, {StreamSpec{4, c1, {}}, StreamSpec{2, c2, {1, 3}}});
    CHECK_FALSE(gap.contiguous());
    CHECK(gap.contiguous(0));
    CHECK(gap.total_power() == doctest::Approx(11.0));
    CHECK(gap.bits(1) == 4);
}

TEST_CASE("ML equals independent enumeration")
{
    auto rng = make_rng(1);
    const auto bpsk = build_qam(2, 1.0);
    const auto qpsk = build_qam(4, 1.0);
    for (int t = 0; t < 200; ++t)
    {
        const ComplexMatrix h4 = gaussian(4, 4, rng);
        const ComplexVector y4 = h4 * to_complex(random_symbols(4, bpsk, rng), bpsk) + noise(4, 0.5, rng);
        CHECK(detect_ml(y4, h4, bpsk) == enumerate(y4, h4, bpsk));
        const ComplexMatrix h2 = gaussian(3, 2, rng);
        const ComplexVector y2 = noise(3, 2.0, rng);
        CHECK(detect_ml(y2, h2, qpsk) == enumerate(y2, h2, qpsk));
    }
    CHECK(detect_ml(to_complex(SymbolVector{1, 3, 0}, qpsk), ComplexMatrix::Identity(3, 3), qpsk) ==
          SymbolVector{1, 3, 0});
}

TEST_CASE("ML search cap")
{
    const auto q16 = build_qam(16, 1.0);
    const ComplexMatrix h = ComplexMatrix::Identity(6, 6);
    const ComplexVector y = ComplexVector::Zero(6);
    CHECK(code_of([&] { detect_ml(y, h, q16); }) == ErrorCode::SearchSpaceTooLarge);
    CHECK(code_of([&] { detect_ml(y.head(3), h.topLeftCorner(3, 3), q16, 4095); }) ==
          ErrorCode::SearchSpaceTooLarge);
    CHECK_NOTHROW(detect_ml(y.head(3), h.topLeftCorner(3, 3), q16, 4096));
}

TEST_CASE("NC matches manual back-substitution")
{
    auto rng = make_rng(2);
    const auto qpsk = build_qam(4, 1.0);
    for (int t = 0; t < 500; ++t)
    {
        const ComplexMatrix r = random_upper(4, rng);
        const ComplexVector yt = r * to_complex(random_symbols(4, qpsk, rng), qpsk) + noise(4, 0.3, rng);
        CHECK(detect_nc(yt, r, qpsk) == manual_nc(yt, r, qpsk));
    }
}

TEST_CASE("diagonal factors reduce NC and PNC to per-layer slicing")
{
    auto rng = make_rng(3);
    const auto q16 = build_qam(16, 2.0);
    for (int t = 0; t < 200; ++t)
    {
        ComplexMatrix d = ComplexMatrix::Zero(5, 5);
        for (int i = 0; i < 5; ++i)
            d(i, i) = 0.2 + rng.uniform();
        const ComplexVector y = noise(5, 4.0, rng);
        SymbolVector sliced(5);
        for (int i = 0; i < 5; ++i)
            sliced[static_cast<std::size_t>(i)] = q16.slice(y(i) / d(i, i));
        CHECK(detect_nc(y, d, q16) == sliced);
        CHECK(detect_pnc(y, d, q16) == sliced);
    }
}

TEST_CASE("noiseless inputs are recovered exactly")
{
    auto rng = make_rng(4);
    for (int order : {2, 4, 16})
    {
        const auto c = build_qam(order, 1.0);
        for (int t = 0; t < 100; ++t)
        {
            const int n = 4;
            const ComplexMatrix h = gaussian(n, n, rng);
            const auto x = random_symbols(n, c, rng);
            const ComplexVector y = h * to_complex(x, c);
            const auto qr = qr_decompose(h);
            const auto wr = puncture(qr);
            const ComplexVector yt = adjoint_apply(qr.q, y);
            const ComplexVector yb = adjoint_apply(wr.w, y);
            CHECK(detect_nc(yt, qr.r, c) == x);
            CHECK(detect_pnc(yb, wr.r, c) == x);
            const auto cd_ = detect_cd(yt, qr.r, c);
            CHECK(cd_.symbols == x);
            CHECK(cd_.distance < 1e-20);
            const auto pcd = detect_pcd(yb, wr.r, c);
            CHECK(pcd.symbols == x);
            CHECK(pcd.distance < 1e-20);
            CHECK(detect_lord(y, h, c) == x);
            CHECK(detect_ssd(y, h, c) == x);
            if (order < 16)
                CHECK(detect_ml(y, h, c) == x);
        }
    }
}

TEST_CASE("PNC layers are independent under permutation")
{
    auto rng = make_rng(5);
    const auto qpsk = build_qam(4, 1.0);
    std::vector<int> perm = {2, 0, 1};
    for (int t = 0; t < 300; ++t)
    {
        const ComplexMatrix h = gaussian(4, 4, rng);
        const auto wr = wr_decompose(h);
        const ComplexVector yb = adjoint_apply(wr.w, h * to_complex(random_symbols(4, qpsk, rng), qpsk) +
                                                         noise(4, 0.5, rng));
        ComplexMatrix rp = ComplexMatrix::Zero(4, 4);
        ComplexVector yp(4);
        for (int i = 0; i < 3; ++i)
        {
            const int src = perm[static_cast<std::size_t>(i)];
            rp(i, i) = wr.r(src, src);
            rp(i, 3) = wr.r(src, 3);
            yp(i) = yb(src);
        }
        rp(3, 3) = wr.r(3, 3);
        yp(3) = yb(3);
        const auto base = detect_pnc(yb, wr.r, qpsk);
        const auto moved = detect_pnc(yp, rp, qpsk);
        for (int i = 0; i < 3; ++i)
            CHECK(moved[static_cast<std::size_t>(i)] == base[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
        CHECK(moved[3] == base[3]);
    }
}

TEST_CASE("chase lists dominate their single-candidate detectors")
{
    auto rng = make_rng(6);
    for (int order : {2, 4, 16})
    {
        const auto c = build_qam(order, 1.0);
        for (int t = 0; t < 500; ++t)
        {
            const int n = 2 + t % 5;
            const ComplexMatrix h = gaussian(n, n, rng);
            const ComplexVector y = h * to_complex(random_symbols(n, c, rng), c) + noise(n, 1.0, rng);
            const auto qr = qr_decompose(h);
            const auto wr = puncture(qr);
            const ComplexVector yt = adjoint_apply(qr.q, y);
            const ComplexVector yb = adjoint_apply(wr.w, y);
            CHECK(detect_cd(yt, qr.r, c).distance <= triangular_distance(yt, qr.r, detect_nc(yt, qr.r, c), c));
            CHECK(detect_pcd(yb, wr.r, c).distance <= punctured_distance(yb, wr.r, detect_pnc(yb, wr.r, c), c));
        }
    }
}

TEST_CASE("2x2 CD over QPSK equals enumeration on the triangular model")
{
    auto rng = make_rng(7);
    const auto qpsk = build_qam(4, 1.0);
    for (int t = 0; t < 500; ++t)
    {
        const ComplexMatrix r = random_upper(2, rng);
        const ComplexVector yt = noise(2, 3.0, rng);
        CHECK(detect_cd(yt, r, qpsk).symbols == enumerate(yt, r, qpsk));
    }
}

TEST_CASE("PCD inner completion equals brute force")
{
    auto rng = make_rng(8);
    const auto qpsk = build_qam(4, 1.0);
    for (int t = 0; t < 300; ++t)
    {
        const ComplexMatrix h = gaussian(4, 4, rng);
        const auto wr = wr_decompose(h);
        const ComplexVector yb = adjoint_apply(wr.w, noise(4, 2.0, rng));
        for (int root = 0; root < 4; ++root)
        {
            // Fix the root by moving its contribution to the observation.
            const ComplexVector target = yb - wr.r.col(3) * qpsk.point(root);
            auto best = enumerate(target, wr.r.leftCols(3), qpsk);
            best.push_back(root);
            CHECK(punctured_slice(yb, wr.r, qpsk, root) == best);
        }
    }
}

TEST_CASE("shift map")
{
    CHECK(shift_order(4, 1) == std::vector<int>{1, 2, 3, 0});
    CHECK(shift_order(4, 2) == std::vector<int>{2, 3, 0, 1});
    CHECK(shift_order(4, 4) == std::vector<int>{0, 1, 2, 3});
    for (int s = 1; s <= 8; ++s)
        for (int t = 1; t <= s; ++t)
            CHECK(shift_order(s, t).back() == t - 1);
    CHECK(code_of([] { shift_order(4, 0); }) == ErrorCode::OutOfRange);
    CHECK(code_of([] { shift_order(4, 5); }) == ErrorCode::OutOfRange);

    ComplexMatrix h(1, 3);
    h << 10.0, 20.0, 30.0;
    const ComplexMatrix s1 = cyclic_shift_columns(h, 1);
    CHECK(s1(0, 0) == cd(20.0));
    CHECK(s1(0, 2) == cd(10.0));
}

TEST_CASE("LORD and SSD equal per-shift recomputation")
{
    auto rng = make_rng(9);
    const auto qpsk = build_qam(4, 1.0);
    for (int t = 0; t < 200; ++t)
    {
        const ComplexMatrix h = gaussian(4, 4, rng);
        const ComplexVector y = h * to_complex(random_symbols(4, qpsk, rng), qpsk) + noise(4, 0.8, rng);
        const auto lord = detect_lord(y, h, qpsk);
        const auto ssd = detect_ssd(y, h, qpsk);
        for (int step = 1; step <= 4; ++step)
        {
            // Root of this ordering is original column step - 1.
            ComplexMatrix hs(4, 4);
            for (int j = 0; j < 4; ++j)
                hs.col(j) = h.col((step + j) % 4);
            const auto qr = qr_decompose(hs);
            const auto wr = puncture(qr);
            CHECK(lord[static_cast<std::size_t>(step - 1)] ==
                  detect_cd(adjoint_apply(qr.q, y), qr.r, qpsk).symbols.back());
            CHECK(ssd[static_cast<std::size_t>(step - 1)] ==
                  detect_pcd(adjoint_apply(wr.w, y), wr.r, qpsk).symbols.back());
        }
    }
}

TEST_CASE("diagonal channels make LORD equal NC and SSD equal PNC")
{
    auto rng = make_rng(10);
    const auto q16 = build_qam(16, 1.0);
    for (int t = 0; t < 300; ++t)
    {
        ComplexMatrix h = ComplexMatrix::Zero(4, 4);
        for (int i = 0; i < 4; ++i)
            h(i, i) = std::polar(0.3 + rng.uniform(), 6.0 * rng.uniform());
        const ComplexVector y = h * to_complex(random_symbols(4, q16, rng), q16) + noise(4, 0.3, rng);
        const auto qr = qr_decompose(h);
        const auto wr = puncture(qr);
        CHECK(detect_lord(y, h, q16) == detect_nc(adjoint_apply(qr.q, y), qr.r, q16));
        CHECK(detect_ssd(y, h, q16) == detect_pnc(adjoint_apply(wr.w, y), wr.r, q16));
    }
}

TEST_CASE("SIC algebra")
{
    auto rng = make_rng(11);
    const auto qpsk = build_qam(4, 3.0);
    const ComplexMatrix h = gaussian(4, 4, rng);
    const ComplexMatrix h2 = h.rightCols(2);
    const auto x2 = random_symbols(2, qpsk, rng);
    const ComplexVector other = gaussian(4, 1, rng);
    const ComplexVector y = other + h2 * to_complex(x2, qpsk);
    CHECK((sic_cancel(y, h2, to_complex(x2, qpsk)) - other).norm() < 1e-13);
    CHECK(sic_cancel(y, h2, ComplexVector::Zero(2)) == y);
    auto wrong = x2;
    wrong[0] = (wrong[0] + 1) % 4;
    const ComplexVector diff = sic_cancel(y, h2, to_complex(wrong, qpsk)) - sic_cancel(y, h2, to_complex(x2, qpsk));
    CHECK((diff - h2.col(0) * (qpsk.point(x2[0]) - qpsk.point(wrong[0]))).norm() < 1e-13);
    CHECK(code_of([&] { sic_cancel(y, h2, ComplexVector::Zero(3)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("single stream superposition reduces to the plain detectors")
{
    auto rng = make_rng(12);
    const auto qpsk = build_qam(4, 1.0);
    const StreamPlan plan(4, {StreamSpec{4, qpsk, {}}});
    const auto kinds = all_kinds();
    for (int t = 0; t < 100; ++t)
    {
        const ComplexMatrix h = gaussian(4, 4, rng);
        const ComplexVector y = h * to_complex(random_symbols(4, qpsk, rng), qpsk) + noise(4, 0.5, rng);
        const auto f = ChannelFactors::prepare(h, plan, kinds);
        const auto qr = qr_decompose(h);
        const auto wr = puncture(qr);
        const ComplexVector yt = adjoint_apply(qr.q, y);
        const ComplexVector yb = adjoint_apply(wr.w, y);
        CHECK(detect_superposed(y, f, plan, DetectorKind::ML).streams[0].symbols == detect_ml(y, h, qpsk));
        CHECK(detect_superposed(y, f, plan, DetectorKind::NC).streams[0].symbols == detect_nc(yt, qr.r, qpsk));
        CHECK(detect_superposed(y, f, plan, DetectorKind::PNC).streams[0].symbols == detect_pnc(yb, wr.r, qpsk));
        CHECK(detect_superposed(y, f, plan, DetectorKind::CD).streams[0].symbols ==
              detect_cd(yt, qr.r, qpsk).symbols);
        CHECK(detect_superposed(y, f, plan, DetectorKind::PCD).streams[0].symbols ==
              detect_pcd(yb, wr.r, qpsk).symbols);
        CHECK(detect_superposed(y, f, plan, DetectorKind::LORD).streams[0].symbols == detect_lord(y, h, qpsk));
        CHECK(detect_superposed(y, f, plan, DetectorKind::SSD).streams[0].symbols == detect_ssd(y, h, qpsk));
    }
}

TEST_CASE("two-stream superposition equals a hand-orchestrated two-pass run")
{
    auto rng = make_rng(13);
    const auto b1 = build_qam(2, 1.0);
    const auto b2 = build_qam(2, 1000.0);
    const StreamPlan plan(4, {StreamSpec{4, b1, {}}, StreamSpec{4, b2, {}}});
    const auto kinds = all_kinds();
    for (int t = 0; t < 200; ++t)
    {
        const ComplexMatrix h = gaussian(4, 4, rng);
        const auto x1 = random_symbols(4, b1, rng);
        const auto x2 = random_symbols(4, b2, rng);
        const ComplexVector y = h * (to_complex(x1, b1) + to_complex(x2, b2)) + noise(4, 1e-3, rng);
        const auto f = ChannelFactors::prepare(h, plan, kinds);
        const auto qr = qr_decompose(h);
        const auto wr = puncture(qr);

        const auto s2 = detect_nc(adjoint_apply(qr.q, y), qr.r, b2);
        const ComplexVector y1 = sic_cancel(y, h, to_complex(s2, b2));
        const auto s1 = detect_nc(adjoint_apply(qr.q, y1), qr.r, b1);
        const auto got = detect_superposed(y, f, plan, DetectorKind::NC);
        CHECK(got.streams[1].bits == demap(s2, b2));
        CHECK(got.streams[0].bits == demap(s1, b1));

        const auto p2 = detect_ssd(y, h, b2);
        const auto p1 = detect_ssd(sic_cancel(y, h, to_complex(p2, b2)), h, b1);
        const auto gs = detect_superposed(y, f, plan, DetectorKind::SSD);
        CHECK(gs.streams[1].symbols == p2);
        CHECK(gs.streams[0].symbols == p1);

        // High SNR and a 30 dB power gap: everything is recovered.
        for (auto k : kinds)
        {
            const auto r = detect_superposed(y, f, plan, k);
            CHECK(r.streams[1].symbols == x2);
            CHECK(r.streams[0].symbols == x1);
        }
    }
}

TEST_CASE("trailing streams use the trailing block")
{
    auto rng = make_rng(14);
    const auto c1 = build_qam(4, 1.0);
    const auto c2 = build_qam(4, 100.0);
    const StreamPlan plan(4, {StreamSpec{4, c1, {}}, StreamSpec{2, c2, {}}});
    const ComplexMatrix h = gaussian(4, 4, rng);
    const ComplexVector y = noise(4, 5.0, rng);
    const DetectorKind kinds[] = {DetectorKind::NC, DetectorKind::PNC};
    const auto f = ChannelFactors::prepare(h, plan, kinds);
    const auto qr = qr_decompose(h);
    const ComplexVector yt = adjoint_apply(qr.q, y);
    const auto got = detect_superposed(y, f, plan, DetectorKind::NC);
    CHECK(got.streams[1].symbols == detect_nc(yt.tail(2), trailing_submatrix(qr.r, 2), c2));
}

TEST_CASE("diagonal noiseless channels recover every stream for every kind")
{
    auto rng = make_rng(15);
    const auto c1 = build_qam(4, 1.0);
    const auto c2 = build_qam(16, 50.0);
    const auto c3 = build_qam(2, 5000.0);
    const StreamPlan plan(5, {StreamSpec{5, c1, {}}, StreamSpec{3, c2, {}}, StreamSpec{1, c3, {}}});
    const auto kinds = all_kinds();
    for (int t = 0; t < 50; ++t)
    {
        ComplexMatrix h = ComplexMatrix::Zero(5, 5);
        for (int i = 0; i < 5; ++i)
            h(i, i) = std::polar(0.5 + rng.uniform(), 6.0 * rng.uniform());
        const auto x1 = random_symbols(5, c1, rng);
        const auto x2 = random_symbols(3, c2, rng);
        const auto x3 = random_symbols(1, c3, rng);
        ComplexVector s = to_complex(x1, c1);
        s.tail(3) += to_complex(x2, c2);
        s.tail(1) += to_complex(x3, c3);
        const ComplexVector y = h * s;
        const auto f = ChannelFactors::prepare(h, plan, kinds);
        for (auto k : kinds)
        {
            const auto r = detect_superposed(y, f, plan, k);
            CHECK(r.streams[0].symbols == x1);
            CHECK(r.streams[1].symbols == x2);
            CHECK(r.streams[2].symbols == x3);
        }
    }
}

TEST_CASE("non-contiguous plans need punctured detectors")
{
    auto rng = make_rng(16);
    const auto c1 = build_qam(4, 1.0);
    const auto c2 = build_qam(4, 100.0);
    const StreamPlan plan(4, {StreamSpec{4, c1, {}}, StreamSpec{2, c2, {1, 3}}});
    const ComplexMatrix h = gaussian(4, 4, rng);
    for (auto k : {DetectorKind::ML, DetectorKind::NC, DetectorKind::CD, DetectorKind::LORD})
    {
        const DetectorKind one[] = {k};
        CHECK(code_of([&] { ChannelFactors::prepare(h, plan, one); }) == ErrorCode::InvalidArgument);
    }
    const DetectorKind wrd[] = {DetectorKind::PNC, DetectorKind::PCD, DetectorKind::SSD};
    const auto f = ChannelFactors::prepare(h, plan, wrd);
    const auto x1 = random_symbols(4, c1, rng);
    const auto x2 = random_symbols(2, c2, rng);
    ComplexVector s = to_complex(x1, c1);
    s(1) += c2.point(x2[0]);
    s(3) += c2.point(x2[1]);
    const ComplexVector y = h * s;
    for (auto k : wrd)
    {
        const auto r = detect_superposed(y, f, plan, k);
        CHECK(r.streams[1].symbols == x2);
        CHECK(r.streams[0].symbols == x1);
    }
}

TEST_CASE("factors are prepared only for requested kinds")
{
    auto rng = make_rng(17);
    const auto c = build_qam(4, 1.0);
    const StreamPlan plan(3, {StreamSpec{3, c, {}}});
    const DetectorKind nc[] = {DetectorKind::NC};
    const auto f = ChannelFactors::prepare(gaussian(3, 3, rng), plan, nc);
    CHECK_NOTHROW(f.qr());
    CHECK(code_of([&] { f.wr(); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { f.lord(plan.columns(0)); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { ChannelFactors::prepare(gaussian(4, 4, rng), plan, nc); }) ==
          ErrorCode::DimensionMismatch);
}

TEST_CASE("instrumented counts")
{
    // The product-phase difference between NC and PNC is the punctured saving.
    for (int n : {4, 8, 16})
    {
        const auto nc = count_flops(DetectorKind::NC, n, 4, 1);
        const auto pnc = count_flops(DetectorKind::PNC, n, 4, 1);
        const auto saved = nc.products.cmul - pnc.products.cmul;
        CHECK(saved == static_cast<std::uint64_t>((n - 1) * (n - 2) / 2));
        const auto e1 = flops_epsilon(1, n);
        CHECK(Rational(static_cast<long long>(4 * saved)) == e1.rml);
        CHECK(Rational(static_cast<long long>(2 * saved)) == e1.rad);
    }

    // PNC on N = 8: one adjoint transform, a root slice and N - 1 one-term
    // cancellations.
    const auto pnc8 = count_flops(DetectorKind::PNC, 8, 4, 1);
    CHECK(pnc8.products.cmul == 8 * 8 + 7);
    CHECK(pnc8.decomposition.flops() > 0);
    CHECK(pnc8.puncturing.flops() > 0);
    CHECK(count_flops(DetectorKind::NC, 8, 4, 1).puncturing.flops() == 0);
    CHECK(count_flops(DetectorKind::ML, 4, 4, 1).products.flops() == 0);

    // Chase lists multiply the per-candidate work by |X|.
    const auto cd4 = count_flops(DetectorKind::CD, 6, 4, 1);
    const auto cd16 = count_flops(DetectorKind::CD, 6, 16, 1);
    CHECK(cd16.products.cmul > 3 * cd4.products.cmul);
    const auto ssd = count_flops(DetectorKind::SSD, 6, 4, 1);
    const auto pcd = count_flops(DetectorKind::PCD, 6, 4, 1);
    CHECK(ssd.total().flops() > 5 * pcd.total().flops());
    CHECK(count_flops(DetectorKind::PNC, 8, 4, 3).products.cmul > pnc8.products.cmul);
}
