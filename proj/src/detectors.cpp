// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/detectors.hpp"

#include "thz/errors.hpp"
#include "thz/rng.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <string>

namespace thz
{

namespace
{

ComplexMatrix select_columns(const ComplexMatrix &h, const std::vector<int> &cols)
{
    ComplexMatrix out(h.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = h.col(cols[j]);
    return out;
}

ComplexMatrix select_block(const ComplexMatrix &r, const std::vector<int> &idx)
{
    const auto n = static_cast<Eigen::Index>(idx.size());
    ComplexMatrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) = r(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    return out;
}

ComplexVector select_rows(const ComplexVector &v, const std::vector<int> &idx)
{
    ComplexVector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = v(idx[i]);
    return out;
}

std::vector<QrFactors> shifted_qr_counted(const ComplexMatrix &h, const DecompositionOptions &opts,
                                          FlopCounter *dec)
{
    const int s = static_cast<int>(h.cols());
    std::vector<QrFactors> out;
    out.reserve(static_cast<std::size_t>(s));
    DecompositionOptions o = opts;
    o.counter = dec;
    for (int t = 1; t <= s; ++t)
        out.push_back(qr_decompose(cyclic_shift_columns(h, t), o));
    return out;
}

std::vector<WrFactors> shifted_wr_counted(const ComplexMatrix &h, const DecompositionOptions &opts, FlopCounter *dec,
                                          FlopCounter *punct)
{
    const int s = static_cast<int>(h.cols());
    std::vector<WrFactors> out;
    out.reserve(static_cast<std::size_t>(s));
    DecompositionOptions od = opts;
    od.counter = dec;
    DecompositionOptions op = opts;
    op.counter = punct;
    for (int t = 1; t <= s; ++t)
        out.push_back(puncture(qr_decompose(cyclic_shift_columns(h, t), od), op));
    return out;
}

} // namespace

std::string_view to_string(DetectorKind kind) noexcept
{
    switch (kind)
    {
    case DetectorKind::ML: return "ML";
    case DetectorKind::NC: return "NC";
    case DetectorKind::PNC: return "PNC";
    case DetectorKind::CD: return "CD";
    case DetectorKind::PCD: return "PCD";
    case DetectorKind::LORD: return "LORD";
    case DetectorKind::SSD: return "SSD";
    }
    return "?";
}

DetectorKind parse_detector(std::string_view name)
{
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) { return std::toupper(ch); });
    for (DetectorKind k : kAllDetectors)
        if (to_string(k) == upper)
            return k;
    raise(ErrorCode::InvalidArgument, "unknown detector '" + std::string(name) + "'");
}

bool uses_wrd(DetectorKind kind) noexcept
{
    return kind == DetectorKind::PNC || kind == DetectorKind::PCD || kind == DetectorKind::SSD;
}

bool uses_shifts(DetectorKind kind) noexcept
{
    return kind == DetectorKind::LORD || kind == DetectorKind::SSD;
}

// ---------------------------------------------------------------- StreamPlan

StreamPlan::StreamPlan(int sa_count, std::vector<StreamSpec> streams) : n_(sa_count), streams_(std::move(streams))
{
    if (n_ < 1)
        raise(ErrorCode::InvalidArgument, "stream plan needs N >= 1");
    if (streams_.empty())
        raise(ErrorCode::InvalidArgument, "stream plan needs at least one stream");
    for (std::size_t i = 0; i < streams_.size(); ++i)
    {
        auto &s = streams_[i];
        const std::string tag = "stream " + std::to_string(i + 1);
        if (s.columns.empty())
        {
            if (s.size < 1 || s.size > n_)
                raise(ErrorCode::InvalidArgument, tag + " size outside [1, N]");
            std::vector<int> cols(static_cast<std::size_t>(s.size));
            for (int j = 0; j < s.size; ++j)
                cols[static_cast<std::size_t>(j)] = n_ - s.size + j;
            columns_.push_back(std::move(cols));
        }
        else
        {
            if (s.size != 0 && s.size != static_cast<int>(s.columns.size()))
                raise(ErrorCode::InvalidArgument, tag + " size disagrees with its column list");
            s.size = static_cast<int>(s.columns.size());
            for (std::size_t j = 0; j < s.columns.size(); ++j)
            {
                if (s.columns[j] < 0 || s.columns[j] >= n_)
                    raise(ErrorCode::InvalidArgument, tag + " column outside [0, N)");
                if (j > 0 && s.columns[j] <= s.columns[j - 1])
                    raise(ErrorCode::InvalidArgument, tag + " columns must be strictly increasing");
            }
            if (s.columns.back() != n_ - 1)
                raise(ErrorCode::InvalidArgument, tag + " must include the last SA");
            columns_.push_back(s.columns);
        }
        if (i == 0 && s.size != n_)
            raise(ErrorCode::InvalidArgument, "stream 1 must span all N SAs");
        if (i > 0)
        {
            const auto &prev = streams_[i - 1];
            if (s.size > prev.size)
                raise(ErrorCode::InvalidArgument, tag + " is larger than the stream before it");
            if (!(s.constellation.power() > prev.constellation.power()))
                raise(ErrorCode::InvalidArgument, tag + " power must exceed the previous stream's");
        }
    }
}

bool StreamPlan::contiguous(std::size_t i) const
{
    const auto &cols = columns(i);
    for (std::size_t j = 0; j < cols.size(); ++j)
        if (cols[j] != n_ - static_cast<int>(cols.size()) + static_cast<int>(j))
            return false;
    return true;
}

bool StreamPlan::contiguous() const
{
    for (std::size_t i = 0; i < size(); ++i)
        if (!contiguous(i))
            return false;
    return true;
}

double StreamPlan::total_power() const noexcept
{
    double p = 0.0;
    for (const auto &s : streams_)
        p += s.constellation.power();
    return p;
}

// ----------------------------------------------------------------- distances

double full_distance(const ComplexVector &y, const ComplexMatrix &h, std::span<const int> x, const Constellation &c)
{
    if (h.cols() != static_cast<Eigen::Index>(x.size()) || h.rows() != y.size())
        raise(ErrorCode::DimensionMismatch, "full_distance: shape mismatch");
    return (y - h * to_complex(x, c)).squaredNorm();
}

double triangular_distance(const ComplexVector &yt, const ComplexMatrix &r, std::span<const int> x,
                           const Constellation &c, FlopCounter *counter)
{
    const ComplexVector v = upper_product(r, to_complex(x, c), counter);
    const auto n = static_cast<std::uint64_t>(v.size());
    tally(counter, 0, n, 2 * n, 2 * n - 1);
    return (yt - v).squaredNorm();
}

double punctured_distance(const ComplexVector &yb, const ComplexMatrix &rp, std::span<const int> x,
                          const Constellation &c, FlopCounter *counter)
{
    const ComplexVector v = punctured_product(rp, to_complex(x, c), counter);
    const auto n = static_cast<std::uint64_t>(v.size());
    tally(counter, 0, n, 2 * n, 2 * n - 1);
    return (yb - v).squaredNorm();
}

// ------------------------------------------------------------------------ ML

Candidate ml_search(const ComplexVector &y, const ComplexMatrix &h, const Constellation &c, std::uint64_t cap)
{
    const auto s = static_cast<int>(h.cols());
    if (h.rows() != y.size())
        raise(ErrorCode::DimensionMismatch, "ml_search: y and H disagree");
    const auto order = static_cast<std::uint64_t>(c.order());
    std::uint64_t total = 1;
    for (int v = 0; v < s; ++v)
    {
        if (total > cap / order)
            raise(ErrorCode::SearchSpaceTooLarge,
                  std::to_string(c.order()) + "^" + std::to_string(s) + " candidates exceed the cap");
        total *= order;
    }
    if (total > cap)
        raise(ErrorCode::SearchSpaceTooLarge, "candidate count exceeds the cap");

    // Column-times-point table: cols[v * L + label] = H(:, v) * point(label).
    std::vector<ComplexVector> table(static_cast<std::size_t>(s) * order);
    for (int v = 0; v < s; ++v)
        for (std::uint64_t l = 0; l < order; ++l)
            table[static_cast<std::size_t>(v) * order + l] = h.col(v) * c.point(static_cast<int>(l));

    SymbolVector digits(static_cast<std::size_t>(s), 0);
    Candidate best{digits, std::numeric_limits<double>::infinity()};
    ComplexVector resid(y.size());
    for (std::uint64_t k = 0; k < total; ++k)
    {
        resid = y;
        for (int v = 0; v < s; ++v)
            resid -= table[static_cast<std::size_t>(v) * order + static_cast<std::size_t>(digits[static_cast<std::size_t>(v)])];
        const double d = resid.squaredNorm();
        if (d < best.distance)
        {
            best.distance = d;
            best.symbols = digits;
        }
        // Odometer, last digit fastest: lexicographic order.
        for (int v = s - 1; v >= 0; --v)
        {
            auto &dv = digits[static_cast<std::size_t>(v)];
            if (++dv < static_cast<int>(order))
                break;
            dv = 0;
        }
    }
    return best;
}

SymbolVector detect_ml(const ComplexVector &y, const ComplexMatrix &h, const Constellation &c, std::uint64_t cap)
{
    return ml_search(y, h, c, cap).symbols;
}

// ---------------------------------------------------------------- NC / PNC

SymbolVector back_substitute(const ComplexVector &yt, const ComplexMatrix &r, const Constellation &c, int root,
                             FlopCounter *counter)
{
    const auto s = r.cols();
    SymbolVector x(static_cast<std::size_t>(s));
    ComplexVector xv(s);
    x[static_cast<std::size_t>(s - 1)] = root;
    xv(s - 1) = c.point(root);
    for (Eigen::Index n = s - 2; n >= 0; --n)
    {
        cd z = yt(n);
        for (Eigen::Index v = n + 1; v < s; ++v)
            z -= r(n, v) * xv(v);
        const int label = c.slice(z / r(n, n).real());
        x[static_cast<std::size_t>(n)] = label;
        xv(n) = c.point(label);
        tally(counter, static_cast<std::uint64_t>(s - 1 - n), static_cast<std::uint64_t>(s - 1 - n), 0, 0, 2);
    }
    return x;
}

SymbolVector punctured_slice(const ComplexVector &yb, const ComplexMatrix &rp, const Constellation &c, int root,
                             FlopCounter *counter)
{
    const auto s = rp.cols();
    const Eigen::Index last = s - 1;
    SymbolVector x(static_cast<std::size_t>(s));
    x[static_cast<std::size_t>(last)] = root;
    const cd xr = c.point(root);
    for (Eigen::Index n = 0; n < last; ++n)
        x[static_cast<std::size_t>(n)] = c.slice((yb(n) - rp(n, last) * xr) / rp(n, n).real());
    tally(counter, static_cast<std::uint64_t>(last), static_cast<std::uint64_t>(last), 0, 0,
          2 * static_cast<std::uint64_t>(last));
    return x;
}

namespace
{
int slice_root(const ComplexVector &y, const ComplexMatrix &r, const Constellation &c, FlopCounter *counter)
{
    const auto last = r.cols() - 1;
    tally(counter, 0, 0, 0, 0, 2);
    return c.slice(y(last) / r(last, last).real());
}

void check_square(const ComplexVector &y, const ComplexMatrix &r, const char *who)
{
    if (r.rows() != r.cols() || y.size() != r.rows() || r.cols() < 1)
        raise(ErrorCode::DimensionMismatch, std::string(who) + ": expected square factor matching y");
}
} // namespace

SymbolVector detect_nc(const ComplexVector &yt, const ComplexMatrix &r, const Constellation &c, FlopCounter *counter)
{
    check_square(yt, r, "detect_nc");
    return back_substitute(yt, r, c, slice_root(yt, r, c, counter), counter);
}

SymbolVector detect_pnc(const ComplexVector &yb, const ComplexMatrix &rp, const Constellation &c,
                        FlopCounter *counter)
{
    check_square(yb, rp, "detect_pnc");
    return punctured_slice(yb, rp, c, slice_root(yb, rp, c, counter), counter);
}

Candidate detect_cd(const ComplexVector &yt, const ComplexMatrix &r, const Constellation &c, FlopCounter *counter)
{
    check_square(yt, r, "detect_cd");
    Candidate best{{}, std::numeric_limits<double>::infinity()};
    for (int root = 0; root < c.order(); ++root)
    {
        SymbolVector x = back_substitute(yt, r, c, root, counter);
        const double d = triangular_distance(yt, r, x, c, counter);
        if (d < best.distance)
            best = {std::move(x), d};
    }
    return best;
}

Candidate detect_pcd(const ComplexVector &yb, const ComplexMatrix &rp, const Constellation &c, FlopCounter *counter)
{
    check_square(yb, rp, "detect_pcd");
    Candidate best{{}, std::numeric_limits<double>::infinity()};
    for (int root = 0; root < c.order(); ++root)
    {
        SymbolVector x = punctured_slice(yb, rp, c, root, counter);
        const double d = punctured_distance(yb, rp, x, c, counter);
        if (d < best.distance)
            best = {std::move(x), d};
    }
    return best;
}

// -------------------------------------------------------------- LORD / SSD

std::vector<int> shift_order(int size, int step)
{
    if (size < 1 || step < 1 || step > size)
        raise(ErrorCode::OutOfRange, "shift step outside [1, S]");
    std::vector<int> order(static_cast<std::size_t>(size));
    for (int j = 0; j < size; ++j)
        order[static_cast<std::size_t>(j)] = (step + j) % size;
    return order;
}

ComplexMatrix cyclic_shift_columns(const ComplexMatrix &h, int step)
{
    return select_columns(h, shift_order(static_cast<int>(h.cols()), step));
}

std::vector<QrFactors> shifted_qr(const ComplexMatrix &h, const DecompositionOptions &opts)
{
    return shifted_qr_counted(h, opts, opts.counter);
}

std::vector<WrFactors> shifted_wr(const ComplexMatrix &h, const DecompositionOptions &opts)
{
    return shifted_wr_counted(h, opts, opts.counter, opts.counter);
}

SymbolVector detect_lord(const ComplexVector &y, std::span<const QrFactors> shifted, const Constellation &c,
                         FlopCounter *counter)
{
    SymbolVector out(shifted.size());
    for (std::size_t t = 0; t < shifted.size(); ++t)
    {
        const ComplexVector yt = adjoint_apply(shifted[t].q, y, counter);
        out[t] = detect_cd(yt, shifted[t].r, c, counter).symbols.back();
    }
    return out;
}

SymbolVector detect_lord(const ComplexVector &y, const ComplexMatrix &h, const Constellation &c,
                         const DecompositionOptions &opts)
{
    const auto f = shifted_qr(h, opts);
    return detect_lord(y, f, c);
}

SymbolVector detect_ssd(const ComplexVector &y, std::span<const WrFactors> shifted, const Constellation &c,
                        FlopCounter *counter)
{
    SymbolVector out(shifted.size());
    for (std::size_t t = 0; t < shifted.size(); ++t)
    {
        const ComplexVector yb = adjoint_apply(shifted[t].w, y, counter);
        out[t] = detect_pcd(yb, shifted[t].r, c, counter).symbols.back();
    }
    return out;
}

SymbolVector detect_ssd(const ComplexVector &y, const ComplexMatrix &h, const Constellation &c,
                        const DecompositionOptions &opts)
{
    const auto f = shifted_wr(h, opts);
    return detect_ssd(y, f, c);
}

ComplexVector sic_cancel(const ComplexVector &y, const ComplexMatrix &h, const ComplexVector &x)
{
    if (h.rows() != y.size() || h.cols() != x.size())
        raise(ErrorCode::DimensionMismatch, "sic_cancel: H is " + std::to_string(h.rows()) + "x" +
                                                std::to_string(h.cols()) + ", y has " + std::to_string(y.size()) +
                                                ", x has " + std::to_string(x.size()));
    return y - h * x;
}

// ----------------------------------------------------------- ChannelFactors

ChannelFactors ChannelFactors::prepare(const ComplexMatrix &h, const StreamPlan &plan,
                                       std::span<const DetectorKind> kinds, const DecompositionOptions &opts)
{
    if (h.cols() != plan.sa_count())
        raise(ErrorCode::DimensionMismatch, "channel has " + std::to_string(h.cols()) + " columns, plan expects " +
                                                std::to_string(plan.sa_count()));
    ChannelFactors f;
    f.h_ = h;
    bool need_qr = false;
    bool need_wr = false;
    for (DetectorKind k : kinds)
    {
        if (!plan.contiguous() && !uses_wrd(k))
            raise(ErrorCode::InvalidArgument,
                  std::string("non-contiguous stream plans need a punctured detector, not ") +
                      std::string(to_string(k)));
        need_qr |= k == DetectorKind::NC || k == DetectorKind::CD;
        need_wr |= k == DetectorKind::PNC || k == DetectorKind::PCD;
    }
    if (need_qr || need_wr)
    {
        f.qr_ = qr_decompose(h, opts);
        if (need_wr)
            f.wr_ = puncture(*f.qr_, opts);
    }
    for (DetectorKind k : kinds)
    {
        if (!uses_shifts(k))
            continue;
        for (std::size_t i = 0; i < plan.size(); ++i)
        {
            const auto &cols = plan.columns(i);
            if (k == DetectorKind::LORD && !f.lord_.count(cols))
                f.lord_.emplace(cols, shifted_qr(select_columns(h, cols), opts));
            if (k == DetectorKind::SSD && !f.ssd_.count(cols))
                f.ssd_.emplace(cols, shifted_wr(select_columns(h, cols), opts));
        }
    }
    return f;
}

const QrFactors &ChannelFactors::qr() const
{
    if (!qr_)
        raise(ErrorCode::InvalidArgument, "QR factors were not prepared");
    return *qr_;
}

const WrFactors &ChannelFactors::wr() const
{
    if (!wr_)
        raise(ErrorCode::InvalidArgument, "WR factors were not prepared");
    return *wr_;
}

std::span<const QrFactors> ChannelFactors::lord(const std::vector<int> &columns) const
{
    const auto it = lord_.find(columns);
    if (it == lord_.end())
        raise(ErrorCode::InvalidArgument, "shifted QR factors were not prepared for this stream");
    return it->second;
}

std::span<const WrFactors> ChannelFactors::ssd(const std::vector<int> &columns) const
{
    const auto it = ssd_.find(columns);
    if (it == ssd_.end())
        raise(ErrorCode::InvalidArgument, "shifted WR factors were not prepared for this stream");
    return it->second;
}

// ---------------------------------------------------------- superposition

DetectionResult detect_superposed(const ComplexVector &y, const ChannelFactors &factors, const StreamPlan &plan,
                                  DetectorKind kind, FlopCounter *counter, std::uint64_t ml_cap)
{
    const ComplexMatrix &h = factors.h();
    if (y.size() != h.rows())
        raise(ErrorCode::DimensionMismatch, "received vector length differs from channel rows");
    if (!plan.contiguous() && !uses_wrd(kind))
        raise(ErrorCode::InvalidArgument, "non-contiguous stream plans need a punctured detector");

    DetectionResult result;
    result.streams.resize(plan.size());
    ComplexVector resid = y;
    for (std::size_t ii = plan.size(); ii-- > 0;)
    {
        const auto &spec = plan.stream(ii);
        const auto &cols = plan.columns(ii);
        const Constellation &c = spec.constellation;
        const auto s = static_cast<Eigen::Index>(cols.size());
        StreamEstimate est;

        switch (kind)
        {
        case DetectorKind::ML: {
            const ComplexMatrix hi = select_columns(h, cols);
            auto cand = ml_search(resid, hi, c, ml_cap);
            est.symbols = std::move(cand.symbols);
            est.distance = cand.distance;
            break;
        }
        case DetectorKind::NC:
        case DetectorKind::CD: {
            const ComplexVector yt = adjoint_apply(factors.qr().q, resid, counter).tail(s);
            const ComplexMatrix ri = trailing_submatrix(factors.qr().r, s);
            if (kind == DetectorKind::NC)
            {
                est.symbols = detect_nc(yt, ri, c, counter);
                est.distance = triangular_distance(yt, ri, est.symbols, c);
            }
            else
            {
                auto cand = detect_cd(yt, ri, c, counter);
                est.symbols = std::move(cand.symbols);
                est.distance = cand.distance;
            }
            break;
        }
        case DetectorKind::PNC:
        case DetectorKind::PCD: {
            const ComplexVector yb = select_rows(adjoint_apply(factors.wr().w, resid, counter), cols);
            const ComplexMatrix ri = select_block(factors.wr().r, cols);
            if (kind == DetectorKind::PNC)
            {
                est.symbols = detect_pnc(yb, ri, c, counter);
                est.distance = punctured_distance(yb, ri, est.symbols, c);
            }
            else
            {
                auto cand = detect_pcd(yb, ri, c, counter);
                est.symbols = std::move(cand.symbols);
                est.distance = cand.distance;
            }
            break;
        }
        case DetectorKind::LORD:
        case DetectorKind::SSD: {
            est.symbols = kind == DetectorKind::LORD ? detect_lord(resid, factors.lord(cols), c, counter)
                                                     : detect_ssd(resid, factors.ssd(cols), c, counter);
            est.distance = full_distance(resid, select_columns(h, cols), est.symbols, c);
            break;
        }
        }

        est.bits = demap(est.symbols, c);
        if (ii > 0)
        {
            resid = sic_cancel(resid, select_columns(h, cols), to_complex(est.symbols, c));
            tally(counter, static_cast<std::uint64_t>(h.rows() * s), static_cast<std::uint64_t>(h.rows() * s));
        }
        result.streams[ii] = std::move(est);
    }
    return result;
}

// -------------------------------------------------------------- complexity

ComplexityReport count_flops(DetectorKind kind, int n, int order, int stream_count, std::uint64_t seed)
{
    if (n < 1 || stream_count < 1)
        raise(ErrorCode::InvalidArgument, "count_flops needs N >= 1 and at least one stream");
    CounterRng rng(seed, 0, make_substream(Substream::Channel));
    ComplexMatrix h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            h(i, j) = rng.complex_normal(1.0);

    std::vector<StreamSpec> specs;
    double p = 1.0;
    for (int i = 0; i < stream_count; ++i, p *= 100.0)
        specs.push_back({n, Constellation(order, p), {}});
    const StreamPlan plan(n, specs);

    ComplexityReport report;
    DecompositionOptions dec;
    dec.counter = &report.decomposition;
    DecompositionOptions pun;
    pun.counter = &report.puncturing;

    // Mirrors ChannelFactors::prepare with per-phase routing.
    switch (kind)
    {
    case DetectorKind::ML: break;
    case DetectorKind::NC:
    case DetectorKind::CD: (void)qr_decompose(h, dec); break;
    case DetectorKind::PNC:
    case DetectorKind::PCD: (void)puncture(qr_decompose(h, dec), pun); break;
    case DetectorKind::LORD: (void)shifted_qr_counted(h, {}, &report.decomposition); break;
    case DetectorKind::SSD: (void)shifted_wr_counted(h, {}, &report.decomposition, &report.puncturing); break;
    }

    const DetectorKind kinds[] = {kind};
    const ChannelFactors factors = ChannelFactors::prepare(h, plan, kinds);
    ComplexVector y = ComplexVector::Zero(n);
    for (std::size_t i = 0; i < plan.size(); ++i)
    {
        const Constellation &c = plan.stream(i).constellation;
        SymbolVector x(static_cast<std::size_t>(n));
        for (auto &l : x)
            l = static_cast<int>(rng() % static_cast<unsigned>(c.order()));
        y += h * to_complex(x, c);
    }
    for (int i = 0; i < n; ++i)
        y(i) += rng.complex_normal(1e-3);
    (void)detect_superposed(y, factors, plan, kind, &report.products);
    return report;
}

} // namespace thz
