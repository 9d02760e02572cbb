// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/harness.hpp"

#include "thz/analysis.hpp"
#include "thz/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <limits>
#include <sstream>
#include <thread>

namespace thz
{

// ------------------------------------------------------------------- SNR

SnrMode parse_snr_mode(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "transmit-normalized" || lower == "transmit_normalized")
        return SnrMode::TransmitNormalized;
    if (lower == "physical")
        return SnrMode::Physical;
    raise(ErrorCode::UnknownMode, "unknown SNR mode '" + std::string(name) + "'");
}

std::string_view to_string(SnrMode mode) noexcept
{
    return mode == SnrMode::Physical ? "physical" : "transmit-normalized";
}

double snr_to_sigma2(double snr_db, double total_power, SnrMode mode)
{
    if (mode != SnrMode::TransmitNormalized && mode != SnrMode::Physical)
        raise(ErrorCode::UnknownMode, "unknown SNR mode");
    if (!(total_power > 0.0))
        raise(ErrorCode::InvalidArgument, "total power must be positive");
    if (std::isnan(snr_db) || snr_db == std::numeric_limits<double>::infinity())
        raise(ErrorCode::InvalidArgument, "SNR must be finite or -inf");
    return total_power / std::pow(10.0, snr_db / 10.0);
}

double sigma2_to_snr(double sigma2, double total_power, SnrMode mode)
{
    if (mode != SnrMode::TransmitNormalized && mode != SnrMode::Physical)
        raise(ErrorCode::UnknownMode, "unknown SNR mode");
    if (!(sigma2 > 0.0) || !(total_power > 0.0))
        raise(ErrorCode::InvalidArgument, "noise variance and total power must be positive");
    return 10.0 * std::log10(total_power / sigma2);
}

double binomial_ci(std::uint64_t errors, std::uint64_t bits)
{
    if (bits == 0)
        raise(ErrorCode::InvalidArgument, "confidence interval needs at least one bit");
    if (errors > bits)
        raise(ErrorCode::InvalidArgument, "more errors than bits");
    const double n = static_cast<double>(bits);
    const double p = static_cast<double>(errors) / n;
    return 1.96 * std::sqrt(p * (1.0 - p) / n);
}

// --------------------------------------------------------------- configs

ArrayGeometry ChannelSpec::effective_geometry() const
{
    ArrayGeometry g = geometry;
    if (tuning)
    {
        if (g.tx_rows != g.tx_cols || g.rx_rows != g.rx_cols || g.tx_cols != g.rx_cols)
            raise(ErrorCode::InvalidArgument, "spatial tuning needs square, symmetric SA grids");
        g.subarray_spacing = optimal_sa_separation(g.distance_m, g.wavelength(), g.tx_cols, tuning_z);
    }
    return g;
}

int ChannelSpec::rx_count() const
{
    switch (kind)
    {
    case ChannelKind::Gaussian: return rows;
    case ChannelKind::Fixed: return static_cast<int>(fixed.rows());
    default: return geometry.rx_count();
    }
}

int ChannelSpec::tx_count() const
{
    switch (kind)
    {
    case ChannelKind::Gaussian: return cols;
    case ChannelKind::Fixed: return static_cast<int>(fixed.cols());
    default: return geometry.tx_count();
    }
}

void ChannelSpec::validate() const
{
    switch (kind)
    {
    case ChannelKind::Gaussian:
        if (rows < 1 || cols < 1)
            raise(ErrorCode::InvalidArgument, "gaussian channel needs positive dimensions");
        break;
    case ChannelKind::Fixed:
        if (fixed.size() == 0 || !all_finite(fixed))
            raise(ErrorCode::InvalidArgument, "fixed channel must be a non-empty finite matrix");
        break;
    case ChannelKind::Multipath: multipath.validate(); [[fallthrough]];
    case ChannelKind::LineOfSight:
        geometry.validate();
        params.validate();
        (void)effective_geometry();
        break;
    }
    if (rx_count() < tx_count())
        raise(ErrorCode::DimensionMismatch, "need at least as many receive as transmit SAs");
}

void SimConfig::validate() const
{
    if (plan.has_value() == noma.has_value())
        raise(ErrorCode::InvalidArgument, "exactly one of a stream plan or a NOMA scenario is required");
    if (detectors.empty())
        raise(ErrorCode::InvalidArgument, "no detectors requested");
    if (snr_db.empty())
        raise(ErrorCode::InvalidArgument, "empty SNR grid");
    for (std::size_t k = 0; k < snr_db.size(); ++k)
    {
        if (!std::isfinite(snr_db[k]) && !(k == 0 && snr_db[k] < 0.0))
            raise(ErrorCode::InvalidArgument, "SNR grid must be finite (only a leading -inf is allowed)");
        if (k > 0 && !(snr_db[k] > snr_db[k - 1]))
            raise(ErrorCode::InvalidArgument, "SNR grid must be strictly increasing");
    }
    if (max_trials < 1 || batch_trials < 1)
        raise(ErrorCode::InvalidArgument, "trial counts must be >= 1");
    if (theory_draws < 1)
        raise(ErrorCode::InvalidArgument, "theory draws must be >= 1");
    if (plan)
    {
        channel.validate();
        if (channel.tx_count() != plan->sa_count())
            raise(ErrorCode::DimensionMismatch, fmt::format("channel has {} transmit SAs, plan expects {}",
                                                            channel.tx_count(), plan->sa_count()));
    }
    else
    {
        noma->scenario.validate();
        noma->geometry.validate();
        noma->params.validate();
        if (noma->geometry.tx_count() != noma->scenario.sa_count)
            raise(ErrorCode::DimensionMismatch, "NOMA geometry must have N transmit SAs");
        if (noma->geometry.rx_count() < noma->geometry.tx_count())
            raise(ErrorCode::DimensionMismatch, "need at least as many receive as transmit SAs");
        (void)Constellation(noma->order_near, 1.0);
        (void)Constellation(noma->order_far, 1.0);
        if (noma->drop_budget < 0)
            raise(ErrorCode::InvalidArgument, "drop budget must be >= 0");
    }
}

// --------------------------------------------------------------- channels

namespace
{
double frobenius_scale(const ComplexMatrix &h)
{
    const double norm = h.norm();
    if (!(norm > 0.0))
        raise(ErrorCode::RankDeficient, "channel matrix is zero");
    return std::sqrt(static_cast<double>(h.rows() * h.cols())) / norm;
}
} // namespace

ChannelRealization draw_channel(const SimConfig &cfg, std::uint64_t trial)
{
    const ChannelSpec &spec = cfg.channel;
    const bool normalize = cfg.mode == SnrMode::TransmitNormalized;
    switch (spec.kind)
    {
    case ChannelKind::Gaussian: {
        CounterRng rng(cfg.seed, trial, make_substream(Substream::Channel));
        return gaussian_channel(spec.rows, spec.cols, rng);
    }
    case ChannelKind::Fixed: return {spec.fixed, ChannelKind::Fixed, "fixed matrix", std::nullopt};
    case ChannelKind::LineOfSight: {
        ChannelRealization ch = los_channel(spec.effective_geometry(), spec.params);
        if (normalize)
        {
            ch.h *= frobenius_scale(ch.h);
            ch.provenance += " normalized";
        }
        return ch;
    }
    case ChannelKind::Multipath: {
        const ArrayGeometry g = spec.effective_geometry();
        CounterRng rng(cfg.seed, trial, make_substream(Substream::Channel));
        ChannelRealization ch = multipath_channel(g, spec.params, spec.multipath, rng);
        if (normalize)
        {
            // The LoS part sets the scale so NLoS power stays relative to it.
            ch.h *= frobenius_scale(los_channel(g, spec.params).h);
            ch.provenance += " normalized";
        }
        return ch;
    }
    }
    raise(ErrorCode::InvalidArgument, "unknown channel kind");
}

namespace
{
PreparedChannel prepare_for(const SimConfig &cfg, ChannelRealization ch, std::span<const DetectorKind> kinds)
{
    if (!all_finite(ch.h))
        raise(ErrorCode::InvalidArgument, "channel has non-finite entries");
    ChannelFactors f = ChannelFactors::prepare(ch.h, *cfg.plan, kinds, cfg.decomposition);
    return {std::move(ch), std::move(f)};
}
} // namespace

PreparedChannel prepare_channel(const SimConfig &cfg, ChannelRealization ch)
{
    return prepare_for(cfg, std::move(ch), cfg.detectors);
}

// ----------------------------------------------------------------- trials

namespace
{
BitVector draw_bits(CounterRng &rng, int count)
{
    BitVector bits(static_cast<std::size_t>(count));
    for (auto &b : bits)
        b = static_cast<std::uint8_t>(rng.bit());
    return bits;
}

ComplexVector draw_noise(CounterRng &rng, Eigen::Index rows, double sigma2)
{
    ComplexVector n(rows);
    for (Eigen::Index m = 0; m < rows; ++m)
        n(m) = rng.complex_normal(sigma2);
    return n;
}

std::uint64_t count_errors(const BitVector &a, const BitVector &b)
{
    if (a.size() != b.size())
        raise(ErrorCode::LengthMismatch, "estimated and true bit vectors differ in length");
    std::uint64_t e = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
        e += a[k] != b[k];
    return e;
}

ComplexMatrix select_columns(const ComplexMatrix &h, const std::vector<int> &cols)
{
    ComplexMatrix out(h.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = h.col(cols[j]);
    return out;
}
} // namespace

TrialErrors simulate_trial(const SimConfig &cfg, const PreparedChannel &ch, double sigma2, std::uint64_t trial,
                           std::size_t snr_index, const std::vector<bool> &active)
{
    const StreamPlan &plan = *cfg.plan;
    const ComplexMatrix &h = ch.realization.h;

    CounterRng bit_rng(cfg.seed, trial, make_substream(Substream::Bits));
    std::vector<BitVector> bits(plan.size());
    ComplexVector y = ComplexVector::Zero(h.rows());
    for (std::size_t i = 0; i < plan.size(); ++i)
    {
        const Constellation &c = plan.stream(i).constellation;
        bits[i] = draw_bits(bit_rng, plan.bits(i));
        const ComplexVector x = to_complex(modulate(bits[i], c), c);
        y.noalias() += select_columns(h, plan.columns(i)) * x;
    }
    CounterRng noise_rng(cfg.seed, trial, make_substream(Substream::Noise, static_cast<std::uint32_t>(snr_index)));
    y += draw_noise(noise_rng, h.rows(), sigma2);

    TrialErrors out;
    out.errors.assign(cfg.detectors.size(), std::vector<std::uint64_t>(plan.size(), 0));
    for (std::size_t d = 0; d < cfg.detectors.size(); ++d)
    {
        if (!active.empty() && !active[d])
            continue;
        const auto res = detect_superposed(y, ch.factors, plan, cfg.detectors[d], nullptr, cfg.ml_cap);
        for (std::size_t i = 0; i < plan.size(); ++i)
            out.errors[d][i] = count_errors(res.streams[i].bits, bits[i]);
    }
    return out;
}

// ---------------------------------------------------------------- workers

unsigned resolve_workers(unsigned requested) noexcept
{
    if (requested > 0)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::uint64_t begin, std::uint64_t end, unsigned workers,
                  const std::function<void(unsigned, std::uint64_t)> &fn)
{
    if (end <= begin)
        return;
    const std::uint64_t count = end - begin;
    const unsigned w = static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), count));
    if (w == 1)
    {
        for (std::uint64_t i = begin; i < end; ++i)
            fn(0, i);
        return;
    }

    // Contiguous blocks; block k is [begin + k*count/w, begin + (k+1)*count/w).
    std::vector<std::exception_ptr> failures(w);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (unsigned k = 0; k < w; ++k)
    {
        const std::uint64_t lo = begin + count * k / w;
        const std::uint64_t hi = begin + count * (k + 1) / w;
        threads.emplace_back([&, k, lo, hi] {
            try
            {
                for (std::uint64_t i = lo; i < hi; ++i)
                    fn(k, i);
            }
            catch (...)
            {
                failures[k] = std::current_exception();
            }
        });
    }
    for (auto &t : threads)
        t.join();
    for (auto &f : failures)
        if (f)
            std::rethrow_exception(f);
}

// ------------------------------------------------------------------ sweeps

namespace
{
using Counts = std::vector<std::vector<std::uint64_t>>; // [detector][stream]

void add_into(Counts &acc, const Counts &v)
{
    for (std::size_t d = 0; d < acc.size(); ++d)
        for (std::size_t s = 0; s < acc[d].size(); ++s)
            acc[d][s] += v[d][s];
}

// Runs batches until every detector reached min_bit_errors or max_trials.
// `trial_fn(trial, active, local)` adds one trial's errors into `local`.
struct PointResult
{
    Counts errors;
    std::vector<std::uint64_t> trials;
};

PointResult run_point(const SimConfig &cfg, std::size_t streams,
                      const std::function<void(std::uint64_t, const std::vector<bool> &, Counts &)> &trial_fn)
{
    const std::size_t nd = cfg.detectors.size();
    PointResult out{Counts(nd, std::vector<std::uint64_t>(streams, 0)), std::vector<std::uint64_t>(nd, 0)};
    std::vector<bool> active(nd, true);
    const unsigned workers = resolve_workers(cfg.workers);

    std::uint64_t start = 0;
    while (start < cfg.max_trials && std::find(active.begin(), active.end(), true) != active.end())
    {
        const std::uint64_t end = std::min(cfg.max_trials, start + cfg.batch_trials);
        std::vector<Counts> local(workers, Counts(nd, std::vector<std::uint64_t>(streams, 0)));
        parallel_for(start, end, workers, [&](unsigned w, std::uint64_t t) { trial_fn(t, active, local[w]); });
        for (const auto &l : local)
            add_into(out.errors, l);
        for (std::size_t d = 0; d < nd; ++d)
        {
            if (!active[d])
                continue;
            out.trials[d] += end - start;
            std::uint64_t total = 0;
            for (auto e : out.errors[d])
                total += e;
            if (total >= cfg.min_bit_errors)
                active[d] = false;
        }
        start = end;
    }
    return out;
}

BerRecord make_record(DetectorKind kind, int stream, double snr_db, double sigma2, std::uint64_t trials,
                      std::uint64_t errors, std::uint64_t bits_per_trial)
{
    BerRecord r;
    r.detector = std::string(to_string(kind));
    r.stream = stream;
    r.snr_db = snr_db;
    r.sigma2_w = sigma2;
    r.trials = trials;
    r.bit_errors = errors;
    const std::uint64_t bits = trials * bits_per_trial;
    r.ber = bits > 0 ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0;
    r.ci95 = bits > 0 ? binomial_ci(errors, bits) : 0.0;
    return r;
}
} // namespace

std::vector<BerRecord> run_ber_sweep(const SimConfig &cfg)
{
    cfg.validate();
    if (cfg.noma)
        return run_noma_sweep(cfg);
    for (double s : cfg.snr_db)
        if (!std::isfinite(s))
            raise(ErrorCode::InvalidArgument, "simulation needs a finite SNR grid");

    const StreamPlan &plan = *cfg.plan;
    const bool redraw = cfg.channel.redrawn_per_trial();
    std::optional<PreparedChannel> fixed;
    if (!redraw)
        fixed = prepare_channel(cfg, draw_channel(cfg, 0));

    std::vector<BerRecord> records;
    for (std::size_t k = 0; k < cfg.snr_db.size(); ++k)
    {
        const double sigma2 = snr_to_sigma2(cfg.snr_db[k], plan.total_power(), cfg.mode);
        auto trial_fn = [&](std::uint64_t t, const std::vector<bool> &active, Counts &local) {
            TrialErrors te;
            if (fixed)
            {
                te = simulate_trial(cfg, *fixed, sigma2, t, k, active);
            }
            else
            {
                std::vector<DetectorKind> kinds;
                for (std::size_t d = 0; d < cfg.detectors.size(); ++d)
                    if (active[d])
                        kinds.push_back(cfg.detectors[d]);
                te = simulate_trial(cfg, prepare_for(cfg, draw_channel(cfg, t), kinds), sigma2, t, k, active);
            }
            add_into(local, te.errors);
        };
        const PointResult pr = run_point(cfg, plan.size(), trial_fn);
        for (std::size_t d = 0; d < cfg.detectors.size(); ++d)
            for (std::size_t i = 0; i < plan.size(); ++i)
                records.push_back(make_record(cfg.detectors[d], static_cast<int>(i + 1), cfg.snr_db[k], sigma2,
                                              pr.trials[d], pr.errors[d][i], static_cast<std::uint64_t>(plan.bits(i))));
    }
    return records;
}

// ------------------------------------------------------------------- NOMA

NomaSetup noma_setup(const SimConfig &cfg)
{
    const NomaSimSpec &spec = *cfg.noma;
    for (std::uint64_t attempt = 0;; ++attempt)
    {
        try
        {
            CounterRng rng(cfg.seed, attempt, make_substream(Substream::Drop));
            NomaSetup out;
            out.drop = drop_users(spec.scenario, rng);
            std::vector<double> inner;
            std::vector<double> outer;
            for (const auto &u : out.drop.inner)
                inner.push_back(u.distance_m);
            for (const auto &u : out.drop.outer)
                outer.push_back(u.distance_m);
            out.plan = jdcp(inner, outer, spec.scenario);
            out.redraws = attempt;
            return out;
        }
        catch (const Error &e)
        {
            const bool retry = e.code() == ErrorCode::EmptyDrop || e.code() == ErrorCode::BudgetExhausted;
            if (!retry || attempt >= static_cast<std::uint64_t>(spec.drop_budget))
                throw;
        }
    }
}

std::vector<BerRecord> run_noma_sweep(const SimConfig &cfg)
{
    cfg.validate();
    if (!cfg.noma)
        raise(ErrorCode::InvalidArgument, "configuration has no NOMA scenario");
    for (double s : cfg.snr_db)
        if (!std::isfinite(s))
            raise(ErrorCode::InvalidArgument, "simulation needs a finite SNR grid");
    const NomaSimSpec &spec = *cfg.noma;
    const NomaSetup setup = noma_setup(cfg);
    const auto links = build_noma_links(setup.plan, spec.scenario, spec.geometry, spec.params, spec.tune_near,
                                        spec.tune_far);

    std::vector<NomaReceivers> rx;
    std::vector<Constellation> c1;
    std::vector<Constellation> c2;
    for (std::size_t k = 0; k < links.size(); ++k)
    {
        const auto &p = setup.plan.pairs[k];
        c1.emplace_back(spec.order_near, p.p1_w);
        c2.emplace_back(spec.order_far, p.p2_w);
        rx.push_back(NomaReceivers::prepare(links[k].near.h, links[k].far.h, c1.back(), c2.back(), cfg.detectors,
                                            cfg.decomposition));
    }

    const std::size_t pairs = links.size();
    const int n = spec.scenario.sa_count;
    const int bits1 = n * c1.front().bits_per_symbol();
    const int bits2 = n * c2.front().bits_per_symbol();

    std::vector<BerRecord> records;
    for (std::size_t k = 0; k < cfg.snr_db.size(); ++k)
    {
        std::vector<double> sigma2(pairs);
        double mean_sigma2 = 0.0;
        for (std::size_t j = 0; j < pairs; ++j)
        {
            const auto &p = setup.plan.pairs[j];
            sigma2[j] = snr_to_sigma2(cfg.snr_db[k], p.p1_w + p.p2_w, cfg.mode);
            mean_sigma2 += sigma2[j] / static_cast<double>(pairs);
        }

        auto trial_fn = [&](std::uint64_t t, const std::vector<bool> &active, Counts &local) {
            const std::size_t j = static_cast<std::size_t>(t % pairs);
            CounterRng bit_rng(cfg.seed, t, make_substream(Substream::Bits));
            const BitVector b1 = draw_bits(bit_rng, bits1);
            const BitVector b2 = draw_bits(bit_rng, bits2);
            const ComplexVector x = to_complex(modulate(b1, c1[j]), c1[j]) + to_complex(modulate(b2, c2[j]), c2[j]);
            CounterRng noise_rng(cfg.seed, t, make_substream(Substream::Noise, static_cast<std::uint32_t>(k)));
            const ComplexMatrix &h1 = links[j].near.h;
            const ComplexMatrix &h2 = links[j].far.h;
            const ComplexVector y1 = h1 * x + draw_noise(noise_rng, h1.rows(), sigma2[j]);
            const ComplexVector y2 = h2 * x + draw_noise(noise_rng, h2.rows(), sigma2[j]);
            for (std::size_t d = 0; d < cfg.detectors.size(); ++d)
            {
                if (!active[d])
                    continue;
                const PairDecision dec = noma_detect_pair(y1, y2, rx[j], cfg.detectors[d]);
                local[d][0] += count_errors(dec.user1, b1);
                local[d][1] += count_errors(dec.user2, b2);
            }
        };
        const PointResult pr = run_point(cfg, 2, trial_fn);
        for (std::size_t d = 0; d < cfg.detectors.size(); ++d)
        {
            records.push_back(make_record(cfg.detectors[d], 1, cfg.snr_db[k], mean_sigma2, pr.trials[d],
                                          pr.errors[d][0], static_cast<std::uint64_t>(bits1)));
            records.push_back(make_record(cfg.detectors[d], 2, cfg.snr_db[k], mean_sigma2, pr.trials[d],
                                          pr.errors[d][1], static_cast<std::uint64_t>(bits2)));
        }
    }
    return records;
}

// ----------------------------------------------------------------- theory

namespace
{
bool has_theory(DetectorKind k) noexcept
{
    return k == DetectorKind::NC || k == DetectorKind::PNC || k == DetectorKind::CD || k == DetectorKind::PCD;
}

double mean_of(const std::vector<double> &v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

BerSpec stream_spec(const StreamPlan &plan, std::size_t i, DetectorKind kind, double sigma2, double next_ber)
{
    BerSpec spec;
    spec.kind = kind;
    spec.layers = plan.stream(i).size;
    spec.order = plan.stream(i).constellation.order();
    spec.power = plan.stream(i).constellation.power();
    for (std::size_t j = 0; j < i; ++j)
        spec.power_prev += plan.stream(j).constellation.power();
    if (i + 1 < plan.size())
    {
        spec.power_next = plan.stream(i + 1).constellation.power();
        spec.order_next = plan.stream(i + 1).constellation.order();
        spec.next_stream_ber = next_ber;
    }
    spec.sigma2 = sigma2;
    return spec;
}

// Diagonal values seen by stream i under the detector's decomposition.
std::vector<double> stream_diag(const ChannelFactors &f, const StreamPlan &plan, std::size_t i, DetectorKind kind)
{
    std::vector<double> diag;
    if (uses_wrd(kind))
    {
        for (int c : plan.columns(i))
            diag.push_back(f.wr().r(c, c).real());
    }
    else
    {
        const int n = plan.sa_count();
        for (int c = n - plan.stream(i).size; c < n; ++c)
            diag.push_back(f.qr().r(c, c).real());
    }
    return diag;
}

// Per-stream BERs (plan order) of one detector on one realized channel.
std::vector<double> conditional_streams(const StreamPlan &plan, const ChannelFactors &f, DetectorKind kind,
                                        double sigma2)
{
    std::vector<double> out(plan.size(), 0.0);
    double next = 0.0;
    for (std::size_t i = plan.size(); i-- > 0;)
    {
        BerSpec spec = stream_spec(plan, i, kind, sigma2, next);
        spec.diag = stream_diag(f, plan, i, kind);
        out[i] = mean_of(conditional_ber(spec));
        next = out[i];
    }
    return out;
}
} // namespace

std::vector<BerRecord> run_theory_sweep(const SimConfig &cfg)
{
    cfg.validate();
    if (!cfg.plan)
        raise(ErrorCode::InvalidArgument, "theory curves need a single-user stream plan");
    const StreamPlan &plan = *cfg.plan;

    std::vector<DetectorKind> kinds;
    for (DetectorKind k : cfg.detectors)
        if (has_theory(k))
            kinds.push_back(k);
    if (kinds.empty())
        raise(ErrorCode::InvalidArgument, "theory curves exist only for NC, PNC, CD and PCD");

    // Realized channels for the conditional forms.
    std::vector<ChannelFactors> draws;
    const ChannelKind ck = cfg.channel.kind;
    if (ck == ChannelKind::LineOfSight || ck == ChannelKind::Fixed)
        draws.push_back(prepare_for(cfg, draw_channel(cfg, 0), kinds).factors);
    else if (ck == ChannelKind::Multipath)
        for (int t = 0; t < cfg.theory_draws; ++t)
            draws.push_back(prepare_for(cfg, draw_channel(cfg, static_cast<std::uint64_t>(t)), kinds).factors);

    std::vector<BerRecord> records;
    for (double snr : cfg.snr_db)
    {
        const double sigma2 = snr_to_sigma2(snr, plan.total_power(), cfg.mode);
        for (DetectorKind kind : kinds)
        {
            std::vector<double> ber(plan.size(), 0.0);
            std::vector<double> printed(plan.size(), 0.0);
            if (ck == ChannelKind::Gaussian)
            {
                double next = 0.0;
                for (std::size_t i = plan.size(); i-- > 0;)
                {
                    const AveragedBer avg = avg_ber_rayleigh(stream_spec(plan, i, kind, sigma2, next));
                    ber[i] = avg.clamped;
                    printed[i] = avg.as_printed;
                    next = ber[i];
                }
            }
            else
            {
                for (const auto &f : draws)
                {
                    const auto one = conditional_streams(plan, f, kind, sigma2);
                    for (std::size_t i = 0; i < plan.size(); ++i)
                        ber[i] += one[i] / static_cast<double>(draws.size());
                }
            }
            // With no signal left every detector guesses; the list forms
            // would otherwise keep their forced-correct root.
            if (std::isinf(sigma2))
                std::fill(ber.begin(), ber.end(), 0.5);
            for (std::size_t i = 0; i < plan.size(); ++i)
            {
                BerRecord r;
                r.detector = std::string(to_string(kind));
                r.stream = static_cast<int>(i + 1);
                r.snr_db = snr;
                r.sigma2_w = sigma2;
                r.ber = ber[i];
                r.source = "theory";
                records.push_back(r);
                if (kind == DetectorKind::PCD && ck == ChannelKind::Gaussian)
                {
                    r.ber = printed[i];
                    r.source = "theory_printed";
                    records.push_back(r);
                }
            }
        }
    }
    return records;
}

// -------------------------------------------------------------------- CSV

void write_ber_csv(std::ostream &out, const std::vector<BerRecord> &records)
{
    out << kBerCsvHeader << '\n';
    for (const auto &r : records)
        out << fmt::format("{},{},{:.9g},{:.9g},{},{},{:.9g},{:.9g},{}\n", r.detector, r.stream, r.snr_db, r.sigma2_w,
                           r.trials, r.bit_errors, r.ber, r.ci95, r.source);
}

namespace
{
std::vector<std::string> split_csv(const std::string &line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

template <class T> T parse_field(const std::string &s, std::size_t line, const char *name)
{
    try
    {
        std::size_t used = 0;
        T v;
        if constexpr (std::is_same_v<T, double>)
            v = std::stod(s, &used);
        else if constexpr (std::is_same_v<T, int>)
            v = std::stoi(s, &used);
        else
            v = static_cast<T>(std::stoull(s, &used));
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    }
    catch (const std::logic_error &)
    {
        raise(ErrorCode::InvalidArgument, fmt::format("line {}: field '{}' has invalid value '{}'", line, name, s));
    }
}
} // namespace

std::vector<BerRecord> read_ber_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line))
        raise(ErrorCode::InvalidArgument, "empty CSV: missing header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kBerCsvHeader)
        raise(ErrorCode::InvalidArgument, "line 1: header does not match '" + std::string(kBerCsvHeader) + "'");

    std::vector<BerRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto f = split_csv(line);
        if (f.size() != 9)
            raise(ErrorCode::InvalidArgument, fmt::format("line {}: expected 9 fields, found {}", lineno, f.size()));
        BerRecord r;
        r.detector = f[0];
        r.stream = parse_field<int>(f[1], lineno, "stream");
        r.snr_db = parse_field<double>(f[2], lineno, "snr_db");
        r.sigma2_w = parse_field<double>(f[3], lineno, "sigma2_w");
        r.trials = parse_field<std::uint64_t>(f[4], lineno, "trials");
        r.bit_errors = parse_field<std::uint64_t>(f[5], lineno, "bit_errors");
        r.ber = parse_field<double>(f[6], lineno, "ber");
        r.ci95 = parse_field<double>(f[7], lineno, "ci95");
        r.source = f[8];
        if (r.detector.empty() || r.source.empty())
            raise(ErrorCode::InvalidArgument, fmt::format("line {}: empty detector or source", lineno));
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace thz
