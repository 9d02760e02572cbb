// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/analysis.hpp"

#include "thz/errors.hpp"

#include <bit>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace thz
{

double q_function(double x)
{
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

namespace
{
void check_order(int order)
{
    if (order != 2 && order != 4 && order != 16 && order != 64)
        raise(ErrorCode::UnsupportedOrder, "order " + std::to_string(order));
}

// Gray PAM bit error rate along one axis; `ratio` is the half level spacing
// over the per-axis noise standard deviation.
double axis_ber(double ratio, int levels, int bits)
{
    const double inf = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (int i = 0; i < levels; ++i)
    {
        const double ai = 2 * i - (levels - 1);
        const unsigned gi = gray_encode(static_cast<unsigned>(i));
        for (int j = 0; j < levels; ++j)
        {
            if (j == i)
                continue;
            const int hd = std::popcount(gi ^ gray_encode(static_cast<unsigned>(j)));
            const double lo = j == 0 ? -inf : 2 * j - levels;
            const double hi = j == levels - 1 ? inf : 2 * j - levels + 2;
            double p;
            if (j > i)
                p = q_function((lo - ai) * ratio) - (std::isinf(hi) ? 0.0 : q_function((hi - ai) * ratio));
            else
                p = q_function((ai - hi) * ratio) - (std::isinf(lo) ? 0.0 : q_function((ai - lo) * ratio));
            total += hd * p;
        }
    }
    return total / (levels * bits);
}
} // namespace

double awgn_ber(double gamma, int order)
{
    check_order(order);
    if (!(gamma >= 0.0))
        raise(ErrorCode::InvalidArgument, "SNR must be >= 0");
    if (order == 2)
        return q_function(std::sqrt(2.0 * gamma));
    const int bits = std::countr_zero(static_cast<unsigned>(order)) / 2;
    const int levels = 1 << bits;
    return axis_ber(std::sqrt(3.0 * gamma / (order - 1)), levels, bits);
}

double g_avg_ber(int diversity, double mean_snr, int order)
{
    check_order(order);
    if (diversity < 1)
        raise(ErrorCode::InvalidArgument, "diversity order must be >= 1");
    if (!(mean_snr >= 0.0))
        raise(ErrorCode::InvalidArgument, "mean SNR must be >= 0");
    if (mean_snr == 0.0)
        return awgn_ber(0.0, order);

    // t = gamma / mean_snr follows Gamma(z, 1).
    const double z = diversity;
    const double log_norm = std::lgamma(z);
    auto integrand = [&](double t) {
        if (t <= 0.0)
            return diversity == 1 ? awgn_ber(0.0, order) : 0.0;
        return awgn_ber(mean_snr * t, order) * std::exp((z - 1.0) * std::log(t) - t - log_norm);
    };

    const double t_max = z + 50.0 + 10.0 * std::sqrt(z);
    double edge = std::min(1.0, 0.05 / mean_snr);
    double a = 0.0;
    double sum = 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    while (a < t_max)
    {
        const double b = std::min(edge, t_max);
        sum += GK::integrate(integrand, a, b, 8, 1e-13);
        a = b;
        edge *= 2.0;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double slicing_error_amplitude(double power, int order)
{
    check_order(order);
    const double root = 2.0 * std::sqrt(power);
    if (order == 2)
        return root;
    return root / (std::log2(static_cast<double>(order)) - 1.0);
}

void BerSpec::validate() const
{
    if (!(sigma2 > 0.0))
        raise(ErrorCode::InvalidArgument, "noise variance must be positive");
    if (power < 0.0 || power_prev < 0.0 || power_next < 0.0)
        raise(ErrorCode::InvalidArgument, "powers must be >= 0");
    if (layers < 1)
        raise(ErrorCode::InvalidArgument, "need at least one layer");
    if (next_stream_ber < 0.0 || next_stream_ber > 1.0)
        raise(ErrorCode::InvalidArgument, "previous stream BER must lie in [0, 1]");
    check_order(order);
    check_order(order_next);
}

double effective_noise(const BerSpec &spec)
{
    const double beta = spec.power_next > 0.0 ? slicing_error_amplitude(spec.power_next, spec.order_next) : 0.0;
    return spec.sigma2 + spec.power_prev * spec.gain_prev * spec.gain_prev +
           spec.next_stream_ber * spec.gain_next * spec.gain_next * beta * beta;
}

ErrorPatternSet error_patterns(int layer, int layers, bool punctured, int cap)
{
    if (layer < 1 || layer > layers)
        raise(ErrorCode::OutOfRange, "layer outside [1, N]");
    ErrorPatternSet set;
    set.layer = layer;
    const int width = layers - layer;
    if (width == 0)
    {
        set.patterns.push_back({});
        return set;
    }
    if (punctured)
    {
        std::vector<std::uint8_t> ok(static_cast<std::size_t>(width), 0);
        std::vector<std::uint8_t> bad = ok;
        bad.back() = 1; // the root layer N
        set.patterns = {ok, bad};
        return set;
    }
    if (layers > cap)
        raise(ErrorCode::PatternExplosion, std::to_string(layers) + " layers exceed the pattern cap");
    for (unsigned mask = 0; mask < (1u << width); ++mask)
    {
        std::vector<std::uint8_t> p(static_cast<std::size_t>(width));
        for (int b = 0; b < width; ++b)
            p[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>((mask >> b) & 1u);
        set.patterns.push_back(std::move(p));
    }
    return set;
}

namespace
{
// term(n, extra) is the error probability of layer n (1-based) given `extra`
// added to the effective noise; root_forced marks list detectors.
using LayerTerm = std::function<double(int, double)>;

std::vector<double> punctured_recursion(const BerSpec &spec, const LayerTerm &term, bool root_forced)
{
    const int N = spec.layers;
    const double beta2 = std::pow(slicing_error_amplitude(spec.power, spec.order), 2);
    std::vector<double> out(static_cast<std::size_t>(N));
    const double pn = root_forced ? 0.0 : term(N, 0.0);
    out[static_cast<std::size_t>(N - 1)] = pn;
    for (int n = 1; n < N; ++n)
        out[static_cast<std::size_t>(n - 1)] = term(n, 0.0) * (1.0 - pn) + term(n, beta2) * pn;
    return out;
}

std::vector<double> pattern_recursion(const BerSpec &spec, const LayerTerm &term, bool root_forced, int cap)
{
    const int N = spec.layers;
    if (N > cap)
        raise(ErrorCode::PatternExplosion, std::to_string(N) + " layers exceed the pattern cap");
    const double beta2 = std::pow(slicing_error_amplitude(spec.power, spec.order), 2);
    std::vector<double> out(static_cast<std::size_t>(N));

    // prob[mask]: bit b of mask flags an error at layer N - b.
    const double pn = root_forced ? 0.0 : term(N, 0.0);
    out[static_cast<std::size_t>(N - 1)] = pn;
    std::vector<double> prob = {1.0 - pn, pn};
    for (int n = N - 1; n >= 1; --n)
    {
        const int width = N - n; // layers n+1..N in the current patterns
        std::vector<double> next(prob.size() * 2, 0.0);
        double pe = 0.0;
        for (std::size_t mask = 0; mask < prob.size(); ++mask)
        {
            if (prob[mask] == 0.0)
                continue;
            const int weight = std::popcount(static_cast<unsigned>(mask));
            const double cond = term(n, beta2 * weight);
            pe += cond * prob[mask];
            next[mask] += prob[mask] * (1.0 - cond);
            next[mask | (std::size_t{1} << width)] += prob[mask] * cond;
        }
        out[static_cast<std::size_t>(n - 1)] = pe;
        prob = std::move(next);
    }
    return out;
}

void check_diag(const BerSpec &spec)
{
    if (static_cast<int>(spec.diag.size()) != spec.layers)
        raise(ErrorCode::LengthMismatch, "need one diagonal value per layer");
}
} // namespace

std::vector<double> pnc_conditional_ber(const BerSpec &spec)
{
    spec.validate();
    check_diag(spec);
    const double s2 = effective_noise(spec);
    auto term = [&](int n, double extra) {
        const double r = spec.diag[static_cast<std::size_t>(n - 1)];
        return awgn_ber(r * r * spec.power / (s2 + extra), spec.order);
    };
    return punctured_recursion(spec, term, spec.kind == DetectorKind::PCD);
}

std::vector<double> nc_conditional_ber(const BerSpec &spec, int cap)
{
    spec.validate();
    check_diag(spec);
    const double s2 = effective_noise(spec);
    auto term = [&](int n, double extra) {
        const double r = spec.diag[static_cast<std::size_t>(n - 1)];
        return awgn_ber(r * r * spec.power / (s2 + extra), spec.order);
    };
    return pattern_recursion(spec, term, spec.kind == DetectorKind::CD, cap);
}

std::vector<double> conditional_ber(const BerSpec &spec, int cap)
{
    switch (spec.kind)
    {
    case DetectorKind::NC:
    case DetectorKind::CD: return nc_conditional_ber(spec, cap);
    case DetectorKind::PNC:
    case DetectorKind::PCD: return pnc_conditional_ber(spec);
    default: raise(ErrorCode::InvalidArgument, "no closed form for " + std::string(to_string(spec.kind)));
    }
}

AveragedBer avg_ber_rayleigh(const BerSpec &spec, int cap)
{
    spec.validate();
    const int N = spec.layers;
    const double s2 = effective_noise(spec);
    const bool punctured = uses_wrd(spec.kind);
    const bool forced = spec.kind == DetectorKind::CD || spec.kind == DetectorKind::PCD;

    AveragedBer out;
    if (punctured)
    {
        // Root keeps 2 degrees of freedom, punctured layers keep 4.
        auto term = [&](int n, double extra) {
            return g_avg_ber(n == N ? 1 : 2, spec.power / (s2 + extra), spec.order);
        };
        out.per_layer = punctured_recursion(spec, term, forced);
    }
    else if (spec.kind == DetectorKind::NC || spec.kind == DetectorKind::CD)
    {
        auto term = [&](int n, double extra) { return g_avg_ber(N - n + 1, spec.power / (s2 + extra), spec.order); };
        out.per_layer = pattern_recursion(spec, term, forced, cap);
    }
    else
    {
        raise(ErrorCode::InvalidArgument, "no averaged form for " + std::string(to_string(spec.kind)));
    }

    double sum = 0.0;
    for (double p : out.per_layer)
        sum += p;
    out.layer_mean = sum / N;
    out.clamped = std::min(out.layer_mean, 0.5);
    out.as_printed = spec.kind == DetectorKind::PCD ? (N - 1) * g_avg_ber(2, spec.power / s2, spec.order)
                                                    : out.layer_mean;
    return out;
}

long long FlopPolynomial::rad_rounded() const
{
    return static_cast<long long>(std::llround(boost::rational_cast<double>(rad)));
}

long long FlopPolynomial::rml_rounded() const
{
    return static_cast<long long>(std::llround(boost::rational_cast<double>(rml)));
}

FlopPolynomial flops_epsilon(int which, int n)
{
    if (n < 2)
        raise(ErrorCode::InvalidArgument, "complexity polynomials need N >= 2");
    const long long N = n;
    const long long N2 = N * N;
    const long long N3 = N2 * N;
    switch (which)
    {
    case 1: return {Rational(N2 - 3 * N + 2), Rational(2 * N2 - 6 * N + 4)};
    case 2: return {Rational(4 * N3 - N2 - N), Rational(4 * N3 + 3 * N2)};
    case 3:
        return {Rational(2, 3) * Rational(8 * N3 - 15 * N2 + 4 * N - 12),
                Rational(16, 3) * Rational(N3) - Rational(7 * N2) + Rational(8, 3) * Rational(N) - Rational(20)};
    default: raise(ErrorCode::InvalidArgument, "epsilon index must be 1, 2 or 3");
    }
}

Rational multiplication_saving_fraction(int n)
{
    if (n < 2)
        raise(ErrorCode::InvalidArgument, "need N >= 2");
    const long long N = n;
    return Rational((N - 2) * (N - 1), N * (N + 1));
}

std::vector<SavingsRow> savings_table(long long frames, long long streams, int n, long long order)
{
    if (frames < 1 || streams < 1 || order < 2)
        raise(ErrorCode::InvalidArgument, "savings table needs positive J, |S| and |X|");
    const auto e1 = flops_epsilon(1, n);
    const auto e2 = flops_epsilon(2, n);
    const auto e3 = flops_epsilon(3, n);
    const Rational base = Rational(frames * streams) * e1.flops();
    const Rational nn(n);
    return {
        {"NC->PNC", e2, e3, base},
        {"CD->PCD", e2, e3, base * Rational(order)},
        {"LORD->SSD", {e2.rad * nn, e2.rml * nn}, {e3.rad * nn, e3.rml * nn}, base * nn * Rational(order)},
    };
}

} // namespace thz
