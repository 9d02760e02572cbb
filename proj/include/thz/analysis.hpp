// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_ANALYSIS_HPP
#define THZ_ANALYSIS_HPP

#include "thz/detectors.hpp"

#include <boost/rational.hpp>
#include <cstdint>
#include <string>
#include <vector>

namespace thz
{

double q_function(double x);

// Exact Gray-mapped square L-QAM (BPSK for L = 2) bit error rate in AWGN at
// symbol SNR gamma = E_s / sigma^2, sigma^2 the complex noise variance.
double awgn_ber(double gamma, int order);

// Average of awgn_ber over the z-branch maximal-ratio Rayleigh SNR, i.e. a
// Gamma(z, mean_snr) density. G(1, g, 2) = (1 - sqrt(g / (1 + g))) / 2.
double g_avg_ber(int diversity, double mean_snr, int order);

// One-bit slicing error magnitude of a scaled L-QAM: 2 sqrt(p) / (log2 L - 1),
// taken as 2 sqrt(p) for BPSK.
double slicing_error_amplitude(double power, int order);

// Inputs of the per-layer BER forms for stream i. Layers are 1..N, stored
// 0-based in `diag` (r_nn or punctured r_nn).
struct BerSpec
{
    DetectorKind kind = DetectorKind::PNC;
    int layers = 1;
    int order = 2;
    double power = 1.0;          // p_i
    double power_prev = 0.0;     // p_{i-1}, weaker stream left as interference
    double power_next = 0.0;     // p_{i+1}, stronger stream already cancelled
    int order_next = 2;
    double sigma2 = 1.0;
    double gain_prev = 1.0;      // sigma_H of stream i-1
    double gain_next = 1.0;      // sigma_H of stream i+1
    double next_stream_ber = 0.0; // residual SIC error probability of stream i+1
    std::vector<double> diag;

    void validate() const;
};

// sigma^2 + p_{i-1} s_{i-1}^2 + P^{(i+1)} s_{i+1}^2 beta_{i+1}^2
double effective_noise(const BerSpec &spec);

// Error-indicator patterns over layers n+1..N (n is 1-based): 2^{N-n} of
// them for back-substitution, 2 (root right or wrong) when punctured.
struct ErrorPatternSet
{
    int layer = 0;
    std::vector<std::vector<std::uint8_t>> patterns;
};
ErrorPatternSet error_patterns(int layer, int layers, bool punctured, int cap = 12);

// Conditional per-layer BERs on realized diagonal values. Index n-1 holds
// layer n. With the list detectors (CD, PCD) the root is taken as correct.
std::vector<double> pnc_conditional_ber(const BerSpec &spec);
std::vector<double> nc_conditional_ber(const BerSpec &spec, int cap = 12);
std::vector<double> conditional_ber(const BerSpec &spec, int cap = 12);

struct AveragedBer
{
    std::vector<double> per_layer;
    double as_printed = 0.0;    // PCD: (N-1) G(2, .), others: layer mean
    double layer_mean = 0.0;    // mean over all N layers
    double clamped = 0.0;       // min(layer_mean, 0.5)
};

// Rayleigh (i.i.d. CN(0,1) channel) averages of the conditional forms;
// `diag` is ignored. Supports NC, PNC, CD, PCD.
AveragedBer avg_ber_rayleigh(const BerSpec &spec, int cap = 12);

using Rational = boost::rational<long long>;

struct FlopPolynomial
{
    Rational rad;
    Rational rml;

    Rational flops() const { return rad + rml; }
    long long rad_rounded() const;
    long long rml_rounded() const;
};

// 1: punctured product saving, 2: QRD, 3: puncturing. N >= 2.
FlopPolynomial flops_epsilon(int which, int n);

// (N-2)(N-1)/2 over N(N+1)/2: saved over total complex multiplications of
// an upper-triangular matrix-vector product.
Rational multiplication_saving_fraction(int n);

struct SavingsRow
{
    std::string transition; // e.g. "NC->PNC"
    FlopPolynomial qrd;
    FlopPolynomial puncturing;
    Rational savings_flops;
};

std::vector<SavingsRow> savings_table(long long frames, long long streams, int n, long long order);

} // namespace thz

#endif
