// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_HARNESS_HPP
#define THZ_HARNESS_HPP

#include "thz/channel.hpp"
#include "thz/detectors.hpp"
#include "thz/noma.hpp"

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace thz
{

enum class SnrMode
{
    TransmitNormalized,
    Physical
};

SnrMode parse_snr_mode(std::string_view name); // UnknownMode
std::string_view to_string(SnrMode mode) noexcept;

// sigma^2 = total_power / 10^(snr / 10). The mapping is the same in both
// modes; the modes differ in whether channels are normalized (see
// ChannelSpec). snr_db = -inf maps to sigma^2 = +inf.
double snr_to_sigma2(double snr_db, double total_power, SnrMode mode);
double sigma2_to_snr(double sigma2, double total_power, SnrMode mode);

// 1.96 sqrt(p (1 - p) / n), n the number of simulated bits.
double binomial_ci(std::uint64_t errors, std::uint64_t bits);

struct ChannelSpec
{
    ChannelKind kind = ChannelKind::Gaussian;
    int rows = 4; // Gaussian and Fixed sizes; LoS sizes come from geometry
    int cols = 4;
    ArrayGeometry geometry{};
    ChannelParams params{};
    MultipathParams multipath{};
    bool tuning = false; // replace the SA spacing by the z-th optimum
    int tuning_z = 1;
    ComplexMatrix fixed; // ChannelKind::Fixed

    // Geometry with tuning applied.
    ArrayGeometry effective_geometry() const;
    int rx_count() const;
    int tx_count() const;
    bool redrawn_per_trial() const noexcept
    {
        return kind == ChannelKind::Gaussian || kind == ChannelKind::Multipath;
    }
    void validate() const;
};

struct NomaSimSpec
{
    NomaScenario scenario{};
    ArrayGeometry geometry{}; // array template; distance follows each user
    ChannelParams params{};
    bool tune_near = true;
    bool tune_far = true;
    int order_near = 4;
    int order_far = 4;
    int drop_budget = 100; // redraws allowed after EmptyDrop or BudgetExhausted
};

struct SimConfig
{
    ChannelSpec channel{};
    std::optional<StreamPlan> plan;  // single-user superposition
    std::optional<NomaSimSpec> noma; // two-user NOMA; exclusive with plan
    std::vector<DetectorKind> detectors;
    std::vector<double> snr_db;
    SnrMode mode = SnrMode::TransmitNormalized;
    std::uint64_t max_trials = 1'000'000;
    std::uint64_t min_bit_errors = 200;
    std::uint64_t batch_trials = 256; // early-stop granularity, fixed for determinism
    std::uint64_t seed = 1;
    unsigned workers = 1; // 0: hardware concurrency
    std::uint64_t ml_cap = kDefaultMlCap;
    int theory_draws = 200; // channel draws averaged by multipath theory
    DecompositionOptions decomposition{};

    void validate() const;
};

struct BerRecord
{
    std::string detector;
    int stream = 1; // 1-based stream index, or NOMA user id
    double snr_db = 0.0;
    double sigma2_w = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t bit_errors = 0;
    double ber = 0.0;
    double ci95 = 0.0;
    std::string source = "sim";
};

// One channel ready for detection. For fixed channels this is built once per
// sweep; for redrawn kinds once per trial.
struct PreparedChannel
{
    ChannelRealization realization;
    ChannelFactors factors;
};

// Channel of one trial (the trial index is ignored for fixed kinds).
ChannelRealization draw_channel(const SimConfig &cfg, std::uint64_t trial);
PreparedChannel prepare_channel(const SimConfig &cfg, ChannelRealization ch);

// errors[d][s]: bit errors of detector cfg.detectors[d] on stream s.
struct TrialErrors
{
    std::vector<std::vector<std::uint64_t>> errors;
};

// One single-user trial on a prepared channel. Bits depend on (seed, trial)
// only; noise on (seed, trial, snr_index). Every detector in `active` sees
// the same bits and noise.
TrialErrors simulate_trial(const SimConfig &cfg, const PreparedChannel &ch, double sigma2, std::uint64_t trial,
                           std::size_t snr_index, const std::vector<bool> &active);

// Runs fn(i) for i in [begin, end) on `workers` threads; rethrows the first
// exception in index order.
void parallel_for(std::uint64_t begin, std::uint64_t end, unsigned workers,
                  const std::function<void(unsigned worker, std::uint64_t i)> &fn);
unsigned resolve_workers(unsigned requested) noexcept;

std::vector<BerRecord> run_ber_sweep(const SimConfig &cfg);

// NOMA: one drop with JDCP, trial t uses pair t mod K; stream = user id.
struct NomaSetup
{
    UserDrop drop;
    ClusterPlan plan;
    std::uint64_t redraws = 0;
};
NomaSetup noma_setup(const SimConfig &cfg); // EmptyDrop / BudgetExhausted after the budget
std::vector<BerRecord> run_noma_sweep(const SimConfig &cfg);

// Closed-form curves for NC, PNC, CD and PCD; other kinds are skipped.
// Gaussian channels use the Rayleigh averages, LoS channels the conditional
// forms on the realized channel, multipath channels the conditional forms
// averaged over cfg.theory_draws draws. PCD additionally emits the printed
// sum with source "theory_printed".
std::vector<BerRecord> run_theory_sweep(const SimConfig &cfg);

inline constexpr std::string_view kBerCsvHeader = "detector,stream,snr_db,sigma2_w,trials,bit_errors,ber,ci95,source";

void write_ber_csv(std::ostream &out, const std::vector<BerRecord> &records);
std::vector<BerRecord> read_ber_csv(std::istream &in); // InvalidArgument on schema mismatch

} // namespace thz

#endif
