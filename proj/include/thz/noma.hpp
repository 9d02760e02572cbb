// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_NOMA_HPP
#define THZ_NOMA_HPP

#include "thz/channel.hpp"
#include "thz/detectors.hpp"
#include "thz/rng.hpp"

#include <ostream>
#include <span>
#include <vector>

namespace thz
{

double dbm_to_watts(double dbm) noexcept;

struct NomaScenario
{
    double inner_radius_m = 5.0;       // R_N
    double cell_radius_m = 10.0;       // R_C
    double inner_density = 0.1;        // users per m^2
    double outer_density = 0.1;
    double pathloss_exponent = 2.2;
    double sensitivity_w = 1e-13;      // -100 dBm
    double max_power_w = 1.6;          // 100 mW per SA
    double pc_parameter = 10.0;        // mu
    int sa_count = 16;                 // N
    double sector_rad = 0.17453292519943295; // 10 degrees
    double min_distance_m = 0.5;

    // Values of the reference parameter set; max power scales with N.
    static NomaScenario table_defaults(int sa_count = 16);
    double per_sa_budget() const noexcept { return max_power_w / sa_count; }
    double mean_pairs() const noexcept;
    void validate() const;
};

struct UserPosition
{
    double distance_m;
    double angle_rad;
};

// Equal K in both regions, inner radii in (d_min, R_N], outer in (R_N, R_C].
struct UserDrop
{
    std::vector<UserPosition> inner;
    std::vector<UserPosition> outer;
    std::size_t count() const noexcept { return inner.size(); }
};

// Throws EmptyDrop when K = 0.
UserDrop drop_users(const NomaScenario &s, CounterRng &rng);

struct NomaPair
{
    std::size_t inner_index;
    std::size_t outer_index;
    double d1_m;
    double d2_m;
    double p1_w;
    double p2_w;
};

struct ClusterPlan
{
    std::vector<NomaPair> pairs;
    std::size_t truncated = 0; // users left unpaired by unequal list lengths
};

// Pairs the k-th farthest inner user with the k-th farthest outer user.
// p1 = rho d1^a, p2 = min(mu rho d2^a, P_max / N - p1). Throws BudgetExhausted
// when P_max / N - p1 <= 0.
ClusterPlan jdcp(std::span<const double> inner, std::span<const double> outer, const NomaScenario &s);

void write_cluster_csv(std::ostream &out, const ClusterPlan &plan);

// Large-scale amplitude d^{-a/2}.
double large_scale_coefficient(double distance_m, double exponent);

struct NomaLink
{
    ChannelRealization near; // user 1: H1 = sigma_H1 * normalized channel
    ChannelRealization far;  // user 2
    double sigma_near;
    double sigma_far;
};

// Channels of one pair. The template fixes array counts, carrier and element
// layout; distance follows each user. Each LoS matrix is normalized to
// ||H||_F^2 = M N before the large-scale amplitude is applied. A tuned user's
// SA spacing is the z = 1 optimum for its own distance; an untuned user keeps
// the template spacing.
NomaLink build_noma_link(const NomaPair &pair, const NomaScenario &s, const ArrayGeometry &tmpl,
                         const ChannelParams &params, bool tune_near, bool tune_far);
std::vector<NomaLink> build_noma_links(const ClusterPlan &plan, const NomaScenario &s, const ArrayGeometry &tmpl,
                                       const ChannelParams &params, bool tune_near, bool tune_far);

struct PairDecision
{
    BitVector user1;
    BitVector user2;
};

// User 2 detects x2 alone; user 1 detects x2, cancels it and returns only x1.
struct NomaReceivers
{
    StreamPlan user1_plan; // {x1 at p1, x2 at p2}
    StreamPlan user2_plan; // {x2 at p2}
    ChannelFactors user1;
    ChannelFactors user2;

    static NomaReceivers prepare(const ComplexMatrix &h1, const ComplexMatrix &h2, const Constellation &c1,
                                 const Constellation &c2, std::span<const DetectorKind> kinds,
                                 const DecompositionOptions &opts = {});
};

PairDecision noma_detect_pair(const ComplexVector &y1, const ComplexVector &y2, const NomaReceivers &rx,
                              DetectorKind kind);

} // namespace thz

#endif
