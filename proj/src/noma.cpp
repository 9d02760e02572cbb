// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/noma.hpp"

#include "thz/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <numeric>

namespace thz
{

double dbm_to_watts(double dbm) noexcept
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

NomaScenario NomaScenario::table_defaults(int sa_count)
{
    NomaScenario s;
    s.sa_count = sa_count;
    s.max_power_w = 0.1 * sa_count;
    s.sensitivity_w = dbm_to_watts(-100.0);
    return s;
}

double NomaScenario::mean_pairs() const noexcept
{
    return inner_density * std::numbers::pi * inner_radius_m * inner_radius_m;
}

void NomaScenario::validate() const
{
    if (!(inner_radius_m > 0.0) || !(cell_radius_m > inner_radius_m))
        raise(ErrorCode::InvalidArgument, "need 0 < R_N < R_C");
    if (!(min_distance_m >= 0.0) || !(min_distance_m < inner_radius_m))
        raise(ErrorCode::InvalidArgument, "minimum distance must lie in [0, R_N)");
    if (!(inner_density > 0.0) || !(outer_density > 0.0))
        raise(ErrorCode::InvalidArgument, "user densities must be positive");
    if (!(pathloss_exponent > 0.0) || !(max_power_w > 0.0) || !(sensitivity_w > 0.0))
        raise(ErrorCode::InvalidArgument, "path-loss exponent, P_max and sensitivity must be positive");
    if (!(pc_parameter >= 1.0))
        raise(ErrorCode::InvalidArgument, "power-control parameter must be >= 1");
    if (sa_count < 1)
        raise(ErrorCode::InvalidArgument, "SA count must be >= 1");
    if (!(sector_rad > 0.0))
        raise(ErrorCode::InvalidArgument, "sector width must be positive");
}

UserDrop drop_users(const NomaScenario &s, CounterRng &rng)
{
    s.validate();
    const auto k = static_cast<std::size_t>(rng.poisson(s.mean_pairs()));
    if (k == 0)
        raise(ErrorCode::EmptyDrop, "Poisson draw produced no users");

    const double dmin2 = s.min_distance_m * s.min_distance_m;
    const double rn2 = s.inner_radius_m * s.inner_radius_m;
    const double rc2 = s.cell_radius_m * s.cell_radius_m;
    auto place = [&](double lo2, double hi2) {
        // 1 - U lies in (0, 1], so the radius lies in (sqrt(lo2), sqrt(hi2)].
        const double r = std::sqrt(lo2 + (hi2 - lo2) * (1.0 - rng.uniform()));
        const double a = s.sector_rad * (rng.uniform() - 0.5);
        return UserPosition{r, a};
    };

    UserDrop drop;
    drop.inner.reserve(k);
    drop.outer.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        drop.inner.push_back(place(dmin2, rn2));
    for (std::size_t i = 0; i < k; ++i)
        drop.outer.push_back(place(rn2, rc2));
    return drop;
}

namespace
{
std::vector<std::size_t> descending(std::span<const double> d)
{
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    return idx;
}
} // namespace

ClusterPlan jdcp(std::span<const double> inner, std::span<const double> outer, const NomaScenario &s)
{
    s.validate();
    const auto in_order = descending(inner);
    const auto out_order = descending(outer);
    const std::size_t k = std::min(inner.size(), outer.size());
    const double budget = s.per_sa_budget();

    ClusterPlan plan;
    plan.truncated = inner.size() + outer.size() - 2 * k;
    plan.pairs.reserve(k);
    for (std::size_t j = 0; j < k; ++j)
    {
        const std::size_t i1 = in_order[j];
        const std::size_t i2 = out_order[j];
        const double d1 = inner[i1];
        const double d2 = outer[i2];
        if (!(d1 > 0.0) || !(d2 > 0.0))
            raise(ErrorCode::InvalidArgument, "user distances must be positive");
        const double p1 = s.sensitivity_w * std::pow(d1, s.pathloss_exponent);
        const double headroom = budget - p1;
        if (!(headroom > 0.0))
            raise(ErrorCode::BudgetExhausted, fmt::format("inner user at {:.9g} m needs {:.9g} W, budget {:.9g} W", d1,
                                                          p1, budget));
        double p2 = std::min(s.pc_parameter * s.sensitivity_w * std::pow(d2, s.pathloss_exponent), headroom);
        while (p1 + p2 > budget)
            p2 = std::nextafter(p2, 0.0);
        plan.pairs.push_back({i1, i2, d1, d2, p1, p2});
    }
    return plan;
}

void write_cluster_csv(std::ostream &out, const ClusterPlan &plan)
{
    out << "pair_id,d1_m,d2_m,p1_W,p2_W\n";
    for (std::size_t k = 0; k < plan.pairs.size(); ++k)
    {
        const auto &p = plan.pairs[k];
        out << fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g}\n", k + 1, p.d1_m, p.d2_m, p.p1_w, p.p2_w);
    }
}

double large_scale_coefficient(double distance_m, double exponent)
{
    if (!(distance_m > 0.0))
        raise(ErrorCode::InvalidArgument, "distance must be positive");
    return std::pow(distance_m, -0.5 * exponent);
}

namespace
{
ChannelRealization user_channel(double distance, const ArrayGeometry &tmpl, const ChannelParams &params, bool tune,
                                double sigma)
{
    ArrayGeometry g = tmpl;
    g.distance_m = distance;
    if (tune)
    {
        if (g.tx_rows != g.tx_cols || g.rx_rows != g.rx_cols || g.tx_cols != g.rx_cols)
            raise(ErrorCode::InvalidArgument, "spatial tuning needs square, symmetric SA grids");
        g.subarray_spacing = optimal_sa_separation(distance, g.wavelength(), g.tx_cols, 1);
    }
    ChannelRealization ch = los_channel(g, params);
    const double scale = std::sqrt(static_cast<double>(ch.h.rows() * ch.h.cols())) / ch.h.norm();
    ch.h *= scale * sigma;
    ch.large_scale = sigma;
    ch.provenance += fmt::format(" normalized sigma_H={:.9g} tuned={}", sigma, tune ? 1 : 0);
    return ch;
}
} // namespace

NomaLink build_noma_link(const NomaPair &pair, const NomaScenario &s, const ArrayGeometry &tmpl,
                         const ChannelParams &params, bool tune_near, bool tune_far)
{
    const double s1 = large_scale_coefficient(pair.d1_m, s.pathloss_exponent);
    const double s2 = large_scale_coefficient(pair.d2_m, s.pathloss_exponent);
    return {user_channel(pair.d1_m, tmpl, params, tune_near, s1), user_channel(pair.d2_m, tmpl, params, tune_far, s2),
            s1, s2};
}

std::vector<NomaLink> build_noma_links(const ClusterPlan &plan, const NomaScenario &s, const ArrayGeometry &tmpl,
                                       const ChannelParams &params, bool tune_near, bool tune_far)
{
    std::vector<NomaLink> out;
    out.reserve(plan.pairs.size());
    for (const auto &p : plan.pairs)
        out.push_back(build_noma_link(p, s, tmpl, params, tune_near, tune_far));
    return out;
}

NomaReceivers NomaReceivers::prepare(const ComplexMatrix &h1, const ComplexMatrix &h2, const Constellation &c1,
                                     const Constellation &c2, std::span<const DetectorKind> kinds,
                                     const DecompositionOptions &opts)
{
    const int n = static_cast<int>(h1.cols());
    if (h2.cols() != n)
        raise(ErrorCode::DimensionMismatch, "both users must see the same N transmit SAs");
    StreamPlan p1(n, {{n, c1, {}}, {n, c2, {}}});
    StreamPlan p2(n, {{n, c2, {}}});
    ChannelFactors f1 = ChannelFactors::prepare(h1, p1, kinds, opts);
    ChannelFactors f2 = ChannelFactors::prepare(h2, p2, kinds, opts);
    return {std::move(p1), std::move(p2), std::move(f1), std::move(f2)};
}

PairDecision noma_detect_pair(const ComplexVector &y1, const ComplexVector &y2, const NomaReceivers &rx,
                              DetectorKind kind)
{
    PairDecision out;
    out.user2 = std::move(detect_superposed(y2, rx.user2, rx.user2_plan, kind).streams[0].bits);
    auto user1 = detect_superposed(y1, rx.user1, rx.user1_plan, kind);
    out.user1 = std::move(user1.streams[0].bits);
    return out;
}

} // namespace thz
