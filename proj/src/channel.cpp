// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#include "thz/channel.hpp"

#include "thz/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numbers>
#include <sstream>

namespace thz
{

namespace
{
constexpr double kPi = std::numbers::pi;

std::vector<Vec3> sa_centers(int rows, int cols, double spacing, double z)
{
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(rows * cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out.push_back({(c - 0.5 * (cols - 1)) * spacing, (r - 0.5 * (rows - 1)) * spacing, z});
    return out;
}

double distance(const Vec3 &a, const Vec3 &b) noexcept
{
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double mixture_offset(const AngleMixture &mix, CounterRng &rng)
{
    const double pick = rng.uniform();
    const double sigma = pick < mix.weight ? mix.sigma1 : mix.sigma2;
    return sigma * rng.normal();
}

std::string geometry_label(const ArrayGeometry &g, const ChannelParams &p)
{
    return fmt::format("tx={}x{} rx={}x{} Q={} delta={:.9g} Delta={:.9g} f={:.9g} D={:.9g} K={:.9g} Gt={:.9g} Gr={:.9g}",
                       g.tx_rows, g.tx_cols, g.rx_rows, g.rx_cols, g.elements_per_side, g.element_spacing,
                       g.subarray_spacing, g.carrier_hz, g.distance_m, p.absorption_per_m, p.tx_gain, p.rx_gain);
}
} // namespace

void ArrayGeometry::validate() const
{
    if (tx_rows < 1 || tx_cols < 1 || rx_rows < 1 || rx_cols < 1 || elements_per_side < 1)
        raise(ErrorCode::InvalidArgument, "array counts must be >= 1");
    if (!(subarray_spacing > 0.0))
        raise(ErrorCode::InvalidArgument, "subarray spacing must be positive");
    if (elements_per_side > 1 && !(element_spacing > 0.0))
        raise(ErrorCode::InvalidArgument, "element spacing must be positive");
    if (!(carrier_hz > 0.0) || !(distance_m > 0.0))
        raise(ErrorCode::InvalidArgument, "carrier and distance must be positive");
}

void ChannelParams::validate() const
{
    if (!(absorption_per_m >= 0.0))
        raise(ErrorCode::InvalidArgument, "absorption coefficient must be >= 0");
    if (!(tx_gain > 0.0) || !(rx_gain > 0.0))
        raise(ErrorCode::InvalidArgument, "antenna gains must be positive");
}

void MultipathParams::validate() const
{
    if (clusters < 0 || !(rays_mean >= 0.0))
        raise(ErrorCode::InvalidArgument, "multipath counts must be >= 0");
    if (!(cluster_decay_s > 0.0) || !(ray_decay_s > 0.0))
        raise(ErrorCode::InvalidArgument, "decay factors must be positive");
    if (!(cluster_rate_hz > 0.0) || !(ray_rate_hz > 0.0))
        raise(ErrorCode::InvalidArgument, "arrival rates must be positive");
    for (const auto *mix : {&azimuth_spread, &elevation_spread})
        if (mix->weight < 0.0 || mix->weight > 1.0 || mix->sigma1 < 0.0 || mix->sigma2 < 0.0)
            raise(ErrorCode::InvalidArgument, "invalid angle mixture");
}

std::string_view to_string(ChannelKind kind) noexcept
{
    switch (kind)
    {
    case ChannelKind::LineOfSight: return "los";
    case ChannelKind::Multipath: return "multipath";
    case ChannelKind::Gaussian: return "gaussian";
    case ChannelKind::Fixed: return "fixed";
    }
    return "unknown";
}

cd los_path_gain(double carrier_hz, double distance_m, double absorption_per_m)
{
    if (!(carrier_hz > 0.0) || !(distance_m > 0.0))
        raise(ErrorCode::InvalidArgument, "path gain needs positive frequency and distance");
    if (!(absorption_per_m >= 0.0))
        raise(ErrorCode::InvalidArgument, "absorption coefficient must be >= 0");
    const double spread = kSpeedOfLight / (4.0 * kPi * carrier_hz * distance_m);
    const double atten = std::exp(-0.5 * absorption_per_m * distance_m);
    const double phase = -2.0 * kPi * carrier_hz * distance_m / kSpeedOfLight;
    return std::polar(spread * atten, phase);
}

std::vector<Vec3> planar_element_grid(int q, double spacing)
{
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(q * q));
    for (int p = 0; p < q; ++p)
        for (int s = 0; s < q; ++s)
            out.push_back({p * spacing, s * spacing, 0.0});
    return out;
}

ComplexVector steering_vector(double azimuth, double elevation, double wavelength, std::span<const Vec3> coords)
{
    const double k = 2.0 * kPi / wavelength;
    const double ux = std::cos(azimuth) * std::sin(elevation);
    const double uy = std::sin(azimuth) * std::sin(elevation);
    const double uz = std::cos(elevation);
    const double norm = 1.0 / std::sqrt(static_cast<double>(coords.size()));
    ComplexVector a(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i)
    {
        const double phi = k * (coords[i][0] * ux + coords[i][1] * uy + coords[i][2] * uz);
        a(static_cast<Eigen::Index>(i)) = std::polar(norm, phi);
    }
    return a;
}

ComplexVector steering_vector(double azimuth, double elevation, int q, double spacing, double wavelength)
{
    if (q < 1)
        raise(ErrorCode::InvalidArgument, "steering vector needs Q >= 1");
    const auto grid = planar_element_grid(q, spacing);
    return steering_vector(azimuth, elevation, wavelength, grid);
}

ChannelRealization los_channel(const ArrayGeometry &g, const ChannelParams &p)
{
    g.validate();
    p.validate();
    const double lambda = g.wavelength();
    const auto elems = planar_element_grid(g.elements_per_side, g.element_spacing);
    const ComplexVector at = steering_vector(p.tx_azimuth, p.tx_elevation, lambda, elems);
    const ComplexVector ar = steering_vector(p.rx_azimuth, p.rx_elevation, lambda, elems);
    const cd beam = p.rx_gain * p.tx_gain * ar.dot(at); // a_r^H a_t

    const auto tx = sa_centers(g.tx_rows, g.tx_cols, g.subarray_spacing, 0.0);
    const auto rx = sa_centers(g.rx_rows, g.rx_cols, g.subarray_spacing, g.distance_m);

    ChannelRealization out;
    out.kind = ChannelKind::LineOfSight;
    out.h.resize(static_cast<Eigen::Index>(rx.size()), static_cast<Eigen::Index>(tx.size()));
    for (std::size_t m = 0; m < rx.size(); ++m)
        for (std::size_t n = 0; n < tx.size(); ++n)
            out.h(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
                beam * los_path_gain(g.carrier_hz, distance(rx[m], tx[n]), p.absorption_per_m);
    out.provenance = "los " + geometry_label(g, p);
    return out;
}

ChannelRealization multipath_channel(const ArrayGeometry &g, const ChannelParams &p, const MultipathParams &mp,
                                     CounterRng &rng)
{
    mp.validate();
    ChannelRealization out = los_channel(g, p);
    out.kind = ChannelKind::Multipath;
    out.provenance = fmt::format("multipath clusters={} rays_mean={:.9g} Gamma={:.9g} gamma={:.9g} ", mp.clusters,
                                 mp.rays_mean, mp.cluster_decay_s, mp.ray_decay_s) +
                     out.provenance.substr(4);
    if (mp.clusters == 0)
        return out;

    const double lambda = g.wavelength();
    const auto elems = planar_element_grid(g.elements_per_side, g.element_spacing);
    const auto tx = sa_centers(g.tx_rows, g.tx_cols, g.subarray_spacing, 0.0);
    const auto rx = sa_centers(g.rx_rows, g.rx_cols, g.subarray_spacing, g.distance_m);
    const auto M = static_cast<Eigen::Index>(rx.size());
    const auto N = static_cast<Eigen::Index>(tx.size());

    // Large-scale power per (m, n), shared by all rays.
    Eigen::MatrixXd pathloss(M, N);
    for (Eigen::Index m = 0; m < M; ++m)
        for (Eigen::Index n = 0; n < N; ++n)
        {
            const double d = distance(rx[static_cast<std::size_t>(m)], tx[static_cast<std::size_t>(n)]);
            const double s = kSpeedOfLight / (4.0 * kPi * g.carrier_hz * d);
            pathloss(m, n) = s * s * std::exp(-p.absorption_per_m * d);
        }

    ComplexMatrix nlos = ComplexMatrix::Zero(M, N);
    double tau = 0.0;
    for (int v = 0; v < mp.clusters; ++v)
    {
        if (v > 0)
            tau += rng.exponential(mp.cluster_rate_hz);
        const double az_t = kPi - 2.0 * kPi * rng.uniform(); // (-pi, pi]
        const double el_t = kPi * (rng.uniform() - 0.5);
        const double az_r = kPi - 2.0 * kPi * rng.uniform();
        const double el_r = kPi * (rng.uniform() - 0.5);
        const auto rays = rng.poisson(mp.rays_mean);
        double tau_ray = 0.0;
        for (std::uint64_t u = 0; u <= rays; ++u)
        {
            if (u > 0)
                tau_ray += rng.exponential(mp.ray_rate_hz);
            const double phi_t = az_t + mixture_offset(mp.azimuth_spread, rng);
            const double theta_t = el_t + mixture_offset(mp.elevation_spread, rng);
            const double phi_r = az_r + mixture_offset(mp.azimuth_spread, rng);
            const double theta_r = el_r + mixture_offset(mp.elevation_spread, rng);
            const ComplexVector at = steering_vector(phi_t, theta_t, lambda, elems);
            const ComplexVector ar = steering_vector(phi_r, theta_r, lambda, elems);
            const cd beam = p.rx_gain * p.tx_gain * ar.dot(at);
            const double decay = std::exp(-tau / mp.cluster_decay_s) * std::exp(-tau_ray / mp.ray_decay_s);
            for (Eigen::Index m = 0; m < M; ++m)
                for (Eigen::Index n = 0; n < N; ++n)
                    nlos(m, n) += beam * rng.complex_normal(pathloss(m, n) * decay);
        }
    }
    out.h += nlos;
    return out;
}

ChannelRealization gaussian_channel(int rows, int cols, CounterRng &rng)
{
    if (rows < 1 || cols < 1)
        raise(ErrorCode::InvalidArgument, "gaussian channel needs positive dimensions");
    ChannelRealization out;
    out.kind = ChannelKind::Gaussian;
    out.h.resize(rows, cols);
    for (int m = 0; m < rows; ++m)
        for (int n = 0; n < cols; ++n)
            out.h(m, n) = rng.complex_normal(1.0);
    out.provenance = fmt::format("gaussian {}x{} CN(0,1)", rows, cols);
    return out;
}

double optimal_sa_separation(double distance_m, double wavelength, int per_side, int z)
{
    if (z < 1 || z % 2 == 0)
        raise(ErrorCode::InvalidArgument, "spatial tuning index z must be odd and >= 1");
    if (!(distance_m > 0.0) || !(wavelength > 0.0) || per_side < 1)
        raise(ErrorCode::InvalidArgument, "optimal separation needs positive D, lambda, M");
    return std::sqrt(z * distance_m * wavelength / per_side);
}

double rayleigh_distance(double spacing, int per_side, double wavelength)
{
    if (!(spacing > 0.0) || per_side < 1 || !(wavelength > 0.0))
        raise(ErrorCode::InvalidArgument, "rayleigh distance needs positive inputs");
    const double aperture = (per_side - 1) * spacing;
    return 2.0 * aperture * aperture / wavelength;
}

AbsorptionTable::AbsorptionTable(std::vector<std::pair<double, double>> rows) : rows_(std::move(rows))
{
    std::sort(rows_.begin(), rows_.end());
    for (const auto &[f, k] : rows_)
        if (!(f > 0.0) || !(k >= 0.0))
            raise(ErrorCode::InvalidArgument, "absorption table needs positive frequency and K >= 0");
}

AbsorptionTable AbsorptionTable::load(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        raise(ErrorCode::InvalidArgument, "cannot open absorption table " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double f, k;
        if (!(ss >> f))
            continue;
        if (!(ss >> k))
            raise(ErrorCode::InvalidArgument, fmt::format("{}:{}: expected two columns", path, lineno));
        rows.emplace_back(f, k);
    }
    if (rows.empty())
        raise(ErrorCode::InvalidArgument, "absorption table " + path + " has no rows");
    return AbsorptionTable(std::move(rows));
}

AbsorptionTable AbsorptionTable::bundled()
{
    // Coarse standard-atmosphere values, 1/m. Placeholders for sweeps, not
    // a substitute for a line-by-line model.
    return AbsorptionTable({{100e9, 1.0e-4},
                            {200e9, 6.0e-4},
                            {300e9, 1.2e-3},
                            {400e9, 6.0e-3},
                            {557e9, 5.0e-1},
                            {650e9, 2.5e-2},
                            {850e9, 5.0e-2},
                            {1000e9, 1.5e-1}});
}

double AbsorptionTable::at(double carrier_hz) const
{
    if (rows_.empty())
        raise(ErrorCode::InvalidArgument, "empty absorption table");
    if (carrier_hz <= rows_.front().first)
        return rows_.front().second;
    if (carrier_hz >= rows_.back().first)
        return rows_.back().second;
    const auto hi = std::lower_bound(rows_.begin(), rows_.end(), std::make_pair(carrier_hz, -1.0));
    const auto lo = hi - 1;
    const double t = (carrier_hz - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

} // namespace thz
