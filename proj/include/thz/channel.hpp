// SPDX-License-Identifier: Apache-2.0
//
// thz-noma: THz UM-MIMO superposition coding and NOMA detection
// ------------------------------------------------------------------------

#ifndef THZ_CHANNEL_HPP
#define THZ_CHANNEL_HPP

#include "thz/numerics.hpp"
#include "thz/rng.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace thz
{

inline constexpr double kSpeedOfLight = 299792458.0;

// Arrays-of-subarrays on two parallel planes. The transmit grid (tx_rows x
// tx_cols SAs) lies at z = 0, the receive grid at z = distance, both centered
// on the z axis with SA pitch subarray_spacing. Vectorized index of SA (r, c)
// is r * cols + c.
struct ArrayGeometry
{
    int tx_rows = 1;
    int tx_cols = 1;
    int rx_rows = 1;
    int rx_cols = 1;
    int elements_per_side = 1; // Q
    double element_spacing = 0.0; // delta, m
    double subarray_spacing = 0.0; // Delta, m
    double carrier_hz = 0.0;
    double distance_m = 0.0;

    int tx_count() const noexcept { return tx_rows * tx_cols; }
    int rx_count() const noexcept { return rx_rows * rx_cols; }
    double wavelength() const noexcept { return kSpeedOfLight / carrier_hz; }
    void validate() const;
};

struct ChannelParams
{
    double absorption_per_m = 0.0; // K(f)
    double tx_gain = 1.0;
    double rx_gain = 1.0;
    double tx_azimuth = 0.0;
    double tx_elevation = 0.0;
    double rx_azimuth = 0.0;
    double rx_elevation = 0.0;

    void validate() const;
};

// Zero-mean two-component Gaussian mixture for ray angle offsets.
struct AngleMixture
{
    double weight = 0.5;   // probability of the first component
    double sigma1 = 0.05;  // rad
    double sigma2 = 0.2;   // rad
};

struct MultipathParams
{
    int clusters = 0;
    double rays_mean = 5.0;          // Poisson mean of N_ray per cluster
    double cluster_decay_s = 20e-9;  // Gamma
    double ray_decay_s = 5e-9;       // gamma
    double cluster_rate_hz = 0.1e9;  // Lambda of the cluster arrival process
    double ray_rate_hz = 0.5e9;      // lambda of the ray arrival process
    AngleMixture azimuth_spread{};
    AngleMixture elevation_spread{};

    void validate() const;
};

enum class ChannelKind
{
    LineOfSight,
    Multipath,
    Gaussian,
    Fixed
};

std::string_view to_string(ChannelKind kind) noexcept;

struct ChannelRealization
{
    ComplexMatrix h;
    ChannelKind kind = ChannelKind::Fixed;
    std::string provenance;
    std::optional<double> large_scale; // sigma_H
};

using Vec3 = std::array<double, 3>;

cd los_path_gain(double carrier_hz, double distance_m, double absorption_per_m);

// Planar Q x Q element coordinates in the x-y plane, p-major (p outer).
std::vector<Vec3> planar_element_grid(int q, double spacing);

// Entries e^{j Phi} / sqrt(count); unit norm. For a Q x Q grid this is 1/Q.
ComplexVector steering_vector(double azimuth, double elevation, double wavelength, std::span<const Vec3> coords);
ComplexVector steering_vector(double azimuth, double elevation, int q, double spacing, double wavelength);

ChannelRealization los_channel(const ArrayGeometry &geometry, const ChannelParams &params);
ChannelRealization multipath_channel(const ArrayGeometry &geometry, const ChannelParams &params,
                                     const MultipathParams &mp, CounterRng &rng);
ChannelRealization gaussian_channel(int rows, int cols, CounterRng &rng);

// sqrt(z D lambda / M) for odd z, M SAs per side.
double optimal_sa_separation(double distance_m, double wavelength, int per_side, int z);

// 2 ((M - 1) Delta)^2 / lambda.
double rayleigh_distance(double spacing, int per_side, double wavelength);

// Tabulated K(f) with linear interpolation; clamps outside the table.
class AbsorptionTable
{
public:
    AbsorptionTable() = default;
    explicit AbsorptionTable(std::vector<std::pair<double, double>> rows);

    static AbsorptionTable load(const std::string &path);
    static AbsorptionTable bundled();

    double at(double carrier_hz) const;
    std::size_t size() const noexcept { return rows_.size(); }

private:
    std::vector<std::pair<double, double>> rows_;
};

} // namespace thz

#endif
