// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Terahertz line-of-sight physical layer: geometry, channel matrices,
// self-blockage, per-slot achievable rates, and per-AP power projection.

#ifndef THZ360_PHY_HPP
#define THZ360_PHY_HPP

#include <armadillo>
#include <array>
#include <set>
#include <vector>

#include "thz360/common.hpp"

namespace thz360 {

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline double distance(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct PhyConfig {
    double f_c = 1.05e12;           // carrier frequency, Hz
    double kappa = 0.07512;         // molecular absorption coefficient, 1/m
    double bandwidth = 5.0e8;       // Hz
    std::size_t n_tx = 6;           // antenna elements per AP
    std::size_t n_rx = 2;           // antenna elements per HMD
    double g_ap_dbi = 25.0;         // AP antenna gain, dBi
    double g_user_dbi = 15.0;       // HMD antenna gain, dBi
    double p_max_dbm = 5.0;         // per-AP transmit power budget, dBm
    double noise_dbm = -77.0;       // noise variance, dBm
    double c0 = kSpeedOfLight;
    double element_spacing = 0.5;   // antenna spacing as a fraction of wavelength

    // Linear-scale views; conversions happen here once, the rest of the
    // code works in SI units.
    double g_ap_linear() const { return db_to_linear(g_ap_dbi); }
    double g_user_linear() const { return db_to_linear(g_user_dbi); }
    double p_max_watt() const { return dbm_to_watt(p_max_dbm); }
    double noise_watt() const { return dbm_to_watt(noise_dbm); }

    void validate() const;
};

struct Geometry {
    std::vector<Point3> ap_positions;
    std::vector<Point3> user_positions;
    double phi_blocked = kPi;  // self-blockage angular width, rad

    std::size_t n_aps() const { return ap_positions.size(); }
    std::size_t n_users() const { return user_positions.size(); }
    void validate() const;
};

/// Head orientation: latitude theta in [0, pi] measured from the z-axis,
/// longitude phi in [0, 2*pi) measured from the x-axis.
struct HeadPose {
    double theta = kPi / 2.0;
    double phi = 0.0;
};

/// Rank-1 LoS MIMO gain between one AP and one user (n_tx x n_rx).
struct ChannelMatrix {
    arma::cx_mat entries;
    std::size_t ap_index = 0;
    std::size_t user_index = 0;
};

/// Beamforming vectors b[user][ap], each of length n_tx.
struct BeamSet {
    std::vector<std::vector<arma::cx_vec>> beams;

    static BeamSet zeros(std::size_t n_users, std::size_t n_aps, std::size_t n_tx);
    double ap_power(std::size_t ap) const;
};

/// LoS path gain: spreading loss times molecular absorption,
/// c0 / (4 pi f_c d) * exp(-kappa d / 2). Throws on coincident positions.
double path_gain(const Point3& ap_pos, const Point3& user_pos, const PhyConfig& cfg);

/// ULA steering vector with half-wavelength spacing:
/// element k = exp(j pi k sin(angle)), k = 0..n-1.
arma::cx_vec steering_vector(double angle, std::size_t n_elements, double spacing = 0.5);

/// Azimuth of the AP->user direction measured from the global x-axis; the
/// AP arrays are modelled as ULAs along the x-axis.
double departure_angle(const Point3& ap_pos, const Point3& user_pos);

/// Azimuth of the user->AP direction relative to the HMD facing direction;
/// the HMD array is modelled as a ULA along the facing direction.
double arrival_angle(const Point3& ap_pos, const Point3& user_pos, const HeadPose& pose);

/// sqrt(g_ap g_user) * gamma * a_ap(aod) a_user(aoa)^H, rank 1, n_tx x n_rx.
ChannelMatrix channel_matrix(std::size_t ap, std::size_t user, double aod, double aoa,
                             const Geometry& geo, const PhyConfig& cfg);

/// All (user, ap) channels for the given user poses. channels[u][a].
std::vector<std::vector<ChannelMatrix>> all_channels(const std::vector<HeadPose>& poses,
                                                     const Geometry& geo,
                                                     const PhyConfig& cfg);

/// APs outside the self-blockage region of the user: AP a is kept iff
/// |wrap(phi_u - phi_{u,a} - pi)| >= phi_blocked / 2, with the difference
/// wrapped to (-pi, pi] so "AP directly behind the user" is always blocked.
std::set<std::size_t> nonblocked_aps(const HeadPose& pose, std::size_t user,
                                     const Geometry& geo);

/// Achievable rate of one user in bits/s given the joint beams, the full
/// channel table and per-user non-blocked AP sets. The interference-plus-
/// noise covariance is inverted via a positive-definite solve.
double user_rate(std::size_t user, const BeamSet& beams,
                 const std::vector<std::vector<ChannelMatrix>>& channels,
                 const std::vector<std::set<std::size_t>>& nb_sets,
                 const PhyConfig& cfg);

/// Scale each AP's beams down to its power budget if it exceeds p_max;
/// feasible inputs pass through unchanged.
BeamSet project_power(BeamSet beams, double p_max);

}  // namespace thz360

#endif  // THZ360_PHY_HPP
