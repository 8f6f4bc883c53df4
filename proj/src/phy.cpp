// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/phy.hpp"

namespace thz360 {

void PhyConfig::validate() const {
    if (f_c <= 0.0) throw std::invalid_argument("PhyConfig: carrier frequency must be positive");
    if (kappa < 0.0) throw std::invalid_argument("PhyConfig: absorption coefficient must be non-negative");
    if (bandwidth <= 0.0) throw std::invalid_argument("PhyConfig: bandwidth must be positive");
    if (n_tx < 1 || n_rx < 1) throw std::invalid_argument("PhyConfig: antenna counts must be >= 1");
    if (noise_watt() <= 0.0) throw std::invalid_argument("PhyConfig: noise power must be positive");
}

void Geometry::validate() const {
    if (ap_positions.empty()) throw std::invalid_argument("Geometry: no APs");
    if (phi_blocked < 0.0 || phi_blocked > kTwoPi)
        throw std::invalid_argument("Geometry: phi_blocked outside [0, 2*pi]");
    for (const auto& ap : ap_positions)
        if (ap.z <= 0.0) throw std::invalid_argument("Geometry: AP height must be positive");
    for (const auto& u : user_positions) {
        if (u.z <= 0.0) throw std::invalid_argument("Geometry: user height must be positive");
        for (const auto& ap : ap_positions)
            if (ap.z < u.z) throw std::invalid_argument("Geometry: AP below user height");
    }
}

BeamSet BeamSet::zeros(std::size_t n_users, std::size_t n_aps, std::size_t n_tx) {
    BeamSet bs;
    bs.beams.assign(n_users, std::vector<arma::cx_vec>(n_aps, arma::cx_vec(n_tx, arma::fill::zeros)));
    return bs;
}

double BeamSet::ap_power(std::size_t ap) const {
    double p = 0.0;
    for (const auto& per_user : beams) {
        const arma::cx_vec& b = per_user.at(ap);
        p += std::real(arma::cdot(b, b));
    }
    return p;
}

double path_gain(const Point3& ap_pos, const Point3& user_pos, const PhyConfig& cfg) {
    const double d = distance(ap_pos, user_pos);
    if (d <= 0.0) throw std::domain_error("path_gain: coincident AP and user positions");
    const double spreading = cfg.c0 / (4.0 * kPi * cfg.f_c * d);
    return spreading * std::exp(-0.5 * cfg.kappa * d);
}

arma::cx_vec steering_vector(double angle, std::size_t n_elements, double spacing) {
    if (n_elements < 1) throw std::invalid_argument("steering_vector: n_elements must be >= 1");
    arma::cx_vec a(n_elements);
    const double phase_step = kTwoPi * spacing * std::sin(angle);
    for (std::size_t k = 0; k < n_elements; ++k)
        a(k) = std::polar(1.0, phase_step * static_cast<double>(k));
    return a;
}

double departure_angle(const Point3& ap_pos, const Point3& user_pos) {
    return std::atan2(user_pos.y - ap_pos.y, user_pos.x - ap_pos.x);
}

double arrival_angle(const Point3& ap_pos, const Point3& user_pos, const HeadPose& pose) {
    const double az = std::atan2(ap_pos.y - user_pos.y, ap_pos.x - user_pos.x);
    return wrap_pi(az - pose.phi);
}

ChannelMatrix channel_matrix(std::size_t ap, std::size_t user, double aod, double aoa,
                             const Geometry& geo, const PhyConfig& cfg) {
    if (ap >= geo.n_aps() || user >= geo.n_users())
        throw std::invalid_argument("channel_matrix: index out of range");
    const double gamma = path_gain(geo.ap_positions[ap], geo.user_positions[user], cfg);
    const double amp = std::sqrt(cfg.g_ap_linear() * cfg.g_user_linear()) * gamma;
    const arma::cx_vec a_ap = steering_vector(aod, cfg.n_tx, cfg.element_spacing);
    const arma::cx_vec a_user = steering_vector(aoa, cfg.n_rx, cfg.element_spacing);
    ChannelMatrix cm;
    cm.entries = amp * (a_ap * a_user.t());  // .t() is the conjugate transpose for cx types
    cm.ap_index = ap;
    cm.user_index = user;
    return cm;
}

std::vector<std::vector<ChannelMatrix>> all_channels(const std::vector<HeadPose>& poses,
                                                     const Geometry& geo,
                                                     const PhyConfig& cfg) {
    if (poses.size() != geo.n_users())
        throw std::invalid_argument("all_channels: pose count does not match user count");
    std::vector<std::vector<ChannelMatrix>> out(geo.n_users());
    for (std::size_t u = 0; u < geo.n_users(); ++u) {
        out[u].reserve(geo.n_aps());
        for (std::size_t a = 0; a < geo.n_aps(); ++a) {
            const double aod = departure_angle(geo.ap_positions[a], geo.user_positions[u]);
            const double aoa = arrival_angle(geo.ap_positions[a], geo.user_positions[u], poses[u]);
            out[u].push_back(channel_matrix(a, u, aod, aoa, geo, cfg));
        }
    }
    return out;
}

std::set<std::size_t> nonblocked_aps(const HeadPose& pose, std::size_t user,
                                     const Geometry& geo) {
    if (user >= geo.n_users()) throw std::invalid_argument("nonblocked_aps: user index out of range");
    std::set<std::size_t> keep;
    const Point3& lu = geo.user_positions[user];
    for (std::size_t a = 0; a < geo.n_aps(); ++a) {
        const Point3& la = geo.ap_positions[a];
        const double phi_ua = wrap_two_pi(std::atan2(la.y - lu.y, la.x - lu.x));
        const double diff = wrap_pi(pose.phi - phi_ua - kPi);
        if (std::abs(diff) >= 0.5 * geo.phi_blocked) keep.insert(a);
    }
    return keep;
}

double user_rate(std::size_t user, const BeamSet& beams,
                 const std::vector<std::vector<ChannelMatrix>>& channels,
                 const std::vector<std::set<std::size_t>>& nb_sets,
                 const PhyConfig& cfg) {
    const std::size_t n_users = channels.size();
    if (user >= n_users) throw std::invalid_argument("user_rate: user index out of range");
    const std::size_t n_rx = cfg.n_rx;
    const auto& nb_u = nb_sets.at(user);

    // d_{u,u'} = sum over APs serving u' and visible to u of G_{u,a}^H b_{u',a}
    auto effective = [&](std::size_t other) {
        arma::cx_vec d(n_rx, arma::fill::zeros);
        for (std::size_t a : nb_sets.at(other)) {
            if (!nb_u.count(a)) continue;
            d += channels[user][a].entries.t() * beams.beams[other][a];
        }
        return d;
    };

    const arma::cx_vec d_own = effective(user);
    arma::cx_mat gamma(n_rx, n_rx, arma::fill::eye);
    gamma *= cfg.noise_watt();
    for (std::size_t v = 0; v < n_users; ++v) {
        if (v == user) continue;
        const arma::cx_vec d = effective(v);
        gamma += d * d.t();
    }
    const arma::cx_vec sol = arma::solve(gamma, d_own, arma::solve_opts::likely_sympd);
    const double sinr = std::real(arma::cdot(d_own, sol));
    return cfg.bandwidth * std::log2(1.0 + std::max(0.0, sinr));
}

BeamSet project_power(BeamSet beams, double p_max) {
    if (beams.beams.empty()) return beams;
    const std::size_t n_aps = beams.beams.front().size();
    for (std::size_t a = 0; a < n_aps; ++a) {
        const double p = beams.ap_power(a);
        if (p > p_max && p > 0.0) {
            const double scale = std::sqrt(p_max / p);
            for (auto& per_user : beams.beams) per_user[a] *= scale;
        }
    }
    return beams;
}

}  // namespace thz360
