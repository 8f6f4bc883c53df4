// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include <armadillo>
#include <cmath>
#include <random>

#include "doctest.h"
#include "thz360/phy.hpp"

using namespace thz360;

namespace {

PhyConfig paper_phy() {
    PhyConfig cfg;
    cfg.f_c = 1.05e12;
    cfg.kappa = 0.07512;
    cfg.bandwidth = 5e8;
    cfg.n_tx = 6;
    cfg.n_rx = 2;
    cfg.g_ap_dbi = 25.0;
    cfg.g_user_dbi = 15.0;
    cfg.p_max_dbm = 5.0;
    cfg.noise_dbm = -77.0;
    return cfg;
}

Geometry fig2_geometry() {
    Geometry geo;
    geo.ap_positions = {{9, 1, 4}, {5, 5, 4}, {1, 9, 4}};
    geo.user_positions = {{3, 3, 1.6}};
    geo.phi_blocked = kPi;
    return geo;
}

// closed-form gain at extended precision
long double path_gain_oracle(long double d, long double f_c, long double kappa) {
    const long double c0 = 299792458.0L;
    const long double pi = 3.14159265358979323846264338327950288L;
    return c0 / (4.0L * pi * f_c * d) * expl(-0.5L * kappa * d);
}

// explicit 2x2 complex inverse, independent of the solver used in user_rate
arma::cx_mat22 inverse_2x2(const arma::cx_mat& g) {
    const arma::cx_double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    arma::cx_mat22 inv;
    inv(0, 0) = g(1, 1) / det;
    inv(0, 1) = -g(0, 1) / det;
    inv(1, 0) = -g(1, 0) / det;
    inv(1, 1) = g(0, 0) / det;
    return inv;
}

}  // namespace

TEST_CASE("path gain matches extended-precision closed form") {
    PhyConfig cfg = paper_phy();
    const double got = path_gain({0, 0, 1}, {0, 0, 2}, cfg);  // d = 1
    const double want = static_cast<double>(path_gain_oracle(1.0L, 1.05e12L, 0.07512L));
    CHECK(std::abs(got - want) / want < 1e-12);
}

TEST_CASE("path gain with zero absorption is pure spreading loss") {
    PhyConfig cfg = paper_phy();
    cfg.kappa = 0.0;
    const double d = 3.7;
    const double got = path_gain({0, 0, 1}, {0, 0, 1 + d}, cfg);
    CHECK(got == doctest::Approx(cfg.c0 / (4.0 * kPi * cfg.f_c * d)).epsilon(1e-14));
    // inverse-distance law: doubling d halves the gain
    const double twice = path_gain({0, 0, 1}, {0, 0, 1 + 2 * d}, cfg);
    CHECK(twice == doctest::Approx(0.5 * got).epsilon(1e-14));
}

TEST_CASE("path gain is strictly decreasing in distance") {
    PhyConfig cfg = paper_phy();
    double prev = path_gain({0, 0, 1}, {0.5, 0, 1}, cfg);
    for (double d = 1.0; d < 20.0; d += 0.5) {
        const double g = path_gain({0, 0, 1}, {d, 0, 1}, cfg);
        CHECK(g < prev);
        prev = g;
    }
    CHECK_THROWS_AS(path_gain({1, 2, 3}, {1, 2, 3}, cfg), std::domain_error);
}

TEST_CASE("steering vector basics") {
    auto a0 = steering_vector(0.0, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(a0(k).real() == doctest::Approx(1.0));
        CHECK(a0(k).imag() == doctest::Approx(0.0));
    }
    auto a1 = steering_vector(1.234, 1);
    CHECK(a1.n_elem == 1);
    CHECK(a1(0) == arma::cx_double(1.0, 0.0));
    auto a2 = steering_vector(kPi / 2.0, 2);
    CHECK(a2(1).real() == doctest::Approx(-1.0));
    CHECK(std::abs(a2(1).imag()) < 1e-12);
    // unit modulus everywhere
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int i = 0; i < 20; ++i) {
        auto a = steering_vector(ang(rng), 6);
        for (std::size_t k = 0; k < a.n_elem; ++k)
            CHECK(std::abs(a(k)) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("channel matrix is rank one with the expected norm") {
    PhyConfig cfg = paper_phy();
    Geometry geo = fig2_geometry();
    const double aod = 0.4, aoa = -1.1;
    ChannelMatrix cm = channel_matrix(0, 0, aod, aoa, geo, cfg);
    const double gamma = path_gain(geo.ap_positions[0], geo.user_positions[0], cfg);
    const double amp = std::sqrt(cfg.g_ap_linear() * cfg.g_user_linear()) * gamma;

    CHECK(cm.entries.n_rows == 6);
    CHECK(cm.entries.n_cols == 2);
    CHECK(arma::norm(cm.entries, "fro") ==
          doctest::Approx(amp * std::sqrt(6.0 * 2.0)).epsilon(1e-12));

    arma::vec sv = arma::svd(cm.entries);
    CHECK(sv(0) == doctest::Approx(amp * std::sqrt(12.0)).epsilon(1e-10));
    for (std::size_t i = 1; i < sv.n_elem; ++i) CHECK(sv(i) < 1e-12 * sv(0));
}

TEST_CASE("channel matrix reduces to a scalar for single antennas") {
    PhyConfig cfg = paper_phy();
    cfg.n_tx = 1;
    cfg.n_rx = 1;
    Geometry geo = fig2_geometry();
    ChannelMatrix cm = channel_matrix(1, 0, 0.3, 0.9, geo, cfg);
    const double gamma = path_gain(geo.ap_positions[1], geo.user_positions[0], cfg);
    CHECK(std::abs(cm.entries(0, 0)) ==
          doctest::Approx(std::sqrt(cfg.g_ap_linear() * cfg.g_user_linear()) * gamma)
              .epsilon(1e-12));
}

TEST_CASE("self-blockage set") {
    Geometry geo = fig2_geometry();

    SUBCASE("zero blockage keeps every AP") {
        geo.phi_blocked = 0.0;
        auto nb = nonblocked_aps(HeadPose{kPi / 2, 1.0}, 0, geo);
        CHECK(nb.size() == 3);
    }

    SUBCASE("facing directly away from an AP blocks it") {
        const double phi_ua = std::atan2(5.0 - 3.0, 5.0 - 3.0);
        auto nb = nonblocked_aps(HeadPose{kPi / 2, wrap_two_pi(phi_ua + kPi)}, 0, geo);
        CHECK(nb.count(1) == 0);
    }

    SUBCASE("flanking APs in the front half survive") {
        // Needs a non-collinear AP layout: with all APs on one line the
        // middle AP's direction always sits between the flanking ones.
        Geometry corner;
        corner.ap_positions = {{9, 1, 4}, {9, 9, 4}, {1, 9, 4}};
        corner.user_positions = {{7, 7, 1.6}};
        corner.phi_blocked = kPi;
        const double away = wrap_two_pi(std::atan2(9.0 - 7.0, 9.0 - 7.0) + kPi);
        auto nb = nonblocked_aps(HeadPose{kPi / 2, away}, 0, corner);
        CHECK(nb.count(0) == 1);
        CHECK(nb.count(1) == 0);
        CHECK(nb.count(2) == 1);
    }

    SUBCASE("invariant to adding 2*pi to the facing angle") {
        for (double phi = 0.0; phi < kTwoPi; phi += 0.37) {
            auto a = nonblocked_aps(HeadPose{kPi / 2, phi}, 0, geo);
            auto b = nonblocked_aps(HeadPose{kPi / 2, phi + kTwoPi}, 0, geo);
            CHECK(a == b);
        }
    }

    SUBCASE("exhaustive sweep matches the closed-form predicate") {
        const Point3 lu = geo.user_positions[0];
        for (int step = 0; step < 3600; ++step) {
            const double phi_u = step * kTwoPi / 3600.0;
            auto nb = nonblocked_aps(HeadPose{kPi / 2, phi_u}, 0, geo);
            for (std::size_t a = 0; a < geo.n_aps(); ++a) {
                const Point3 la = geo.ap_positions[a];
                const double phi_ua =
                    wrap_two_pi(std::atan2(la.y - lu.y, la.x - lu.x));
                const bool expect_nb =
                    std::abs(wrap_pi(phi_u - phi_ua - kPi)) >= geo.phi_blocked / 2.0;
                CHECK(nb.count(a) == (expect_nb ? 1u : 0u));
            }
        }
    }
}

TEST_CASE("user rate reduces to SISO Shannon capacity") {
    PhyConfig cfg = paper_phy();
    cfg.n_tx = 1;
    cfg.n_rx = 1;
    Geometry geo;
    geo.ap_positions = {{0, 0, 3}};
    geo.user_positions = {{2, 0, 1.5}};
    geo.phi_blocked = 0.0;
    auto channels = all_channels({HeadPose{}}, geo, cfg);
    const double g = std::abs(channels[0][0].entries(0, 0));

    const double p = 1e-3;
    BeamSet beams = BeamSet::zeros(1, 1, 1);
    beams.beams[0][0](0) = std::sqrt(p);
    std::vector<std::set<std::size_t>> nb = {{0}};

    const double rate = user_rate(0, beams, channels, nb, cfg);
    const double want = cfg.bandwidth * std::log2(1.0 + g * g * p / cfg.noise_watt());
    CHECK(std::abs(rate - want) / want < 1e-9);

    // zero beam gives zero rate
    BeamSet zero = BeamSet::zeros(1, 1, 1);
    CHECK(user_rate(0, zero, channels, nb, cfg) == 0.0);
}

TEST_CASE("two-user rate matches an explicit dense-inverse oracle") {
    PhyConfig cfg = paper_phy();
    cfg.n_tx = 4;
    cfg.n_rx = 2;
    Geometry geo;
    geo.ap_positions = {{9, 1, 4}, {1, 9, 4}};
    geo.user_positions = {{3, 3, 1.6}, {7, 6, 1.6}};
    geo.phi_blocked = 0.0;

    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<HeadPose> poses = {{kPi / 2, wrap_two_pi(u(rng) * kPi)},
                                       {kPi / 2, wrap_two_pi(u(rng) * kPi)}};
        auto channels = all_channels(poses, geo, cfg);
        BeamSet beams = BeamSet::zeros(2, 2, cfg.n_tx);
        for (std::size_t us = 0; us < 2; ++us)
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t k = 0; k < cfg.n_tx; ++k)
                    beams.beams[us][a](k) = arma::cx_double(u(rng), u(rng)) * 0.01;
        beams = project_power(beams, cfg.p_max_watt());
        std::vector<std::set<std::size_t>> nb = {{0, 1}, {0, 1}};

        for (std::size_t us = 0; us < 2; ++us) {
            const double rate = user_rate(us, beams, channels, nb, cfg);

            auto eff = [&](std::size_t other) {
                arma::cx_vec d(cfg.n_rx, arma::fill::zeros);
                for (std::size_t a = 0; a < 2; ++a)
                    d += channels[us][a].entries.t() * beams.beams[other][a];
                return d;
            };
            const arma::cx_vec d_own = eff(us);
            const arma::cx_vec d_int = eff(1 - us);
            arma::cx_mat gam = d_int * d_int.t();
            gam(0, 0) += cfg.noise_watt();
            gam(1, 1) += cfg.noise_watt();
            const arma::cx_mat22 inv = inverse_2x2(gam);
            const double sinr = std::real(arma::cdot(d_own, inv * d_own));
            const double want = cfg.bandwidth * std::log2(1.0 + sinr);
            CHECK(std::abs(rate - want) / std::max(want, 1e-300) < 1e-6);
        }
    }
}

TEST_CASE("rate is invariant under a common receive-side unitary rotation") {
    PhyConfig cfg = paper_phy();
    cfg.n_tx = 3;
    cfg.n_rx = 2;
    Geometry geo;
    geo.ap_positions = {{9, 1, 4}, {1, 9, 4}};
    geo.user_positions = {{3, 3, 1.6}, {7, 6, 1.6}};
    geo.phi_blocked = 0.0;
    auto channels = all_channels({HeadPose{kPi / 2, 0.5}, HeadPose{kPi / 2, 2.5}}, geo, cfg);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BeamSet beams = BeamSet::zeros(2, 2, cfg.n_tx);
    for (auto& per_user : beams.beams)
        for (auto& b : per_user)
            for (std::size_t k = 0; k < cfg.n_tx; ++k)
                b(k) = arma::cx_double(u(rng), u(rng)) * 0.02;

    arma::cx_mat q_raw(2, 2);
    for (auto& v : q_raw) v = arma::cx_double(u(rng), u(rng));
    arma::cx_mat q, rmat;
    arma::qr(q, rmat, q_raw);

    auto rotated = channels;
    for (auto& per_user : rotated)
        for (auto& cm : per_user) cm.entries = cm.entries * q.t();

    std::vector<std::set<std::size_t>> nb = {{0, 1}, {0, 1}};
    for (std::size_t us = 0; us < 2; ++us) {
        const double r0 = user_rate(us, beams, channels, nb, cfg);
        const double r1 = user_rate(us, beams, rotated, nb, cfg);
        CHECK(r1 == doctest::Approx(r0).epsilon(1e-9));
    }
}

TEST_CASE("rate is monotone in own beam power with interference fixed") {
    PhyConfig cfg = paper_phy();
    cfg.n_tx = 3;
    cfg.n_rx = 2;
    Geometry geo;
    geo.ap_positions = {{9, 1, 4}, {1, 9, 4}};
    geo.user_positions = {{3, 3, 1.6}, {7, 6, 1.6}};
    geo.phi_blocked = 0.0;
    auto channels = all_channels({HeadPose{kPi / 2, 0.1}, HeadPose{kPi / 2, 4.0}}, geo, cfg);
    std::vector<std::set<std::size_t>> nb = {{0, 1}, {0, 1}};

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BeamSet beams = BeamSet::zeros(2, 2, cfg.n_tx);
    for (auto& per_user : beams.beams)
        for (auto& b : per_user)
            for (std::size_t k = 0; k < cfg.n_tx; ++k)
                b(k) = arma::cx_double(u(rng), u(rng)) * 0.01;

    double prev = user_rate(0, beams, channels, nb, cfg);
    for (double scale : {1.3, 1.9, 3.0}) {
        BeamSet scaled = beams;
        for (auto& b : scaled.beams[0]) b *= scale;
        const double r = user_rate(0, scaled, channels, nb, cfg);
        CHECK(r >= prev);
        prev = r;
    }
}

TEST_CASE("single-user rate agrees with an eigendecomposition oracle") {
    PhyConfig cfg = paper_phy();
    Geometry geo;
    geo.ap_positions = {{9, 1, 4}, {5, 5, 4}};
    geo.user_positions = {{3, 3, 1.6}};
    geo.phi_blocked = 0.0;
    auto channels = all_channels({HeadPose{kPi / 2, 0.7}}, geo, cfg);
    std::vector<std::set<std::size_t>> nb = {{0, 1}};

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        BeamSet beams = BeamSet::zeros(1, 2, cfg.n_tx);
        for (auto& b : beams.beams[0])
            for (std::size_t k = 0; k < cfg.n_tx; ++k)
                b(k) = arma::cx_double(u(rng), u(rng)) * 0.02;

        arma::cx_vec d(cfg.n_rx, arma::fill::zeros);
        for (std::size_t a = 0; a < 2; ++a)
            d += channels[0][a].entries.t() * beams.beams[0][a];
        arma::cx_mat outer = d * d.t() / cfg.noise_watt();
        arma::vec eig = arma::eig_sym(outer);
        double want = 0.0;
        for (double lam : eig) want += std::log2(1.0 + std::max(0.0, lam));
        want *= cfg.bandwidth;

        const double rate = user_rate(0, beams, channels, nb, cfg);
        CHECK(std::abs(rate - want) / std::max(want, 1.0) < 1e-6);
    }
}

TEST_CASE("power projection enforces the per-AP budget") {
    const double p_max = dbm_to_watt(5.0);
    CHECK(p_max == doctest::Approx(3.162277660168379e-3).epsilon(1e-12));

    BeamSet beams = BeamSet::zeros(2, 2, 3);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& per_user : beams.beams)
        for (auto& b : per_user)
            for (std::size_t k = 0; k < 3; ++k) b(k) = arma::cx_double(u(rng), u(rng));

    BeamSet proj = project_power(beams, p_max);
    for (std::size_t a = 0; a < 2; ++a) CHECK(proj.ap_power(a) <= p_max + 1e-12);

    // feasible inputs pass through untouched
    BeamSet small = BeamSet::zeros(1, 1, 2);
    small.beams[0][0](0) = 1e-4;
    BeamSet same = project_power(small, p_max);
    CHECK(same.beams[0][0](0) == small.beams[0][0](0));

    // a single beam at twice the budget lands exactly on the budget
    BeamSet big = BeamSet::zeros(1, 1, 1);
    big.beams[0][0](0) = std::sqrt(2.0 * p_max);
    BeamSet clipped = project_power(big, p_max);
    CHECK(clipped.ap_power(0) == doctest::Approx(p_max).epsilon(1e-12));
}
