// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include <cmath>

#include "doctest.h"
#include "thz360/baselines.hpp"

using namespace thz360;

namespace {

PhyConfig small_phy(std::size_t n_tx, std::size_t n_rx) {
    PhyConfig phy;
    phy.n_tx = n_tx;
    phy.n_rx = n_rx;
    phy.bandwidth = 5e8;
    return phy;
}

ChannelMatrix rank_one(std::size_t ap, std::size_t user, double amp, const arma::cx_vec& a_tx,
                       const arma::cx_vec& a_rx) {
    ChannelMatrix cm;
    cm.ap_index = ap;
    cm.user_index = user;
    cm.entries = amp * (a_tx * a_rx.t());
    return cm;
}

}  // namespace

TEST_CASE("single-user WMMSE reaches the closed-form rank-one optimum") {
    PhyConfig phy = small_phy(4, 2);
    Geometry geo;
    geo.ap_positions = {{5, 5, 4}};
    geo.user_positions = {{2, 3, 1.6}};
    geo.phi_blocked = 0.0;
    auto channels = all_channels({HeadPose{kPi / 2, 0.4}}, geo, phy);
    std::vector<std::set<std::size_t>> nb = {{0}};

    WmmseConfig cfg;
    WmmseResult res = wmmse_beamforming(channels, nb, cfg, phy);

    // optimum: matched filter at full power
    const double amp = std::abs(channels[0][0].entries(0, 0));
    const double sinr = amp * amp * static_cast<double>(phy.n_tx) *
                        static_cast<double>(phy.n_rx) * phy.p_max_watt() / phy.noise_watt();
    const double want = phy.bandwidth * std::log2(1.0 + sinr);
    CHECK(std::abs(res.weighted_sum_rate - want) / want < 1e-3);

    const double got = user_rate(0, res.beams, channels, nb, phy);
    CHECK(std::abs(got - want) / want < 1e-3);
}

TEST_CASE("zero channels give zero beams") {
    PhyConfig phy = small_phy(3, 2);
    std::vector<std::vector<ChannelMatrix>> channels(1);
    ChannelMatrix cm;
    cm.entries = arma::cx_mat(3, 2, arma::fill::zeros);
    channels[0].push_back(cm);
    std::vector<std::set<std::size_t>> nb = {{0}};
    WmmseResult res = wmmse_beamforming(channels, nb, WmmseConfig{}, phy);
    CHECK(res.beams.ap_power(0) == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("orthogonal rank-one channels are served without interference") {
    PhyConfig phy = small_phy(2, 2);
    const arma::cx_vec tx1 = steering_vector(0.0, 2);        // (1, 1)
    const arma::cx_vec tx2 = steering_vector(kPi / 2.0, 2);  // (1, -1)
    const arma::cx_vec rx1 = steering_vector(0.3, 2);
    const arma::cx_vec rx2 = steering_vector(-0.9, 2);
    const double amp = 1e-4;
    std::vector<std::vector<ChannelMatrix>> channels = {
        {rank_one(0, 0, amp, tx1, rx1)},
        {rank_one(0, 1, amp, tx2, rx2)},
    };
    std::vector<std::set<std::size_t>> nb = {{0}, {0}};
    WmmseResult res = wmmse_beamforming(channels, nb, WmmseConfig{}, phy);

    for (std::size_t u = 0; u < 2; ++u) {
        const arma::cx_mat h_u = channels[u][0].entries.t();  // N_r x N_t
        const arma::cx_vec sig = h_u * res.beams.beams[u][0];
        const arma::cx_vec leak = h_u * res.beams.beams[1 - u][0];
        const double sig_p = std::real(arma::cdot(sig, sig));
        const double leak_p = std::real(arma::cdot(leak, leak));
        REQUIRE(sig_p > 0.0);
        CHECK(leak_p / sig_p < 1e-6);
    }
}

TEST_CASE("WMMSE is monotone and power-feasible on random instances") {
    PhyConfig phy = small_phy(4, 2);
    Geometry geo;
    geo.ap_positions = {{9, 1, 4}, {1, 9, 4}};
    geo.user_positions = {{3, 3, 1.6}, {7, 6, 1.6}};
    geo.phi_blocked = 0.0;

    Rng rng(21);
    std::uniform_real_distribution<double> uphi(0.0, kTwoPi);
    for (int trial = 0; trial < 20; ++trial) {
        auto channels =
            all_channels({HeadPose{kPi / 2, uphi(rng)}, HeadPose{kPi / 2, uphi(rng)}}, geo, phy);
        std::vector<std::set<std::size_t>> nb = {{0, 1}, {0, 1}};
        WmmseConfig cfg;
        cfg.max_iterations = 25;
        WmmseResult res = wmmse_beamforming(channels, nb, cfg, phy);

        for (std::size_t i = 1; i < res.rate_trace.size(); ++i)
            CHECK(res.rate_trace[i] >= res.rate_trace[i - 1] - 1e-9 * res.rate_trace[i - 1]);
        for (std::size_t a = 0; a < 2; ++a)
            CHECK(res.beams.ap_power(a) <= phy.p_max_watt() * (1.0 + 1e-12));
    }
}

TEST_CASE("priority bitrate splits the budget by region") {
    VideoConfig vc;  // {28, 33, 38, 43, 48} Mbps, 1 s chunks
    TilePrediction tiles;
    tiles.view_sets = {{0, 1, 2, 4, 5, 6}};
    tiles.pred_set = {0, 1, 2, 4, 5, 6, 3, 7, 8};  // 6 viewport + 3 marginal

    SUBCASE("unlimited budget sends everything at the top level") {
        QualitySelection sel = priority_bitrate(tiles, 1e12, vc);
        for (std::size_t n : tiles.pred_set) CHECK(sel.levels[n] == 5);
        CHECK(sel.levels[9] == 0);
    }
    SUBCASE("zero budget falls back to the lowest level") {
        QualitySelection sel = priority_bitrate(tiles, 0.0, vc);
        for (std::size_t n : tiles.pred_set) CHECK(sel.levels[n] == 1);
    }
    SUBCASE("a budget that exactly fits viewport level 3 and marginal level 1") {
        const double budget_bps = 6 * 38e6 + 3 * 28e6;
        QualitySelection sel = priority_bitrate(tiles, budget_bps, vc);
        for (std::size_t n : tiles.view_sets[0]) CHECK(sel.levels[n] == 3);
        CHECK(sel.levels[3] == 1);
        CHECK(sel.levels[7] == 1);
        CHECK(sel.levels[8] == 1);
    }
    SUBCASE("marginal tiles never outrank the viewport") {
        Rng rng(5);
        std::uniform_real_distribution<double> u(0.0, 4.0e8);
        for (int trial = 0; trial < 200; ++trial) {
            QualitySelection sel = priority_bitrate(tiles, u(rng), vc);
            int min_view = 99;
            for (std::size_t n : tiles.view_sets[0])
                min_view = std::min(min_view, sel.levels[n]);
            for (std::size_t n : tiles.pred_set)
                if (!tiles.view_sets[0].count(n)) CHECK(sel.levels[n] <= min_view);
        }
    }
}

TEST_CASE("throughput estimate") {
    CHECK(throughput_estimate(1e8, 10, 0.1) == doctest::Approx(1e8));
    CHECK(throughput_estimate(1e8, 20, 0.1) == doctest::Approx(5e7));
    CHECK_THROWS_AS(throughput_estimate(1e8, 0, 0.1), std::invalid_argument);
}

TEST_CASE("reactive blockage lags the truth by the detection delay") {
    std::vector<std::set<std::size_t>> before = {{0, 1}};
    std::vector<std::set<std::size_t>> after = {{1}};

    SUBCASE("zero delay tracks exactly") {
        ReactiveBlockage rb(0);
        rb.observe(before);
        CHECK(rb.believed() == before);
        rb.observe(after);
        CHECK(rb.believed() == after);
    }
    SUBCASE("a step change at slot 10 is believed at slot 13") {
        ReactiveBlockage rb(3);  // 300 ms at 100 ms slots
        for (int t = 1; t <= 20; ++t) {
            rb.observe(t < 10 ? before : after);
            const auto& b = rb.believed();
            if (t < 13)
                CHECK(b == before);
            else
                CHECK(b == after);
        }
    }
}
