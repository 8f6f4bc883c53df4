// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include <cmath>
#include <random>

#include "doctest.h"
#include "thz360/streaming.hpp"

using namespace thz360;

namespace {

VideoConfig paper_video() { return VideoConfig{}; }  // defaults follow the simulation setup

QualitySelection selection_of(const VideoConfig& vc, std::initializer_list<std::pair<int, int>> assignments) {
    QualitySelection sel;
    sel.levels.assign(vc.n_tiles(), 0);
    for (auto [tile, lvl] : assignments) sel.levels[static_cast<std::size_t>(tile)] = lvl;
    return sel;
}

}  // namespace

TEST_CASE("chunk size accounting") {
    VideoConfig vc = paper_video();
    QualitySelection none;
    none.levels.assign(vc.n_tiles(), 0);
    CHECK(chunk_size_bits(none, vc) == 0.0);

    // one tile at 28 Mbps over a 1 s chunk
    QualitySelection one = selection_of(vc, {{0, 1}});
    CHECK(chunk_size_bits(one, vc) == doctest::Approx(2.8e7).epsilon(1e-12));

    QualitySelection two = selection_of(vc, {{0, 2}, {5, 5}});
    CHECK(chunk_size_bits(two, vc) == doctest::Approx((33e6 + 48e6) * 1.0).epsilon(1e-12));
}

TEST_CASE("transmission delay") {
    const double ts = 0.1;
    SUBCASE("zero bits complete in the request slot") {
        CHECK(transmission_delay({1e6, 1e6}, 0.0, ts).value() == 1);
    }
    SUBCASE("2.5 slot-loads take 3 slots") {
        const double r = 4e6;
        std::vector<double> rates(10, r);
        CHECK(transmission_delay(rates, 2.5 * ts * r, ts).value() == 3);
    }
    SUBCASE("exactly one slot-load takes 1 slot") {
        const double r = 4e6;
        std::vector<double> rates(10, r);
        CHECK(transmission_delay(rates, ts * r, ts).value() == 1);
    }
    SUBCASE("unreachable totals report no completion") {
        CHECK(!transmission_delay({1.0, 1.0}, 1e9, ts).has_value());
        CHECK(!transmission_delay({}, 1.0, ts).has_value());
    }
    SUBCASE("non-increasing in any per-slot rate") {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(1e5, 1e7);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> rates(30);
            for (double& r : rates) r = u(rng);
            const double bits = u(rng) * 10.0;
            const auto base = transmission_delay(rates, bits, ts);
            std::vector<double> boosted = rates;
            boosted[static_cast<std::size_t>(trial) % boosted.size()] *= 2.0;
            const auto faster = transmission_delay(boosted, bits, ts);
            if (base.has_value()) {
                REQUIRE(faster.has_value());
                CHECK(*faster <= *base);
            }
        }
    }
}

TEST_CASE("waiting time follows the buffer recurrence") {
    VideoConfig vc = paper_video();  // chunk_slots = 10
    UserStreamState st;
    st.buffer_threshold = 30;

    st.buffer_slots = 0;
    CHECK(waiting_time(st, 4, vc) == 0);

    st.buffer_slots = 30;
    CHECK(waiting_time(st, 1, vc) == 9);  // [29 + 10 - 30]^+

    // threshold so large it never binds
    st.buffer_threshold = 100;
    st.buffer_slots = 25;
    CHECK(waiting_time(st, 2, vc) == 0);
}

TEST_CASE("request advance updates buffer and timing") {
    VideoConfig vc = paper_video();
    UserStreamState st;
    st.buffer_threshold = 30;
    st.buffer_slots = 0;
    st.t_req = 1;

    UserStreamState nx = advance_request(st, 4, 0, vc);
    CHECK(nx.t_req == 5);
    CHECK(nx.buffer_slots == 10);
    CHECK(nx.chunk_index == 2);

    st.buffer_slots = 30;
    nx = advance_request(st, 1, 9, vc);
    CHECK(nx.buffer_slots == 30);  // [29 + 10 - 9]^+

    // the waiting rule keeps the buffer at or below the threshold
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> td_dist(1, 40);
    UserStreamState cur;
    cur.buffer_threshold = 30;
    for (int i = 0; i < 500; ++i) {
        const int td = td_dist(rng);
        const int wt = waiting_time(cur, td, vc);
        cur = advance_request(cur, td, wt, vc);
        CHECK(cur.buffer_slots <= cur.buffer_threshold);
    }
}

TEST_CASE("rebuffering delay") {
    CHECK(rebuffering_delay(3, 10) == 0);
    CHECK(rebuffering_delay(12, 10) == 2);
    for (int k = 0; k < 5; ++k) CHECK(rebuffering_delay(k + 1, 0) == k + 1);
}

TEST_CASE("bitrate rounding") {
    VideoConfig vc = paper_video();
    CHECK(round_bitrate(33e6, vc) == 2);
    CHECK(round_bitrate(48e6, vc) == 5);
    CHECK(round_bitrate(30e6, vc) == 1);
    CHECK(round_bitrate(1.0, vc) == 1);     // clamps up to the floor
    CHECK(round_bitrate(9e9, vc) == 5);     // clamps down to the ceiling
    for (std::size_t m = 0; m < vc.n_levels(); ++m)
        CHECK(round_bitrate(vc.quality_bitrates[m], vc) == static_cast<int>(m) + 1);
}

TEST_CASE("chunk QoE") {
    VideoConfig vc = paper_video();
    QoEConfig qc;  // 0.5 everywhere

    SUBCASE("uniform quality, no switches, no stall") {
        QualitySelection sel = selection_of(vc, {{0, 3}, {1, 3}, {2, 3}});
        QoEReport rep = qoe_chunk(sel, {0, 1, 2}, std::nullopt, 0, qc);
        CHECK(rep.avg_view_quality == 3.0);
        CHECK(rep.spatial_var == 0.0);
        CHECK(rep.temporal_switch == 0.0);
        CHECK(rep.qoe == 3.0);
    }

    SUBCASE("two tiles at levels 2 and 4") {
        QualitySelection sel = selection_of(vc, {{0, 2}, {1, 4}});
        QoEReport rep = qoe_chunk(sel, {0, 1}, std::nullopt, 0, qc);
        CHECK(rep.avg_view_quality == 3.0);
        CHECK(rep.spatial_var == 1.0);
        CHECK(rep.qoe == doctest::Approx(3.0 - 0.5).epsilon(1e-15));
    }

    SUBCASE("missed tiles count as level zero") {
        QualitySelection sel = selection_of(vc, {{0, 4}});
        QoEReport rep = qoe_chunk(sel, {0, 1}, std::nullopt, 0, qc);
        CHECK(rep.avg_view_quality == 2.0);
        CHECK(rep.spatial_var == 4.0);
    }

    SUBCASE("temporal switch and rebuffering penalties") {
        QualitySelection sel = selection_of(vc, {{0, 4}, {1, 4}});
        QoEReport rep = qoe_chunk(sel, {0, 1}, 2.0, 3, qc);
        CHECK(rep.temporal_switch == 2.0);
        CHECK(rep.qoe == doctest::Approx(4.0 - 0.5 * 2.0 - 0.5 * 3.0).epsilon(1e-15));
    }

    SUBCASE("empty actual set is rejected") {
        QualitySelection sel = selection_of(vc, {{0, 1}});
        CHECK_THROWS_AS(qoe_chunk(sel, {}, std::nullopt, 0, qc), std::domain_error);
    }

    SUBCASE("QoE equals the view average when all penalties vanish") {
        std::mt19937_64 rng(31);
        std::uniform_int_distribution<int> lvl(1, 5);
        for (int trial = 0; trial < 100; ++trial) {
            const int m = lvl(rng);
            QualitySelection sel;
            sel.levels.assign(vc.n_tiles(), m);
            QoEReport rep = qoe_chunk(sel, {0, 3, 7}, static_cast<double>(m), 0, qc);
            CHECK(rep.qoe == rep.avg_view_quality);
        }
    }
}

TEST_CASE("single-user constant-rate delay equals the closed-form ceiling") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> rate_dist(1e5, 1e9);
    std::uniform_int_distribution<int> slots_dist(1, 80);
    std::uniform_real_distribution<double> frac(0.01, 0.99);
    const double ts = 0.1;
    for (int trial = 0; trial < 1000; ++trial) {
        const double r = rate_dist(rng);
        const int k = slots_dist(rng);
        const double bits = (static_cast<double>(k) - frac(rng)) * ts * r;
        std::vector<double> rates(100, r);
        const auto td = transmission_delay(rates, bits, ts);
        REQUIRE(td.has_value());
        const int want = static_cast<int>(std::ceil(bits / (ts * r)));
        CHECK(*td == std::max(1, want));
    }
}
