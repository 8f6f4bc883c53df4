// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "thz360/fusion.hpp"
#include "thz360/saliency.hpp"

using namespace thz360;

namespace {

FeatureMap map_of(std::size_t w, std::size_t h, std::initializer_list<double> vals) {
    FeatureMap m = FeatureMap::zeros(w, h);
    std::copy(vals.begin(), vals.end(), m.values.begin());
    return m;
}

// independent great-circle formula (haversine) for the kernel test
double haversine(const HeadPose& a, const HeadPose& b) {
    const double lat_a = kPi / 2.0 - a.theta, lat_b = kPi / 2.0 - b.theta;
    const double dlat = lat_b - lat_a, dlon = b.phi - a.phi;
    const double s = std::sin(dlat / 2.0), t = std::sin(dlon / 2.0);
    const double h = s * s + std::cos(lat_a) * std::cos(lat_b) * t * t;
    return 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace

TEST_CASE("head orientation map peaks at the pose and wraps at the seam") {
    const std::size_t W = 48, H = 24;
    const HeadPose pose = pixel_direction(12, 24, W, H);
    FeatureMap m = head_orientation_map(pose, W, H, 0.35);
    const auto it = std::max_element(m.values.begin(), m.values.end());
    const std::size_t arg = static_cast<std::size_t>(it - m.values.begin());
    CHECK(arg / W == 12);
    CHECK(arg % W == 24);
    CHECK(*it == doctest::Approx(1.0).epsilon(1e-12));

    // pose at phi = 0: columns mirror across the longitude seam
    HeadPose seam{kPi / 2.0, 0.0};
    FeatureMap s = head_orientation_map(seam, W, H, 0.35);
    for (std::size_t r = 0; r < H; r += 3)
        for (std::size_t c = 0; c < W / 2; ++c)
            CHECK(s.at(r, c) == doctest::Approx(s.at(r, W - 1 - c)).epsilon(1e-12));
}

TEST_CASE("kernel value at one sigma is exp(-1/2) of the peak") {
    const std::size_t W = 48, H = 24;
    const HeadPose pose = pixel_direction(6, 10, W, H);
    const HeadPose probe = pixel_direction(6, 14, W, H);
    const double sigma = haversine(pose, probe);
    FeatureMap m = head_orientation_map(pose, W, H, sigma);
    CHECK(m.at(6, 14) / m.at(6, 10) == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("min-max normalization") {
    FeatureMap c = map_of(3, 1, {4.0, 4.0, 4.0});
    FeatureMap cn = normalize_map(c);
    for (double v : cn.values) CHECK(v == 0.0);

    FeatureMap m = map_of(3, 1, {0.0, 5.0, 10.0});
    FeatureMap mn = normalize_map(m);
    CHECK(mn.values[0] == 0.0);
    CHECK(mn.values[1] == doctest::Approx(0.5));
    CHECK(mn.values[2] == 1.0);

    FeatureMap idem = map_of(4, 1, {0.0, 0.25, 0.75, 1.0});
    FeatureMap idem2 = normalize_map(idem);
    for (std::size_t i = 0; i < 4; ++i) CHECK(idem2.values[i] == idem.values[i]);
}

TEST_CASE("per-tile maxima") {
    Tiling t{4, 6};

    FeatureMap c = FeatureMap::zeros(12, 8);
    std::fill(c.values.begin(), c.values.end(), 2.5);
    auto mx = tile_max(c, t);
    for (double v : mx) CHECK(v == 2.5);

    FeatureMap hot = FeatureMap::zeros(12, 8);
    hot.at(3, 5) = 9.0;
    mx = tile_max(hot, t);
    std::size_t nonzero = 0;
    for (double v : mx) nonzero += (v > 0.0);
    CHECK(nonzero == 1);
    CHECK(mx[t.index(3 / 2, 5 / 2)] == 9.0);

    // random map against a brute-force per-tile scan
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FeatureMap rnd = FeatureMap::zeros(12, 8);
    for (double& v : rnd.values) v = u(rng);
    mx = tile_max(rnd, t);
    for (std::size_t n = 0; n < t.n_tiles(); ++n) {
        double want = 0.0;
        for (std::size_t r = t.row_of(n) * 2; r < t.row_of(n) * 2 + 2; ++r)
            for (std::size_t c2 = t.col_of(n) * 2; c2 < t.col_of(n) * 2 + 2; ++c2)
                want = std::max(want, rnd.at(r, c2));
        CHECK(mx[n] == want);
    }
}

TEST_CASE("regional fusion weights") {
    Tiling t{1, 2};

    SUBCASE("uniform saliency leaves only the head map") {
        FeatureMap sal = map_of(2, 1, {0.7, 0.7});
        FeatureMap head = map_of(2, 1, {1.0, 0.2});
        FeatureMap x = regional_fusion(sal, head, t);
        const double w = (1.0 - 0.6) * (1.0 - 0.6);
        CHECK(x.values[0] == doctest::Approx(w * 1.0));
        CHECK(x.values[1] == doctest::Approx(w * 0.2));
    }

    SUBCASE("uniform head map leaves only the saliency") {
        FeatureMap sal = map_of(2, 1, {1.0, 0.0});
        FeatureMap head = map_of(2, 1, {0.3, 0.3});
        FeatureMap x = regional_fusion(sal, head, t);
        const double w = (1.0 - 0.5) * (1.0 - 0.5);
        CHECK(x.values[0] == doctest::Approx(w));
        CHECK(x.values[1] == 0.0);
    }

    SUBCASE("crafted two-tile maps give both weights 0.25") {
        FeatureMap sal = map_of(2, 1, {1.0, 0.0});
        FeatureMap head = map_of(2, 1, {0.0, 1.0});
        FeatureMap x = regional_fusion(sal, head, t);
        CHECK(x.values[0] == doctest::Approx(0.25));
        CHECK(x.values[1] == doctest::Approx(0.25));
    }
}

TEST_CASE("viewport selection") {
    Tiling t{4, 6};
    FusionConfig fc;
    CHECK(fc.fov_tile_rows(t) == 2);  // 90 deg over 45-deg tiles
    CHECK(fc.fov_tile_cols(t) == 3);  // 135 deg over 60-deg tiles

    FeatureMap m = FeatureMap::zeros(12, 8);
    m.at(5, 9) = 1.0;  // tile (2, 4)
    auto view = select_viewport_tiles(m, t, 2, 3);
    CHECK(view.size() == 6);
    CHECK(view.count(t.index(2, 4)) == 1);

    SUBCASE("uniform map breaks ties to the first rectangle") {
        FeatureMap u = FeatureMap::zeros(12, 8);
        std::fill(u.values.begin(), u.values.end(), 1.0);
        auto v = select_viewport_tiles(u, t, 2, 3);
        std::set<std::size_t> want = {t.index(0, 0), t.index(0, 1), t.index(0, 2),
                                      t.index(1, 0), t.index(1, 1), t.index(1, 2)};
        CHECK(v == want);
    }

    SUBCASE("invariant to adding a constant") {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        FeatureMap rnd = FeatureMap::zeros(12, 8);
        for (double& v : rnd.values) v = dist(rng);
        auto base = select_viewport_tiles(rnd, t, 2, 3);
        FeatureMap shifted = rnd;
        for (double& v : shifted.values) v += 7.25;
        CHECK(select_viewport_tiles(shifted, t, 2, 3) == base);
    }

    SUBCASE("matches an exhaustive rectangle scan") {
        std::mt19937_64 rng(29);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (int trial = 0; trial < 25; ++trial) {
            FeatureMap rnd = FeatureMap::zeros(12, 8);
            for (double& v : rnd.values) v = dist(rng);
            auto got = select_viewport_tiles(rnd, t, 2, 3);
            auto score = tile_max(rnd, t);
            double best = -1.0;
            std::set<std::size_t> want;
            for (std::size_t r = 0; r + 2 <= t.rows; ++r)
                for (std::size_t c = 0; c < t.cols; ++c) {
                    double s = 0.0;
                    std::set<std::size_t> rect;
                    for (std::size_t dr = 0; dr < 2; ++dr)
                        for (std::size_t dc = 0; dc < 3; ++dc) {
                            const std::size_t n = t.index(r + dr, (c + dc) % t.cols);
                            s += score[n];
                            rect.insert(n);
                        }
                    if (s > best) {
                        best = s;
                        want = rect;
                    }
                }
            CHECK(got == want);
        }
    }
}

TEST_CASE("marginal tile count table") {
    const std::size_t want[11] = {0, 0, 0, 0, 0, 0, 0, 0, 1, 2, 3};  // gaps 0..10, gap 0 unused
    for (long gap = 1; gap <= 10; ++gap)
        CHECK(marginal_count(0.15, gap, 6) == want[gap]);
    CHECK_THROWS_AS(marginal_count(0.15, 0, 6), std::invalid_argument);
}

TEST_CASE("greedy marginal expansion") {
    Tiling t{4, 6};
    FeatureMap grad = FeatureMap::zeros(12, 8);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (double& v : grad.values) v = dist(rng);
    auto view = select_viewport_tiles(grad, t, 2, 3);

    CHECK(expand_marginal(grad, t, view, 0) == view);

    auto all = expand_marginal(grad, t, view, t.n_tiles() - view.size());
    CHECK(all.size() == t.n_tiles());

    // stepwise oracle: each added tile is the best-scoring adjacent one
    auto score = tile_max(grad, t);
    std::set<std::size_t> pred = view;
    for (int step = 0; step < 6; ++step) {
        auto next = expand_marginal(grad, t, view, static_cast<std::size_t>(step) + 1);
        std::set<std::size_t> added;
        for (std::size_t n : next)
            if (!pred.count(n)) added.insert(n);
        REQUIRE(added.size() == 1);
        const std::size_t got = *added.begin();
        double best = -1.0;
        std::size_t want = t.n_tiles();
        for (std::size_t n = 0; n < t.n_tiles(); ++n) {
            if (pred.count(n)) continue;
            const std::size_t r = t.row_of(n), c = t.col_of(n);
            const bool adj = (r > 0 && pred.count(t.index(r - 1, c))) ||
                             (r + 1 < t.rows && pred.count(t.index(r + 1, c))) ||
                             pred.count(t.index(r, (c + 1) % t.cols)) ||
                             pred.count(t.index(r, (c + t.cols - 1) % t.cols));
            if (adj && (score[n] > best || (score[n] == best && n < want))) {
                best = score[n];
                want = n;
            }
        }
        CHECK(got == want);
        pred = next;
    }
}

TEST_CASE("tiles overlap ratio") {
    std::set<std::size_t> actual = {1, 2, 3, 4, 5, 6};
    std::set<std::size_t> superset = {0, 1, 2, 3, 4, 5, 6, 7};
    CHECK(tiles_overlap(superset, actual) == 1.0);
    CHECK(tiles_overlap({10, 11}, actual) == 0.0);
    CHECK(tiles_overlap({1, 2, 3, 9, 10, 11}, actual) == doctest::Approx(0.5));
    CHECK_THROWS_AS(tiles_overlap({1}, {}), std::domain_error);
}

TEST_CASE("chunk-level prediction is internally consistent") {
    Tiling t{4, 6};
    FusionConfig fc;
    SyntheticSaliencyConfig scfg;
    SyntheticSaliencyProvider sal(scfg, 99);

    std::vector<FeatureMap> frames;
    std::vector<HeadPose> poses;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uphi(0.0, kTwoPi);
    for (std::size_t f = 0; f < 5; ++f) {
        frames.push_back(sal.frame_map(0, f));
        poses.push_back(HeadPose{kPi / 2.0, uphi(rng)});
    }
    TilePrediction tp = predict_tiles(frames, poses, 2, t, fc);

    REQUIRE(tp.indicator.size() == t.n_tiles());
    for (std::size_t n = 0; n < t.n_tiles(); ++n)
        CHECK((tp.indicator[n] == 1) == (tp.pred_set.count(n) == 1));
    for (double v : tp.avg_feature) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    for (std::size_t f = 0; f < tp.view_sets.size(); ++f) {
        for (std::size_t n : tp.view_sets[f]) CHECK(tp.marg_sets[f].count(n) == 0);
        for (std::size_t n : tp.view_sets[f]) CHECK(tp.pred_set.count(n) == 1);
        for (std::size_t n : tp.marg_sets[f]) CHECK(tp.pred_set.count(n) == 1);
    }
}

TEST_CASE("smap round trip") {
    SyntheticSaliencyConfig scfg;
    scfg.width = 24;
    scfg.height = 12;
    SyntheticSaliencyProvider sal(scfg, 7);
    std::vector<FeatureMap> frames;
    for (std::size_t f = 0; f < 3; ++f) frames.push_back(sal.frame_map(1, f));

    const std::string path = "test_roundtrip.smap";
    write_smap(path, frames);
    auto back = read_smap(path);
    REQUIRE(back.size() == 3);
    for (std::size_t f = 0; f < 3; ++f) {
        CHECK(back[f].width == 24);
        CHECK(back[f].height == 12);
        for (std::size_t i = 0; i < back[f].values.size(); ++i)
            CHECK(back[f].values[i] ==
                  doctest::Approx(frames[f].values[i]).epsilon(1e-6));  // float32 storage
    }
    std::remove(path.c_str());
}

TEST_CASE("synthetic saliency is deterministic with the expected mode count") {
    SyntheticSaliencyConfig scfg;
    scfg.components = 2;
    scfg.sigma = 0.3;
    SyntheticSaliencyProvider a(scfg, 123), b(scfg, 123);
    FeatureMap fa = a.frame_map(0, 10), fb = b.frame_map(0, 10);
    for (std::size_t i = 0; i < fa.values.size(); ++i) CHECK(fa.values[i] == fb.values[i]);

    // count strict local maxima on a coarse grid scan (longitude wraps)
    int maxima = 0;
    for (std::size_t r = 1; r + 1 < fa.height; ++r)
        for (std::size_t c = 0; c < fa.width; ++c) {
            const double v = fa.at(r, c);
            const std::size_t cl = (c + fa.width - 1) % fa.width;
            const std::size_t cr = (c + 1) % fa.width;
            if (v > fa.at(r - 1, c) && v > fa.at(r + 1, c) && v > fa.at(r, cl) &&
                v > fa.at(r, cr))
                ++maxima;
        }
    CHECK(maxima == 2);

    SUBCASE("zero drift keeps frames identical") {
        SyntheticSaliencyConfig still = scfg;
        still.components = 1;
        still.drift_per_frame = 0.0;
        SyntheticSaliencyProvider s(still, 5);
        FeatureMap f0 = s.frame_map(0, 0), f9 = s.frame_map(0, 9);
        for (std::size_t i = 0; i < f0.values.size(); ++i)
            CHECK(f0.values[i] == f9.values[i]);
    }
}
