// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thz360 {

void FusionConfig::validate() const {
    if (kernel_sigma <= 0.0) throw std::invalid_argument("FusionConfig: kernel_sigma must be positive");
    if (alpha_marg < 0.0) throw std::invalid_argument("FusionConfig: alpha_marg must be non-negative");
    if (fov_vertical_deg <= 0.0 || fov_horizontal_deg <= 0.0)
        throw std::invalid_argument("FusionConfig: field of view must be positive");
}

std::size_t FusionConfig::fov_tile_rows(const Tiling& t) const {
    const double tile_deg = 180.0 / static_cast<double>(t.rows);
    auto r = static_cast<std::size_t>(std::ceil(fov_vertical_deg / tile_deg));
    return std::min(std::max<std::size_t>(r, 1), t.rows);
}

std::size_t FusionConfig::fov_tile_cols(const Tiling& t) const {
    const double tile_deg = 360.0 / static_cast<double>(t.cols);
    auto c = static_cast<std::size_t>(std::ceil(fov_horizontal_deg / tile_deg));
    return std::min(std::max<std::size_t>(c, 1), t.cols);
}

HeadPose pixel_direction(std::size_t row, std::size_t col, std::size_t width, std::size_t height) {
    HeadPose p;
    p.theta = (static_cast<double>(row) + 0.5) * kPi / static_cast<double>(height);
    p.phi = (static_cast<double>(col) + 0.5) * kTwoPi / static_cast<double>(width);
    return p;
}

double angular_distance(const HeadPose& a, const HeadPose& b) {
    const double ax = std::sin(a.theta) * std::cos(a.phi);
    const double ay = std::sin(a.theta) * std::sin(a.phi);
    const double az = std::cos(a.theta);
    const double bx = std::sin(b.theta) * std::cos(b.phi);
    const double by = std::sin(b.theta) * std::sin(b.phi);
    const double bz = std::cos(b.theta);
    const double dot = std::clamp(ax * bx + ay * by + az * bz, -1.0, 1.0);
    return std::acos(dot);
}

FeatureMap head_orientation_map(const HeadPose& pose, std::size_t width, std::size_t height,
                                double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("head_orientation_map: sigma must be positive");
    FeatureMap m = FeatureMap::zeros(width, height);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const double d = angular_distance(pixel_direction(r, c, width, height), pose);
            m.at(r, c) = std::exp(-d * d * inv);
        }
    return m;
}

FeatureMap normalize_map(const FeatureMap& m) {
    FeatureMap out = m;
    const auto [mn_it, mx_it] = std::minmax_element(m.values.begin(), m.values.end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn)) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    const double inv = 1.0 / (mx - mn);
    for (double& v : out.values) v = (v - mn) * inv;
    return out;
}

static void check_partition(const FeatureMap& m, const Tiling& t) {
    if (m.width % t.cols != 0 || m.height % t.rows != 0)
        throw std::invalid_argument("tiling does not partition the map");
}

std::vector<double> tile_max(const FeatureMap& m, const Tiling& t) {
    check_partition(m, t);
    const std::size_t th = m.height / t.rows, tw = m.width / t.cols;
    std::vector<double> out(t.n_tiles(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < m.height; ++r)
        for (std::size_t c = 0; c < m.width; ++c) {
            const std::size_t n = t.index(r / th, c / tw);
            out[n] = std::max(out[n], m.at(r, c));
        }
    return out;
}

FeatureMap regional_fusion(const FeatureMap& saliency_norm, const FeatureMap& head_norm,
                           const Tiling& t) {
    if (saliency_norm.width != head_norm.width || saliency_norm.height != head_norm.height)
        throw std::invalid_argument("regional_fusion: map sizes differ");
    auto weight_of = [&](const FeatureMap& m) {
        const std::vector<double> mx = tile_max(m, t);
        const double top = *std::max_element(mx.begin(), mx.end());
        double mean = 0.0;
        for (double v : mx) mean += v;
        mean /= static_cast<double>(mx.size());
        const double w = top - mean;
        return w * w;
    };
    const double ws = weight_of(saliency_norm);
    const double wm = weight_of(head_norm);
    FeatureMap out = FeatureMap::zeros(saliency_norm.width, saliency_norm.height);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = ws * saliency_norm.values[i] + wm * head_norm.values[i];
    return out;
}

std::set<std::size_t> select_viewport_tiles(const FeatureMap& fused, const Tiling& t,
                                            std::size_t fov_rows, std::size_t fov_cols) {
    if (fov_rows > t.rows || fov_cols > t.cols)
        throw std::invalid_argument("select_viewport_tiles: footprint exceeds tiling");
    const std::vector<double> score = tile_max(fused, t);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_r = 0, best_c = 0;
    for (std::size_t r = 0; r + fov_rows <= t.rows; ++r)
        for (std::size_t c = 0; c < t.cols; ++c) {
            double s = 0.0;
            for (std::size_t dr = 0; dr < fov_rows; ++dr)
                for (std::size_t dc = 0; dc < fov_cols; ++dc)
                    s += score[t.index(r + dr, (c + dc) % t.cols)];
            if (s > best) {
                best = s;
                best_r = r;
                best_c = c;
            }
        }
    std::set<std::size_t> out;
    for (std::size_t dr = 0; dr < fov_rows; ++dr)
        for (std::size_t dc = 0; dc < fov_cols; ++dc)
            out.insert(t.index(best_r + dr, (best_c + dc) % t.cols));
    return out;
}

std::size_t marginal_count(double alpha_marg, long chunk_gap, std::size_t n_view) {
    if (chunk_gap < 1) throw std::invalid_argument("marginal_count: chunk gap must be >= 1");
    const double raw = std::floor((alpha_marg * static_cast<double>(chunk_gap) - 1.0) *
                                  static_cast<double>(n_view));
    return raw > 0.0 ? static_cast<std::size_t>(raw) : 0;
}

std::set<std::size_t> expand_marginal(const FeatureMap& fused, const Tiling& t,
                                      const std::set<std::size_t>& view, std::size_t count) {
    const std::vector<double> score = tile_max(fused, t);
    std::set<std::size_t> pred = view;
    auto neighbours = [&](std::size_t n) {
        std::vector<std::size_t> out;
        const std::size_t r = t.row_of(n), c = t.col_of(n);
        if (r > 0) out.push_back(t.index(r - 1, c));
        if (r + 1 < t.rows) out.push_back(t.index(r + 1, c));
        out.push_back(t.index(r, (c + 1) % t.cols));
        out.push_back(t.index(r, (c + t.cols - 1) % t.cols));
        return out;
    };
    for (std::size_t step = 0; step < count; ++step) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_n = t.n_tiles();
        for (std::size_t n : pred)
            for (std::size_t nb : neighbours(n)) {
                if (pred.count(nb)) continue;
                if (score[nb] > best || (score[nb] == best && nb < best_n)) {
                    best = score[nb];
                    best_n = nb;
                }
            }
        if (best_n == t.n_tiles()) break;  // grid exhausted
        pred.insert(best_n);
    }
    return pred;
}

double tiles_overlap(const std::set<std::size_t>& pred, const std::set<std::size_t>& actual) {
    if (actual.empty()) throw std::domain_error("tiles_overlap: empty actual set");
    std::size_t hit = 0;
    for (std::size_t n : actual) hit += pred.count(n);
    return static_cast<double>(hit) / static_cast<double>(actual.size());
}

TilePrediction predict_tiles(const std::vector<FeatureMap>& saliency_frames,
                             const std::vector<HeadPose>& predicted_poses, long chunk_gap,
                             const Tiling& t, const FusionConfig& fc) {
    if (saliency_frames.empty() || saliency_frames.size() != predicted_poses.size())
        throw std::invalid_argument("predict_tiles: frame count mismatch");
    const std::size_t fr = fc.fov_tile_rows(t), fcol = fc.fov_tile_cols(t);
    TilePrediction tp;
    tp.avg_feature.assign(t.n_tiles(), 0.0);
    for (std::size_t f = 0; f < saliency_frames.size(); ++f) {
        const FeatureMap& sal = saliency_frames[f];
        const FeatureMap snorm = normalize_map(sal);
        const FeatureMap hnorm = normalize_map(
            head_orientation_map(predicted_poses[f], sal.width, sal.height, fc.kernel_sigma));
        const FeatureMap fused = regional_fusion(snorm, hnorm, t);
        auto view = select_viewport_tiles(fused, t, fr, fcol);
        const std::size_t n_marg = marginal_count(fc.alpha_marg, chunk_gap, view.size());
        auto pred_f = expand_marginal(fused, t, view, n_marg);
        std::set<std::size_t> marg;
        for (std::size_t n : pred_f)
            if (!view.count(n)) marg.insert(n);
        tp.pred_set.insert(pred_f.begin(), pred_f.end());
        tp.view_sets.push_back(std::move(view));
        tp.marg_sets.push_back(std::move(marg));
        const std::vector<double> feat = tile_max(normalize_map(fused), t);
        for (std::size_t n = 0; n < t.n_tiles(); ++n) tp.avg_feature[n] += feat[n];
    }
    const double inv_f = 1.0 / static_cast<double>(saliency_frames.size());
    for (double& v : tp.avg_feature) v *= inv_f;
    tp.indicator.assign(t.n_tiles(), 0);
    for (std::size_t n : tp.pred_set) tp.indicator[n] = 1;
    return tp;
}

std::set<std::size_t> viewport_from_pose(const HeadPose& pose, const Tiling& t,
                                         const FusionConfig& fc, std::size_t map_width,
                                         std::size_t map_height) {
    const FeatureMap head = head_orientation_map(pose, map_width, map_height, fc.kernel_sigma);
    return select_viewport_tiles(head, t, fc.fov_tile_rows(t), fc.fov_tile_cols(t));
}

}  // namespace thz360
