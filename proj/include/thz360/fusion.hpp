// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Head-orientation maps, regional fusion of saliency and head maps, and
// viewport/marginal tile selection on an equirectangular grid.

#ifndef THZ360_FUSION_HPP
#define THZ360_FUSION_HPP

#include <set>
#include <vector>

#include "thz360/common.hpp"
#include "thz360/phy.hpp"  // HeadPose

namespace thz360 {

/// Equirectangular W x H feature grid, stored row-major with H rows
/// (latitude, top = theta 0) and W columns (longitude).
struct FeatureMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;  // height * width

    double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
    double& at(std::size_t row, std::size_t col) { return values[row * width + col]; }

    static FeatureMap zeros(std::size_t w, std::size_t h) {
        return FeatureMap{w, h, std::vector<double>(w * h, 0.0)};
    }
};

/// Tile grid partitioning the map. Tile index n = row * cols + col.
struct Tiling {
    std::size_t rows = 4;
    std::size_t cols = 6;

    std::size_t n_tiles() const { return rows * cols; }
    std::size_t index(std::size_t r, std::size_t c) const { return r * cols + c; }
    std::size_t row_of(std::size_t n) const { return n / cols; }
    std::size_t col_of(std::size_t n) const { return n % cols; }
};

struct FusionConfig {
    double kernel_sigma = 0.35;  // head map Gaussian width, rad
    double alpha_marg = 0.15;    // marginal-region scaling factor
    double fov_vertical_deg = 90.0;
    double fov_horizontal_deg = 135.0;

    void validate() const;
    /// Tile footprint of the field of view: ceil(FoV / tile angular size)
    /// per axis.
    std::size_t fov_tile_rows(const Tiling& t) const;
    std::size_t fov_tile_cols(const Tiling& t) const;
};

/// Per-frame tile prediction for one requested chunk.
struct TilePrediction {
    std::vector<std::set<std::size_t>> view_sets;  // per frame
    std::vector<std::set<std::size_t>> marg_sets;  // per frame
    std::set<std::size_t> pred_set;                // chunk union
    std::vector<int> indicator;                    // upsilon, length n_tiles
    std::vector<double> avg_feature;               // chi_bar, length n_tiles, in [0,1]
};

/// Direction of a pixel center on the unit sphere; row 0 is theta ~ 0.
HeadPose pixel_direction(std::size_t row, std::size_t col, std::size_t width, std::size_t height);

/// Great-circle angle between two directions, in [0, pi].
double angular_distance(const HeadPose& a, const HeadPose& b);

/// Gaussian bump exp(-d^2 / (2 sigma^2)) around the pose direction, with d
/// the great-circle distance; wraps correctly across the longitude seam.
FeatureMap head_orientation_map(const HeadPose& pose, std::size_t width, std::size_t height,
                                double sigma);

/// Min-max scale to [0,1]; a constant map collapses to all zeros.
FeatureMap normalize_map(const FeatureMap& m);

/// Per-tile maximum of the map values.
std::vector<double> tile_max(const FeatureMap& m, const Tiling& t);

/// Regional fusion: X = (max - mean)^2 of the saliency tile maxima times
/// the saliency map, plus the same weight built from the head tile maxima
/// times the head map. A flat map contributes weight zero.
FeatureMap regional_fusion(const FeatureMap& saliency_norm, const FeatureMap& head_norm,
                           const Tiling& t);

/// The contiguous fov_rows x fov_cols tile rectangle (wrapping across the
/// longitude seam, never across the poles) with maximal summed feature.
/// Ties break to the first rectangle in row-major anchor scan order.
std::set<std::size_t> select_viewport_tiles(const FeatureMap& fused, const Tiling& t,
                                            std::size_t fov_rows, std::size_t fov_cols);

/// Number of marginal tiles: [floor((alpha * chunk_gap - 1) * n_view)]^+.
std::size_t marginal_count(double alpha_marg, long chunk_gap, std::size_t n_view);

/// Greedy expansion: repeatedly add the highest-feature tile 4-adjacent
/// (longitude wrap, no latitude wrap) to the growing set. Returns the
/// union of the viewport and the added marginal tiles.
std::set<std::size_t> expand_marginal(const FeatureMap& fused, const Tiling& t,
                                      const std::set<std::size_t>& view, std::size_t count);

/// |pred intersect actual| / |actual|.
double tiles_overlap(const std::set<std::size_t>& pred, const std::set<std::size_t>& actual);

/// Full per-chunk pipeline: fuse the per-frame saliency maps with head
/// maps of the predicted poses, pick viewport and marginal tiles per
/// frame, and aggregate the chunk-level prediction.
TilePrediction predict_tiles(const std::vector<FeatureMap>& saliency_frames,
                             const std::vector<HeadPose>& predicted_poses, long chunk_gap,
                             const Tiling& t, const FusionConfig& fc);

/// Tiles covered by the field of view around one (actual) pose.
std::set<std::size_t> viewport_from_pose(const HeadPose& pose, const Tiling& t,
                                         const FusionConfig& fc, std::size_t map_width,
                                         std::size_t map_height);

}  // namespace thz360

#endif  // THZ360_FUSION_HPP
