// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Saliency map sources. The streaming pipeline only consumes normalized
// per-frame maps, so any detector can sit behind this interface; the two
// backends here are a binary file loader and a seeded synthetic generator.

#ifndef THZ360_SALIENCY_HPP
#define THZ360_SALIENCY_HPP

#include <memory>
#include <string>
#include <vector>

#include "thz360/fusion.hpp"

namespace thz360 {

class SaliencyProvider {
  public:
    virtual ~SaliencyProvider() = default;
    /// Map for one video frame (global frame index within the video).
    virtual FeatureMap frame_map(std::size_t video, std::size_t frame) const = 0;
    virtual std::size_t width() const = 0;
    virtual std::size_t height() const = 0;
};

/// SMAP container: magic "SMAP", u32 width, u32 height, u32 frame_count,
/// then frame_count * width * height little-endian float32 values,
/// row-major per frame.
void write_smap(const std::string& path, const std::vector<FeatureMap>& frames);
std::vector<FeatureMap> read_smap(const std::string& path);

/// Loads one SMAP file per video ("<dir>/video_<v>.smap"); frame indices
/// past the end of a file clamp to its last frame.
class FileSaliencyProvider : public SaliencyProvider {
  public:
    FileSaliencyProvider(const std::string& dir, std::size_t n_videos);
    FeatureMap frame_map(std::size_t video, std::size_t frame) const override;
    std::size_t width() const override { return width_; }
    std::size_t height() const override { return height_; }

  private:
    std::vector<std::vector<FeatureMap>> videos_;
    std::size_t width_ = 0, height_ = 0;
};

struct SyntheticSaliencyConfig {
    std::size_t width = 48;
    std::size_t height = 24;
    std::size_t components = 2;      // Gaussian blobs per frame
    double sigma = 0.4;              // blob width, rad
    double drift_per_frame = 0.01;   // longitude drift of blob centres, rad
};

/// Mixture-of-Gaussians maps with temporally drifting centres. Blob bases
/// and velocities derive from (seed, video, component), so any frame can
/// be generated independently and the output is reproducible.
class SyntheticSaliencyProvider : public SaliencyProvider {
  public:
    SyntheticSaliencyProvider(SyntheticSaliencyConfig cfg, std::uint64_t seed);
    FeatureMap frame_map(std::size_t video, std::size_t frame) const override;
    std::size_t width() const override { return cfg_.width; }
    std::size_t height() const override { return cfg_.height; }

  private:
    SyntheticSaliencyConfig cfg_;
    std::uint64_t seed_;
};

}  // namespace thz360

#endif  // THZ360_SALIENCY_HPP
