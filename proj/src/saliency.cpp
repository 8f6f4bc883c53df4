// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/saliency.hpp"

#include <cstring>
#include <fstream>

namespace thz360 {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ofstream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

float get_f32(std::ifstream& in) {
    const std::uint32_t bits = get_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

void write_smap(const std::string& path, const std::vector<FeatureMap>& frames) {
    if (frames.empty()) throw std::invalid_argument("write_smap: no frames");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_smap: cannot open " + path);
    out.write("SMAP", 4);
    put_u32(out, static_cast<std::uint32_t>(frames.front().width));
    put_u32(out, static_cast<std::uint32_t>(frames.front().height));
    put_u32(out, static_cast<std::uint32_t>(frames.size()));
    for (const auto& f : frames) {
        if (f.width != frames.front().width || f.height != frames.front().height)
            throw std::invalid_argument("write_smap: inconsistent frame sizes");
        for (double v : f.values) put_f32(out, static_cast<float>(v));
    }
    if (!out) throw std::runtime_error("write_smap: write failed for " + path);
}

std::vector<FeatureMap> read_smap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_smap: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "SMAP", 4) != 0)
        throw std::runtime_error("read_smap: bad magic in " + path);
    const std::uint32_t w = get_u32(in), h = get_u32(in), n = get_u32(in);
    if (!in || w == 0 || h == 0 || n == 0)
        throw std::runtime_error("read_smap: bad header in " + path);
    std::vector<FeatureMap> frames;
    frames.reserve(n);
    for (std::uint32_t f = 0; f < n; ++f) {
        FeatureMap m = FeatureMap::zeros(w, h);
        for (double& v : m.values) v = static_cast<double>(get_f32(in));
        frames.push_back(std::move(m));
    }
    if (!in) throw std::runtime_error("read_smap: truncated file " + path);
    return frames;
}

FileSaliencyProvider::FileSaliencyProvider(const std::string& dir, std::size_t n_videos) {
    for (std::size_t v = 0; v < n_videos; ++v) {
        videos_.push_back(read_smap(dir + "/video_" + std::to_string(v) + ".smap"));
        if (v == 0) {
            width_ = videos_[0].front().width;
            height_ = videos_[0].front().height;
        }
    }
}

FeatureMap FileSaliencyProvider::frame_map(std::size_t video, std::size_t frame) const {
    const auto& frames = videos_.at(video);
    return frames[std::min(frame, frames.size() - 1)];
}

SyntheticSaliencyProvider::SyntheticSaliencyProvider(SyntheticSaliencyConfig cfg,
                                                     std::uint64_t seed)
    : cfg_(cfg), seed_(seed) {
    if (cfg_.components == 0) throw std::invalid_argument("synthetic saliency: zero components");
}

FeatureMap SyntheticSaliencyProvider::frame_map(std::size_t video, std::size_t frame) const {
    FeatureMap m = FeatureMap::zeros(cfg_.width, cfg_.height);
    const double inv = 1.0 / (2.0 * cfg_.sigma * cfg_.sigma);
    const double sector = kTwoPi / static_cast<double>(cfg_.components);
    for (std::size_t k = 0; k < cfg_.components; ++k) {
        Rng rng(mix_seed(seed_, video * 1000003ULL + k));
        std::uniform_real_distribution<double> uth(0.3 * kPi, 0.7 * kPi);
        std::uniform_real_distribution<double> uph(0.25, 0.75);
        std::uniform_real_distribution<double> udir(-1.0, 1.0);
        // one blob per longitude sector keeps the modes distinct
        HeadPose centre;
        centre.theta = uth(rng);
        centre.phi = (static_cast<double>(k) + uph(rng)) * sector;
        const double vel = udir(rng) * cfg_.drift_per_frame;
        centre.phi = wrap_two_pi(centre.phi + vel * static_cast<double>(frame));
        for (std::size_t r = 0; r < cfg_.height; ++r)
            for (std::size_t c = 0; c < cfg_.width; ++c) {
                const double d = angular_distance(pixel_direction(r, c, cfg_.width, cfg_.height),
                                                  centre);
                m.at(r, c) += std::exp(-d * d * inv);
            }
    }
    return m;
}

}  // namespace thz360
