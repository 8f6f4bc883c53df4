// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/streaming.hpp"

#include <algorithm>

namespace thz360 {

void VideoConfig::validate() const {
    if (tile_rows == 0 || tile_cols == 0) throw std::invalid_argument("VideoConfig: empty tiling");
    if (n_frames_per_chunk == 0) throw std::invalid_argument("VideoConfig: zero frames per chunk");
    if (chunk_slots <= 0) throw std::invalid_argument("VideoConfig: chunk_slots must be positive");
    if (slot_seconds <= 0.0) throw std::invalid_argument("VideoConfig: slot_seconds must be positive");
    if (quality_bitrates.empty()) throw std::invalid_argument("VideoConfig: no quality levels");
    for (std::size_t i = 1; i < quality_bitrates.size(); ++i)
        if (quality_bitrates[i] <= quality_bitrates[i - 1])
            throw std::invalid_argument("VideoConfig: bitrates must be strictly ascending");
    if (n_frames_per_chunk % static_cast<std::size_t>(chunk_slots) != 0)
        throw std::invalid_argument("VideoConfig: frames per chunk must be a multiple of chunk_slots");
    if (n_chunks == 0) throw std::invalid_argument("VideoConfig: zero chunks");
}

void QoEConfig::validate() const {
    if (lambda_spatial < 0.0 || lambda_temp < 0.0 || lambda_rd < 0.0)
        throw std::invalid_argument("QoEConfig: weights must be non-negative");
}

double chunk_size_bits(const QualitySelection& sel, const VideoConfig& vc) {
    if (sel.levels.size() != vc.n_tiles())
        throw std::invalid_argument("chunk_size_bits: selection length does not match tiling");
    double sum_rate = 0.0;
    for (int lvl : sel.levels) {
        if (lvl < 0 || static_cast<std::size_t>(lvl) > vc.n_levels())
            throw std::invalid_argument("chunk_size_bits: level out of range");
        if (lvl > 0) sum_rate += vc.quality_bitrates[static_cast<std::size_t>(lvl - 1)];
    }
    return static_cast<double>(vc.chunk_slots) * vc.slot_seconds * sum_rate;
}

std::optional<int> transmission_delay(const std::vector<double>& rates_per_slot,
                                      double chunk_bits, double slot_seconds) {
    if (chunk_bits <= 0.0) return 1;
    double delivered = 0.0;
    int slots = 0;
    for (double r : rates_per_slot) {
        if (r < 0.0) throw std::invalid_argument("transmission_delay: negative rate");
        delivered += slot_seconds * r;
        ++slots;
        if (delivered >= chunk_bits) return slots;
    }
    return std::nullopt;
}

int waiting_time(const UserStreamState& state, int td, const VideoConfig& vc) {
    if (td < 1) throw std::invalid_argument("waiting_time: transmission delay must be >= 1");
    const int drained = pos_part(state.buffer_slots - td);
    return pos_part(drained + vc.chunk_slots - state.buffer_threshold);
}

UserStreamState advance_request(UserStreamState state, int td, int wt, const VideoConfig& vc) {
    state.t_req = state.t_req + td + wt;
    state.buffer_slots = pos_part(pos_part(state.buffer_slots - td) + vc.chunk_slots - wt);
    state.chunk_index += 1;
    return state;
}

long rebuffering_delay(int td, int buffer_at_request) {
    return pos_part(static_cast<long>(td) - buffer_at_request);
}

int round_bitrate(double nu, const VideoConfig& vc) {
    const auto& rates = vc.quality_bitrates;
    const double clamped = std::clamp(nu, rates.front(), rates.back());
    int level = 1;
    for (std::size_t m = 0; m < rates.size(); ++m)
        if (rates[m] <= clamped) level = static_cast<int>(m) + 1;
    return level;
}

QoEReport qoe_chunk(const QualitySelection& sel, const std::set<std::size_t>& actual_tiles,
                    std::optional<double> prev_avg, long rebuffer, const QoEConfig& qc) {
    if (actual_tiles.empty()) throw std::domain_error("qoe_chunk: empty actual tile set");
    QoEReport rep;
    double sum = 0.0;
    for (std::size_t n : actual_tiles) sum += sel.level(n);
    const double count = static_cast<double>(actual_tiles.size());
    rep.avg_view_quality = sum / count;
    double var = 0.0;
    for (std::size_t n : actual_tiles) {
        const double d = sel.level(n) - rep.avg_view_quality;
        var += d * d;
    }
    rep.spatial_var = var / count;
    rep.temporal_switch = prev_avg ? std::abs(rep.avg_view_quality - *prev_avg) : 0.0;
    rep.rebuffer_slots = rebuffer;
    rep.qoe = rep.avg_view_quality - qc.lambda_spatial * rep.spatial_var -
              qc.lambda_temp * rep.temporal_switch -
              qc.lambda_rd * static_cast<double>(rep.rebuffer_slots);
    return rep;
}

}  // namespace thz360
