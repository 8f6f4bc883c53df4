// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Tile/chunk/bitrate bookkeeping, buffer and request-timing dynamics, and
// the per-chunk QoE model. All timing quantities are integer time slots.

#ifndef THZ360_STREAMING_HPP
#define THZ360_STREAMING_HPP

#include <optional>
#include <set>
#include <vector>

#include "thz360/common.hpp"

namespace thz360 {

struct VideoConfig {
    std::size_t tile_rows = 4;
    std::size_t tile_cols = 6;
    std::size_t n_frames_per_chunk = 10;        // F
    int chunk_slots = 10;                       // playback duration of a chunk, slots
    double slot_seconds = 0.1;
    std::vector<double> quality_bitrates =      // ascending, bits/s, level m = index+1
        {28e6, 33e6, 38e6, 43e6, 48e6};
    std::size_t n_chunks = 30;                  // chunks per video

    std::size_t n_tiles() const { return tile_rows * tile_cols; }
    std::size_t n_levels() const { return quality_bitrates.size(); }
    double chunk_seconds() const { return chunk_slots * slot_seconds; }
    void validate() const;
};

/// Per-tile quality level for one requested chunk: 0 = not sent, 1..M
/// otherwise. Level 0 exactly for tiles outside the predicted set.
struct QualitySelection {
    std::vector<int> levels;  // length n_tiles

    int level(std::size_t tile) const { return levels.at(tile); }
};

struct UserStreamState {
    int buffer_slots = 0;        // B_u at the current request instant
    std::size_t chunk_index = 1; // chunk currently being downloaded (1-based)
    long t_req = 1;              // request slot of the current chunk
    double delta_rem = 0.0;      // remaining bits of the requested chunk
    long delta_time = 0;         // slots left before stalling; may go negative
    int buffer_threshold = 30;   // B^THR
    double last_avg_quality = 1.0;  // mean transmitted level of the previous chunk
};

struct QoEConfig {
    double lambda_spatial = 0.5;
    double lambda_temp = 0.5;
    double lambda_rd = 0.5;
    void validate() const;
};

struct QoEReport {
    double avg_view_quality = 0.0;  // mean level over actually viewed tiles
    double spatial_var = 0.0;       // population variance of those levels
    double temporal_switch = 0.0;   // |mean_c - mean_{c-1}|
    long rebuffer_slots = 0;
    double qoe = 0.0;
};

/// Size in bits of one requested chunk under the given selection:
/// chunk_slots * slot_seconds * sum of selected tile bitrates.
double chunk_size_bits(const QualitySelection& sel, const VideoConfig& vc);

/// Number of slots (inclusive of the request slot, so always >= 1) needed
/// to deliver chunk_bits at the given per-slot rates. Returns nullopt when
/// the rate sequence never accumulates enough bits.
std::optional<int> transmission_delay(const std::vector<double>& rates_per_slot,
                                      double chunk_bits, double slot_seconds);

/// [[B - td]^+ + T_chunk - B_thr]^+ : slots the user idles after finishing
/// a download so its buffer stays at or below the threshold.
int waiting_time(const UserStreamState& state, int td, const VideoConfig& vc);

/// Advance the request bookkeeping to the next chunk given the realized
/// transmission delay and waiting time.
UserStreamState advance_request(UserStreamState state, int td, int wt, const VideoConfig& vc);

/// [td - buffer]^+ : stall length experienced when a download outlasts the
/// buffered playback.
long rebuffering_delay(int td, int buffer_at_request);

/// Largest level m with bitrate_m <= nu, after clamping nu into
/// [bitrate_1, bitrate_M]. Returns a 1-based level.
int round_bitrate(double nu, const VideoConfig& vc);

/// Per-chunk QoE. Tiles in the actually-viewed set that were never sent
/// count as level 0. prev_avg absent means this is the first chunk (no
/// temporal switch penalty).
QoEReport qoe_chunk(const QualitySelection& sel, const std::set<std::size_t>& actual_tiles,
                    std::optional<double> prev_avg, long rebuffer, const QoEConfig& qc);

}  // namespace thz360

#endif  // THZ360_STREAMING_HPP
