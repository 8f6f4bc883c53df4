// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Benchmark policies: weighted-MMSE beamforming with per-AP power
// budgets, priority-based bitrate adaptation driven by a throughput
// estimate, and delayed (reactive) blockage detection.

#ifndef THZ360_BASELINES_HPP
#define THZ360_BASELINES_HPP

#include "thz360/fusion.hpp"
#include "thz360/phy.hpp"
#include "thz360/streaming.hpp"

namespace thz360 {

struct WmmseConfig {
    int max_iterations = 50;
    double tolerance = 1e-6;          // relative change of the weighted sum-rate
    double dual_tolerance = 1e-6;     // per-AP power feasibility, relative to p_max
    std::vector<double> rate_weights; // empty = equal weights

    void validate() const;
};

struct WmmseResult {
    BeamSet beams;
    int iterations = 0;
    bool converged = false;
    double weighted_sum_rate = 0.0;       // bits/s under the optimizer's model
    std::vector<double> rate_trace;       // after each iteration
};

/// Block-coordinate weighted-MMSE sum-rate maximization over the stacked
/// multi-AP beams. nb_sets are the AP sets the optimizer believes serve
/// each user; beams outside them stay zero. Per-AP power budgets are
/// enforced through cyclic bisection on the dual variables. On hitting
/// max_iterations without meeting the tolerance the best iterate is
/// returned with converged = false.
WmmseResult wmmse_beamforming(const std::vector<std::vector<ChannelMatrix>>& channels,
                              const std::vector<std::set<std::size_t>>& nb_sets,
                              const WmmseConfig& cfg, const PhyConfig& phy);

/// Highest common quality the estimated budget affords for the viewport
/// tiles (with the marginal floor reserved), then the best affordable
/// level at most that high for the marginal tiles. Everything gets at
/// least the lowest level.
QualitySelection priority_bitrate(const TilePrediction& tiles, double throughput_estimate_bps,
                                  const VideoConfig& vc);

/// Previous chunk bits over its realized delay.
double throughput_estimate(double prev_chunk_bits, int prev_td_slots, double slot_seconds);

/// Blockage belief that lags the actual sets by a fixed detection delay.
class ReactiveBlockage {
  public:
    explicit ReactiveBlockage(int delay_slots);

    void reset();
    /// Record the actual per-user sets for the current slot.
    void observe(std::vector<std::set<std::size_t>> actual);
    /// The sets as believed now: the actual sets from delay slots ago.
    const std::vector<std::set<std::size_t>>& believed() const;

  private:
    int delay_ = 0;
    std::vector<std::vector<std::set<std::size_t>>> history_;
};

}  // namespace thz360

#endif  // THZ360_BASELINES_HPP
