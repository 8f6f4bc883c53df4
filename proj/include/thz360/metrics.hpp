// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#ifndef THZ360_METRICS_HPP
#define THZ360_METRICS_HPP

#include <string>
#include <vector>

namespace thz360 {

struct MetricsTable {
    double avg_viewport_quality = 0.0;
    double intra_chunk_switch = 0.0;
    double inter_chunk_switch = 0.0;
    double avg_rebuffering_slots = 0.0;
    double avg_sum_rate_bps = 0.0;
    double avg_qoe = 0.0;
    double tiles_overlap = 0.0;
    std::vector<double> qoe_samples;  // per episode and user, for the distribution curves
};

/// Fraction of values strictly above each threshold.
std::vector<double> ccdf(const std::vector<double>& values,
                         const std::vector<double>& thresholds);

/// Fraction of values at or below each threshold; complements ccdf.
std::vector<double> cdf(const std::vector<double>& values,
                        const std::vector<double>& thresholds);

/// One row per run in a fixed column order; appends when the file exists.
void append_metrics_csv(const std::string& path, const std::string& run_id,
                        const MetricsTable& m);

/// threshold,cdf,ccdf rows for the QoE samples.
void write_distribution_csv(const std::string& path, const MetricsTable& m,
                            const std::vector<double>& thresholds);

}  // namespace thz360

#endif  // THZ360_METRICS_HPP
