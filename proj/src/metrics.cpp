// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <sys/stat.h>

namespace thz360 {

std::vector<double> ccdf(const std::vector<double>& values,
                         const std::vector<double>& thresholds) {
    if (values.empty()) throw std::invalid_argument("ccdf: no values");
    std::vector<double> out;
    out.reserve(thresholds.size());
    for (double thr : thresholds) {
        std::size_t above = 0;
        for (double v : values) above += (v > thr);
        out.push_back(static_cast<double>(above) / static_cast<double>(values.size()));
    }
    return out;
}

std::vector<double> cdf(const std::vector<double>& values,
                        const std::vector<double>& thresholds) {
    std::vector<double> out = ccdf(values, thresholds);
    for (double& v : out) v = 1.0 - v;
    return out;
}

void append_metrics_csv(const std::string& path, const std::string& run_id,
                        const MetricsTable& m) {
    struct stat st {};
    const bool exists = ::stat(path.c_str(), &st) == 0 && st.st_size > 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("append_metrics_csv: cannot open " + path);
    if (!exists)
        out << "run,avg_viewport_quality,intra_chunk_switch,inter_chunk_switch,"
               "avg_rebuffering_slots,avg_sum_rate_bps,avg_qoe,tiles_overlap\n";
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  run_id.c_str(), m.avg_viewport_quality, m.intra_chunk_switch,
                  m.inter_chunk_switch, m.avg_rebuffering_slots, m.avg_sum_rate_bps, m.avg_qoe,
                  m.tiles_overlap);
    out << buf;
}

void write_distribution_csv(const std::string& path, const MetricsTable& m,
                            const std::vector<double>& thresholds) {
    const auto up = ccdf(m.qoe_samples, thresholds);
    const auto down = cdf(m.qoe_samples, thresholds);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_distribution_csv: cannot open " + path);
    out << "threshold,cdf,ccdf\n";
    char buf[160];
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", thresholds[i], down[i], up[i]);
        out << buf;
    }
}

}  // namespace thz360
