// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/traces.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace thz360 {

void write_traces(const std::string& path, const TraceTable& traces) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_traces: cannot open " + path);
    out << "user_id,video_id,frame_index,theta_rad,phi_rad\n";
    char buf[160];
    for (const auto& [user, per_video] : traces)
        for (const auto& [video, frames] : per_video)
            for (std::size_t f = 0; f < frames.size(); ++f) {
                std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%.12g,%.12g\n", user, video, f,
                              frames[f].theta, frames[f].phi);
                out << buf;
            }
    if (!out) throw std::runtime_error("write_traces: write failed for " + path);
}

TraceTable read_traces(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_traces: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("user_id,video_id,frame_index", 0) != 0)
        throw std::runtime_error("read_traces: bad header in " + path);
    TraceTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::size_t user, video, frame;
        double theta, phi;
        std::getline(ss, field, ',');
        user = std::stoul(field);
        std::getline(ss, field, ',');
        video = std::stoul(field);
        std::getline(ss, field, ',');
        frame = std::stoul(field);
        std::getline(ss, field, ',');
        theta = std::stod(field);
        std::getline(ss, field, ',');
        phi = std::stod(field);
        auto& frames = table[user][video];
        if (frames.size() != frame)
            throw std::runtime_error("read_traces: non-contiguous frame indices in " + path);
        frames.push_back(HeadPose{theta, phi});
    }
    return table;
}

HeadPose trace_pose(const std::vector<HeadPose>& frames, long frame) {
    if (frames.empty()) throw std::invalid_argument("trace_pose: empty trace");
    if (frame < 0) frame = 0;
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(frame), frames.size() - 1);
    return frames[idx];
}

}  // namespace thz360
