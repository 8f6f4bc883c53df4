// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Head-movement trace file format: UTF-8 CSV with header
// user_id,video_id,frame_index,theta_rad,phi_rad.

#ifndef THZ360_TRACES_HPP
#define THZ360_TRACES_HPP

#include <map>
#include <string>
#include <vector>

#include "thz360/phy.hpp"  // HeadPose

namespace thz360 {

/// traces[user][video] = per-frame poses.
using TraceTable = std::map<std::size_t, std::map<std::size_t, std::vector<HeadPose>>>;

void write_traces(const std::string& path, const TraceTable& traces);
TraceTable read_traces(const std::string& path);

/// Pose at a clamped frame index (traces never run out, they hold).
HeadPose trace_pose(const std::vector<HeadPose>& frames, long frame);

}  // namespace thz360

#endif  // THZ360_TRACES_HPP
