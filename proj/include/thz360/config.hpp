// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Experiment configuration: strict JSON (unknown keys are rejected so
// sweep-script typos surface immediately), every field defaulted to the
// simulation setup the repository documents.

#ifndef THZ360_CONFIG_HPP
#define THZ360_CONFIG_HPP

#include <string>

#include "thz360/baselines.hpp"
#include "thz360/env.hpp"
#include "thz360/headpred.hpp"
#include "thz360/hddpg.hpp"
#include "thz360/saliency.hpp"

namespace thz360 {

struct TraceGenConfig {
    std::size_t personas = 4;
    std::size_t frames_per_video = 1800;
    double pull = 0.05;
    double noise = 0.03;
    long switch_every = 150;
    std::string file;  // optional CSV; empty = synthesize in memory
};

struct HeadPredTrainConfig {
    HeadModelConfig model;
    int rounds = 10;
    int local_iters = 2;
    double lr = 0.01;
    int fine_tune_iters = 10;
    std::vector<std::size_t> train_videos = {0, 1, 2};
    std::vector<std::size_t> test_videos = {3};
};

struct PolicyChoice {
    std::string bitrate = "drl";        // drl | priority
    std::string beamforming = "drl";    // drl | wmmse
    std::string predictor = "oracle";   // oracle | persistence | pfl | fedavg
    bool reactive_blockage = false;     // lagged blockage belief for the beamformer
    int blockage_delay_slots = 3;       // 300 ms at 100 ms slots
};

struct EvalConfig {
    long episodes = 5;
    std::vector<double> qoe_thresholds = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
    std::vector<std::uint64_t> sweep_seeds = {1, 2, 3};
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    EnvConfig env;                        // phy, geometry, video, qoe, reward, fusion
    std::size_t n_users = 6;              // auto-placed when user_positions is empty
    double room_x = 10.0, room_y = 10.0;  // floor of the indoor environment
    double user_height = 1.6;
    std::size_t n_videos = 4;
    SyntheticSaliencyConfig saliency;
    std::string saliency_dir;  // optional SMAP directory; empty = synthetic
    TraceGenConfig traces;
    HeadPredTrainConfig headpred;
    TrainConfig train;
    WmmseConfig wmmse;
    PolicyChoice policy;
    EvalConfig eval;
    std::string headpred_dir = "headpred";  // checkpoint directory (under out)
    std::string drl_dir = "drl";

    void finalize();  // derived fields, placement, validation
};

/// Parse strict JSON text (not a path) into a config; unknown keys throw
/// with their field path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// Users placed at the centres of a rows-by-cols split of the floor.
std::vector<Point3> place_users(std::size_t n_users, double room_x, double room_y,
                                double height);

/// Named policy presets for the --policy flag.
void apply_policy_preset(ExperimentConfig& cfg, const std::string& preset);

}  // namespace thz360

#endif  // THZ360_CONFIG_HPP
