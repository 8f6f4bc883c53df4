// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Experiment drivers: scenario assembly, policy wiring, evaluation runs
// with CSV/JSONL outputs, and the training entry points behind the CLI.

#ifndef THZ360_HARNESS_HPP
#define THZ360_HARNESS_HPP

#include "thz360/config.hpp"
#include "thz360/metrics.hpp"

namespace thz360 {

/// Runs the per-user prediction model at each chunk request and serves
/// per-frame pose predictions from the cached window; frames at or before
/// the request come from the measured history.
class ModelPosePredictor : public PosePredictor {
  public:
    ModelPosePredictor(const PoseSource& src, std::vector<HeadModel> models);
    void on_request(std::size_t user, long f_now) override;
    HeadPose predicted_pose(std::size_t user, long frame) override;
    void reset() override;

  private:
    const PoseSource* src_;
    std::vector<HeadModel> models_;
    std::vector<long> anchor_;
    std::vector<std::vector<HeadPose>> window_;
};

/// Head-movement traces for all configured users (persona-assigned
/// round-robin), loaded from the configured CSV when present and
/// synthesized from the seed otherwise.
TraceTable build_traces(const ExperimentConfig& cfg);

void generate_trace_file(const ExperimentConfig& cfg, const std::string& path);

/// One SMAP file per video under dir, from the synthetic generator.
void generate_saliency_files(const ExperimentConfig& cfg, const std::string& dir);

/// Federated head-predictor training; writes per-user checkpoints and a
/// round-loss CSV under <out>/<headpred_dir>. Returns the mean per-user
/// test loss on the held-out videos.
double train_headpred(const ExperimentConfig& cfg, const std::string& out_dir);

/// Hierarchical DRL training; writes actor checkpoints and the training
/// curve CSV under <out>/<drl_dir>.
void train_drl_policies(const ExperimentConfig& cfg, const std::string& out_dir);

/// Evaluation episodes under the configured policies; writes metrics.csv,
/// qoe_distribution.csv and episodes.jsonl under out_dir.
MetricsTable run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                            const std::string& run_id);

}  // namespace thz360

#endif  // THZ360_HARNESS_HPP
