// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// GRU sequence-to-sequence head movement prediction. The model splits
// into a shared recurrent body (encoder + decoder) and a per-user FC
// head; federated training keeps the head frozen, aggregates the body,
// and personalizes by fine-tuning the full model locally.

#ifndef THZ360_HEADPRED_HPP
#define THZ360_HEADPRED_HPP

#include <array>

#include "thz360/nn.hpp"
#include "thz360/phy.hpp"  // HeadPose
#include "thz360/traces.hpp"

namespace thz360 {

struct HeadModelConfig {
    std::size_t q_hist = 30;   // input window, frames
    std::size_t q_pred = 40;   // prediction horizon, frames
    std::size_t d_gru = 16;    // hidden features per GRU cell
    std::size_t n_layers = 4;  // GRU layers in encoder and decoder

    void validate() const;
};

/// Angles are fed to the network as (theta, sin phi, cos phi) so the
/// longitude seam stays continuous; outputs decode through atan2.
std::array<double, 3> encode_pose(const HeadPose& pose);
HeadPose decode_output(const std::vector<double>& out3);

struct HeadModel {
    nn::Network encoder;  // in:3 | gru:d x n_layers
    nn::Network decoder;  // in:3 | gru:d x n_layers, seeded with the encoder state
    nn::Network head;     // in:d | fc:3, the personal part

    HeadModelConfig cfg;

    static HeadModel random(const HeadModelConfig& cfg, Rng& rng);

    std::size_t n_gru_params() const { return encoder.n_params() + decoder.n_params(); }
    std::vector<double> gru_params() const;
    void set_gru_params(const std::vector<double>& flat);

    /// Predicted poses for the next q_pred frames given the last q_hist
    /// observed poses. Theta clamps to [0, pi], phi wraps to [0, 2 pi).
    std::vector<HeadPose> predict(const std::vector<HeadPose>& hist) const;
};

struct TraceSample {
    std::vector<HeadPose> hist;
    std::vector<HeadPose> target;
};
using UserDataset = std::vector<TraceSample>;

/// Mean over sequences of the squared sequence distance; per step the
/// theta difference is plain and the phi difference takes the shortest
/// arc.
double head_loss(const std::vector<std::vector<HeadPose>>& preds,
                 const std::vector<std::vector<HeadPose>>& actuals);

struct HeadGradient {
    std::vector<double> d_gru;  // encoder params then decoder params
    std::vector<double> d_fc;
    double loss = 0.0;
};

/// Full-batch loss and exact gradient of head_loss over the dataset.
HeadGradient head_gradient(const HeadModel& model, const UserDataset& data);

/// iters plain gradient steps on the shared body only; the FC head stays
/// untouched.
void local_update(HeadModel& model, const UserDataset& data, int iters, double lr);

/// iters plain gradient steps on the full model (personalization).
void fine_tune(HeadModel& model, const UserDataset& data, int iters, double lr);

/// Convex combination of parameter vectors; accumulates in extended
/// precision so the result does not depend on user order.
std::vector<double> aggregate(const std::vector<std::vector<double>>& parts,
                              const std::vector<double>& alpha);

/// alpha_u proportional to the chunk count covered by each user's
/// training data.
std::vector<double> aggregation_weights(const std::vector<std::size_t>& chunk_counts);

struct PflConfig {
    int rounds = 50;          // R
    int local_iters = 3;      // rho
    double lr = 0.01;         // eta^head
    int fine_tune_iters = 10;
    HeadModelConfig model;
    std::uint64_t seed = 0;
};

struct PflResult {
    std::vector<HeadModel> personalized;  // per user, after fine-tuning
    HeadModel global;                     // shared body + the common initial head
    std::vector<double> round_loss;       // mean training loss per round
};

/// Federated rounds with a frozen personal head, then local fine-tuning.
PflResult train_pfl(const PflConfig& cfg, const std::vector<UserDataset>& data,
                    const std::vector<double>& alpha);

/// Plain federated averaging of the full parameter vector, no
/// personalization; returned as the model every user shares.
PflResult train_fedavg(const PflConfig& cfg, const std::vector<UserDataset>& data,
                       const std::vector<double>& alpha);

// ---- synthetic head-movement traces ----

struct Persona {
    std::vector<HeadPose> attractors;  // gaze targets this viewer drifts between
    double pull = 0.05;                // fraction of the remaining arc covered per frame
    double noise = 0.03;               // per-frame angle jitter, rad
    long switch_every = 150;           // frames between attractor hops
};

/// Personas with well-separated attractor clusters; the heterogeneity
/// knob for federated experiments.
std::vector<Persona> default_personas(std::size_t n, Rng& rng);

/// Drifting random walk on the sphere toward persona attractors, one
/// trace per (user, video). Deterministic per seed.
TraceTable generate_traces(const std::vector<Persona>& personas, std::size_t n_videos,
                           std::size_t frames_per_video, std::uint64_t seed);

/// Non-overlapping contiguous (hist -> target) windows from the traces.
UserDataset build_user_dataset(const TraceTable& traces, std::size_t user,
                               const std::vector<std::size_t>& videos, std::size_t q_hist,
                               std::size_t q_pred);

}  // namespace thz360

#endif  // THZ360_HEADPRED_HPP
