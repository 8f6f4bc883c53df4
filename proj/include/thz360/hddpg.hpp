// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Two deterministic-policy learners trained at different time scales: a
// per-agent recurrent DDPG over completed macro-actions (bitrates, with
// duration-aware discounting and an individual centralized critic) and a
// joint-agent recurrent DDPG over per-slot beamforming. Sampled windows
// of consecutive tuples rebuild the recurrent state during updates.

#ifndef THZ360_HDDPG_HPP
#define THZ360_HDDPG_HPP

#include "thz360/env.hpp"
#include "thz360/nn.hpp"

namespace thz360 {

struct DrlNetConfig {
    std::size_t agent_hidden = 32;  // recurrent width of each agent's nets
    std::size_t agent_fc = 32;
    std::size_t joint_hidden = 64;
    std::size_t joint_fc = 64;
};

struct TrainConfig {
    long episodes = 50;        // E^max
    long warmup_slots = 200;   // random exploration before learning
    std::size_t batch_macro = 8;
    std::size_t batch_prim = 8;
    double soft_eps = 0.01;
    double lr_actor = 1e-4;
    double lr_critic = 1e-4;
    double gamma = 0.99;
    double ou_theta = 0.1;
    double ou_sigma = 0.15;
    DrlNetConfig nets;
    std::size_t buffer_capacity = 200000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AgentNets {
    nn::Network actor, critic, target_actor, target_critic;
};

struct JointNets {
    nn::Network actor, critic, target_actor, target_critic;
};

/// Blend target parameters toward the online ones: t <- eps*o + (1-eps)*t.
void soft_update(const std::vector<double>& online, std::vector<double>& target, double eps);

/// TD targets for a window of any-agent-completion tuples: cumulative
/// reward plus gamma^duration times the target critic's value at the
/// follow-up history, with the bootstrap dropped on terminal tuples.
std::vector<double> macro_td_target(const MacCertsBuffer& buf,
                                    const std::vector<std::size_t>& window, std::size_t agent,
                                    const std::vector<nn::Network>& target_actors,
                                    const nn::Network& target_critic, double gamma);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> d_params;
};

/// Mean squared TD error of one agent's centralized critic over a window,
/// with its exact parameter gradient.
LossGrad macro_critic_loss_grad(const MacCertsBuffer& buf,
                                const std::vector<std::size_t>& window, std::size_t agent,
                                const std::vector<nn::Network>& target_actors,
                                const nn::Network& critic, const nn::Network& target_critic,
                                double gamma);

/// Deterministic policy gradient for one agent's actor: ascend the critic
/// value with the agent's stored action replaced by the actor output,
/// other agents' actions taken from the tuples.
LossGrad macro_actor_loss_grad(const MacCertsBuffer& buf,
                               const std::vector<std::size_t>& window, std::size_t agent,
                               const nn::Network& actor, const nn::Network& critic,
                               std::size_t obs_dim, std::size_t act_dim, std::size_t n_users);

/// Same pair for the joint beamforming learner; the critic conditions on
/// the joint macro-action as an extra input feature.
LossGrad prim_critic_loss_grad(const PrimReplayBuffer& buf,
                               const std::vector<std::size_t>& window,
                               const nn::Network& target_actor, const nn::Network& critic,
                               const nn::Network& target_critic, double gamma);
LossGrad prim_actor_loss_grad(const PrimReplayBuffer& buf,
                              const std::vector<std::size_t>& window, const nn::Network& actor,
                              const nn::Network& critic, std::size_t obs_len,
                              std::size_t act_len);

struct TrainCurvePoint {
    long episode = 0;
    double mean_extr = 0.0;
    double mean_intr = 0.0;
    double macro_critic_loss = 0.0;
    double prim_critic_loss = 0.0;
};

struct TrainResult {
    std::vector<AgentNets> agents;
    JointNets joint;
    std::vector<TrainCurvePoint> curve;
};

class HierarchicalTrainer {
  public:
    HierarchicalTrainer(Environment& env, TrainConfig cfg);

    TrainResult train();

    // update primitives, exposed so the pieces can be verified directly
    void update_macro_critic(std::size_t agent, const std::vector<std::size_t>& window);
    void update_macro_actor(std::size_t agent, const std::vector<std::size_t>& window);
    void update_prim(const std::vector<std::size_t>& window);

    MacCertsBuffer& macro_buffer() { return macro_buf_; }
    PrimReplayBuffer& prim_buffer() { return prim_buf_; }
    std::vector<AgentNets>& agents() { return agents_; }
    JointNets& joint() { return joint_; }

  private:
    void build_networks();
    void run_episode(long episode_id, bool random_policy, bool learn,
                     TrainCurvePoint* point);
    std::vector<nn::Network> target_actor_list() const;

    Environment* env_;
    TrainConfig cfg_;
    Rng rng_;
    std::vector<AgentNets> agents_;
    JointNets joint_;
    std::vector<nn::AdamState> agent_actor_opt_, agent_critic_opt_;
    nn::AdamState joint_actor_opt_, joint_critic_opt_;
    MacCertsBuffer macro_buf_;
    PrimReplayBuffer prim_buf_;
    long episode_counter_ = 0;
    double last_macro_loss_ = 0.0;
    double last_prim_loss_ = 0.0;
};

/// Greedy rollout of trained (or random) policies for evaluation; returns
/// the per-slot results of one episode.
struct EpisodePolicies {
    const std::vector<AgentNets>* agents = nullptr;  // null = random macro
    const JointNets* joint = nullptr;                // null = random beams
};
std::vector<SlotResult> rollout_episode(Environment& env, long episode_id,
                                        const EpisodePolicies& pol, Rng& rng);

}  // namespace thz360

#endif  // THZ360_HDDPG_HPP
