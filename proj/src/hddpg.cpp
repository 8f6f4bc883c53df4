// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/hddpg.hpp"

#include <algorithm>
#include <cmath>

namespace thz360 {

namespace {

// hidden state of every GRU layer just before step `ts`, from a cache
nn::Hidden hidden_before_step(const nn::Network& net, const nn::ForwardCache& cache,
                              std::size_t ts) {
    nn::Hidden h;
    for (std::size_t li = 1; li < net.layer_count(); ++li)
        if (net.spec()[li].kind == nn::LayerKind::Gru) h.push_back(cache.hprev[li][ts]);
    return h;
}

std::vector<double> concat_all(const std::vector<std::vector<double>>& parts) {
    std::vector<double> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<std::vector<double>> macro_inputs(const MacCertsBuffer& buf,
                                              const std::vector<std::size_t>& window) {
    std::vector<std::vector<double>> seq;
    seq.reserve(window.size());
    for (std::size_t idx : window) {
        const MacroRecord& r = buf.at(idx);
        std::vector<double> x = concat_all(r.obs);
        const std::vector<double> a = concat_all(r.act);
        x.insert(x.end(), a.begin(), a.end());
        seq.push_back(std::move(x));
    }
    return seq;
}

std::vector<std::vector<double>> prim_inputs(const PrimReplayBuffer& buf,
                                             const std::vector<std::size_t>& window) {
    std::vector<std::vector<double>> seq;
    seq.reserve(window.size());
    for (std::size_t idx : window) {
        const PrimSlotRecord& r = buf.at(idx);
        std::vector<double> x = r.obs;
        x.insert(x.end(), r.act_raw.begin(), r.act_raw.end());
        x.insert(x.end(), r.macro_raw.begin(), r.macro_raw.end());
        seq.push_back(std::move(x));
    }
    return seq;
}

}  // namespace

void TrainConfig::validate() const {
    if (episodes < 1) throw std::invalid_argument("TrainConfig: episodes must be >= 1");
    if (soft_eps <= 0.0 || soft_eps >= 1.0)
        throw std::invalid_argument("TrainConfig: soft update constant outside (0,1)");
    if (batch_macro == 0 || batch_prim == 0)
        throw std::invalid_argument("TrainConfig: empty minibatch");
    if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("TrainConfig: bad gamma");
}

void soft_update(const std::vector<double>& online, std::vector<double>& target, double eps) {
    if (online.size() != target.size()) throw std::invalid_argument("soft_update: size mismatch");
    for (std::size_t i = 0; i < online.size(); ++i)
        target[i] = eps * online[i] + (1.0 - eps) * target[i];
}

std::vector<double> macro_td_target(const MacCertsBuffer& buf,
                                    const std::vector<std::size_t>& window, std::size_t agent,
                                    const std::vector<nn::Network>& target_actors,
                                    const nn::Network& target_critic, double gamma) {
    const std::size_t n_users = target_actors.size();
    const std::size_t count = window.size();

    // next actions from the target actors, each replayed over the window
    std::vector<std::vector<std::vector<double>>> next_actions(n_users);
    for (std::size_t u = 0; u < n_users; ++u) {
        std::vector<std::vector<double>> seq;
        seq.reserve(count);
        for (std::size_t idx : window) seq.push_back(buf.at(idx).next_obs[u]);
        next_actions[u] = nn::forward(target_actors[u], seq, {}).outputs;
    }

    std::vector<std::vector<double>> next_inputs;
    next_inputs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const MacroRecord& r = buf.at(window[i]);
        std::vector<double> x = concat_all(r.next_obs);
        for (std::size_t u = 0; u < n_users; ++u)
            x.insert(x.end(), next_actions[u][i].begin(), next_actions[u][i].end());
        next_inputs.push_back(std::move(x));
    }
    const auto q_next = nn::forward(target_critic, next_inputs, {}).outputs;

    std::vector<double> target(count);
    for (std::size_t i = 0; i < count; ++i) {
        const MacroRecord& r = buf.at(window[i]);
        target[i] = r.r_cum.at(agent);
        if (!r.terminal)
            target[i] += std::pow(gamma, static_cast<double>(r.elapsed.at(agent))) *
                         q_next[i][0];
    }
    return target;
}

LossGrad macro_critic_loss_grad(const MacCertsBuffer& buf,
                                const std::vector<std::size_t>& window, std::size_t agent,
                                const std::vector<nn::Network>& target_actors,
                                const nn::Network& critic, const nn::Network& target_critic,
                                double gamma) {
    const std::vector<double> target =
        macro_td_target(buf, window, agent, target_actors, target_critic, gamma);
    const auto inputs = macro_inputs(buf, window);

    nn::ForwardCache cache;
    const auto q = nn::forward(critic, inputs, {}, &cache).outputs;

    const double inv = 1.0 / static_cast<double>(window.size());
    LossGrad out;
    std::vector<std::vector<double>> dq(window.size(), std::vector<double>(1, 0.0));
    for (std::size_t i = 0; i < window.size(); ++i) {
        const double resid = q[i][0] - target[i];
        out.loss += resid * resid * inv;
        dq[i][0] = 2.0 * resid * inv;
    }
    out.d_params = nn::backward(critic, cache, dq).d_params;
    return out;
}

LossGrad macro_actor_loss_grad(const MacCertsBuffer& buf,
                               const std::vector<std::size_t>& window, std::size_t agent,
                               const nn::Network& actor, const nn::Network& critic,
                               std::size_t obs_dim, std::size_t act_dim, std::size_t n_users) {
    const std::size_t count = window.size();
    std::vector<std::vector<double>> own_obs;
    own_obs.reserve(count);
    for (std::size_t idx : window) own_obs.push_back(buf.at(idx).obs[agent]);

    nn::ForwardCache actor_cache;
    const auto actions = nn::forward(actor, own_obs, {}, &actor_cache).outputs;

    // critic replayed over the stored joint tuples; substitution happens
    // per position from the cached recurrent state so each sample
    // contributes its own action gradient
    const auto stored_inputs = macro_inputs(buf, window);
    nn::ForwardCache critic_cache;
    nn::forward(critic, stored_inputs, {}, &critic_cache);

    const std::size_t act_offset = n_users * obs_dim + agent * act_dim;
    const double inv = 1.0 / static_cast<double>(count);
    LossGrad out;
    std::vector<std::vector<double>> d_actions(count, std::vector<double>(act_dim, 0.0));
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> x = stored_inputs[i];
        std::copy(actions[i].begin(), actions[i].end(),
                  x.begin() + static_cast<long>(act_offset));
        const nn::Hidden h0 = hidden_before_step(critic, critic_cache, i);
        nn::ForwardCache step_cache;
        const auto q = nn::forward(critic, {x}, h0, &step_cache).outputs;
        out.loss += -q[0][0] * inv;
        const auto bw = nn::backward(critic, step_cache, {{-inv}});
        for (std::size_t k = 0; k < act_dim; ++k)
            d_actions[i][k] = bw.d_inputs[0][act_offset + k];
    }
    out.d_params = nn::backward(actor, actor_cache, d_actions).d_params;
    return out;
}

LossGrad prim_critic_loss_grad(const PrimReplayBuffer& buf,
                               const std::vector<std::size_t>& window,
                               const nn::Network& target_actor, const nn::Network& critic,
                               const nn::Network& target_critic, double gamma) {
    const std::size_t count = window.size();
    std::vector<std::vector<double>> next_obs_seq;
    next_obs_seq.reserve(count);
    for (std::size_t idx : window) next_obs_seq.push_back(buf.at(idx).next_obs);
    const auto next_actions = nn::forward(target_actor, next_obs_seq, {}).outputs;

    std::vector<std::vector<double>> next_inputs;
    next_inputs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const PrimSlotRecord& r = buf.at(window[i]);
        std::vector<double> x = r.next_obs;
        x.insert(x.end(), next_actions[i].begin(), next_actions[i].end());
        x.insert(x.end(), r.next_macro_raw.begin(), r.next_macro_raw.end());
        next_inputs.push_back(std::move(x));
    }
    const auto q_next = nn::forward(target_critic, next_inputs, {}).outputs;

    const auto inputs = prim_inputs(buf, window);
    nn::ForwardCache cache;
    const auto q = nn::forward(critic, inputs, {}, &cache).outputs;

    const double inv = 1.0 / static_cast<double>(count);
    LossGrad out;
    std::vector<std::vector<double>> dq(count, std::vector<double>(1, 0.0));
    for (std::size_t i = 0; i < count; ++i) {
        const PrimSlotRecord& r = buf.at(window[i]);
        double target = r.r_intr;
        if (!r.terminal) target += gamma * q_next[i][0];
        const double resid = q[i][0] - target;
        out.loss += resid * resid * inv;
        dq[i][0] = 2.0 * resid * inv;
    }
    out.d_params = nn::backward(critic, cache, dq).d_params;
    return out;
}

LossGrad prim_actor_loss_grad(const PrimReplayBuffer& buf,
                              const std::vector<std::size_t>& window, const nn::Network& actor,
                              const nn::Network& critic, std::size_t obs_len,
                              std::size_t act_len) {
    const std::size_t count = window.size();
    std::vector<std::vector<double>> obs_seq;
    obs_seq.reserve(count);
    for (std::size_t idx : window) obs_seq.push_back(buf.at(idx).obs);
    nn::ForwardCache actor_cache;
    const auto actions = nn::forward(actor, obs_seq, {}, &actor_cache).outputs;

    const auto stored_inputs = prim_inputs(buf, window);
    nn::ForwardCache critic_cache;
    nn::forward(critic, stored_inputs, {}, &critic_cache);

    const double inv = 1.0 / static_cast<double>(count);
    LossGrad out;
    std::vector<std::vector<double>> d_actions(count, std::vector<double>(act_len, 0.0));
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> x = stored_inputs[i];
        std::copy(actions[i].begin(), actions[i].end(), x.begin() + static_cast<long>(obs_len));
        const nn::Hidden h0 = hidden_before_step(critic, critic_cache, i);
        nn::ForwardCache step_cache;
        const auto q = nn::forward(critic, {x}, h0, &step_cache).outputs;
        out.loss += -q[0][0] * inv;
        const auto bw = nn::backward(critic, step_cache, {{-inv}});
        for (std::size_t k = 0; k < act_len; ++k)
            d_actions[i][k] = bw.d_inputs[0][obs_len + k];
    }
    out.d_params = nn::backward(actor, actor_cache, d_actions).d_params;
    return out;
}

HierarchicalTrainer::HierarchicalTrainer(Environment& env, TrainConfig cfg)
    : env_(&env),
      cfg_(std::move(cfg)),
      rng_(cfg_.seed),
      macro_buf_(cfg_.buffer_capacity),
      prim_buf_(cfg_.buffer_capacity),
      joint_actor_opt_(nn::AdamState::for_params(0, cfg_.lr_actor)),
      joint_critic_opt_(nn::AdamState::for_params(0, cfg_.lr_critic)) {
    cfg_.validate();
    build_networks();
}

void HierarchicalTrainer::build_networks() {
    const std::size_t users = env_->n_users();
    const std::size_t mo = env_->macro_obs_dim(), ma = env_->macro_act_dim();
    const std::size_t po = env_->prim_obs_dim(), pa = env_->prim_act_dim();

    auto actor_spec = [](std::size_t in, std::size_t hid, std::size_t fc, std::size_t out) {
        return nn::parse_spec("in:" + std::to_string(in) + "|gru:" + std::to_string(hid) +
                              "|lrelu|fc:" + std::to_string(fc) + "|lrelu|fc:" +
                              std::to_string(out) + "|tanh");
    };
    auto critic_spec = [](std::size_t in, std::size_t hid, std::size_t fc) {
        return nn::parse_spec("in:" + std::to_string(in) + "|gru:" + std::to_string(hid) +
                              "|lrelu|fc:" + std::to_string(fc) + "|lrelu|fc:1");
    };

    agents_.clear();
    agent_actor_opt_.clear();
    agent_critic_opt_.clear();
    for (std::size_t u = 0; u < users; ++u) {
        AgentNets nets;
        nets.actor = nn::Network::random(
            actor_spec(mo, cfg_.nets.agent_hidden, cfg_.nets.agent_fc, ma), rng_);
        nets.critic = nn::Network::random(
            critic_spec(users * (mo + ma), cfg_.nets.agent_hidden, cfg_.nets.agent_fc), rng_);
        nets.target_actor = nets.actor;
        nets.target_critic = nets.critic;
        agent_actor_opt_.push_back(nn::AdamState::for_params(nets.actor.n_params(), cfg_.lr_actor));
        agent_critic_opt_.push_back(
            nn::AdamState::for_params(nets.critic.n_params(), cfg_.lr_critic));
        agents_.push_back(std::move(nets));
    }

    joint_.actor = nn::Network::random(
        actor_spec(users * po, cfg_.nets.joint_hidden, cfg_.nets.joint_fc, users * pa), rng_);
    joint_.critic = nn::Network::random(
        critic_spec(users * (po + pa) + users * ma, cfg_.nets.joint_hidden, cfg_.nets.joint_fc),
        rng_);
    joint_.target_actor = joint_.actor;
    joint_.target_critic = joint_.critic;
    joint_actor_opt_ = nn::AdamState::for_params(joint_.actor.n_params(), cfg_.lr_actor);
    joint_critic_opt_ = nn::AdamState::for_params(joint_.critic.n_params(), cfg_.lr_critic);
}

std::vector<nn::Network> HierarchicalTrainer::target_actor_list() const {
    std::vector<nn::Network> list;
    list.reserve(agents_.size());
    for (const auto& a : agents_) list.push_back(a.target_actor);
    return list;
}

void HierarchicalTrainer::update_macro_critic(std::size_t agent,
                                              const std::vector<std::size_t>& window) {
    const auto targets = target_actor_list();
    LossGrad lg = macro_critic_loss_grad(macro_buf_, window, agent, targets,
                                         agents_[agent].critic, agents_[agent].target_critic,
                                         cfg_.gamma);
    nn::adam_step(agents_[agent].critic.params(), lg.d_params, agent_critic_opt_[agent]);
    last_macro_loss_ = lg.loss;
}

void HierarchicalTrainer::update_macro_actor(std::size_t agent,
                                             const std::vector<std::size_t>& window) {
    LossGrad lg = macro_actor_loss_grad(macro_buf_, window, agent, agents_[agent].actor,
                                        agents_[agent].critic, env_->macro_obs_dim(),
                                        env_->macro_act_dim(), env_->n_users());
    nn::adam_step(agents_[agent].actor.params(), lg.d_params, agent_actor_opt_[agent]);
}

void HierarchicalTrainer::update_prim(const std::vector<std::size_t>& window) {
    LossGrad lg = prim_critic_loss_grad(prim_buf_, window, joint_.target_actor, joint_.critic,
                                        joint_.target_critic, cfg_.gamma);
    nn::adam_step(joint_.critic.params(), lg.d_params, joint_critic_opt_);
    last_prim_loss_ = lg.loss;

    const std::size_t obs_len = env_->n_users() * env_->prim_obs_dim();
    const std::size_t act_len = env_->n_users() * env_->prim_act_dim();
    LossGrad ag =
        prim_actor_loss_grad(prim_buf_, window, joint_.actor, joint_.critic, obs_len, act_len);
    nn::adam_step(joint_.actor.params(), ag.d_params, joint_actor_opt_);
}

void HierarchicalTrainer::run_episode(long episode_id, bool random_policy, bool learn,
                                      TrainCurvePoint* point) {
    env_->reset(episode_id);
    const std::size_t users = env_->n_users();
    std::uniform_real_distribution<double> uact(-1.0, 1.0);

    std::vector<nn::Hidden> actor_hidden(users);
    for (std::size_t u = 0; u < users; ++u) actor_hidden[u] = agents_[u].actor.zero_hidden();
    nn::Hidden joint_hidden = joint_.actor.zero_hidden();

    std::vector<nn::OuNoise> macro_noise(
        users, nn::OuNoise(env_->macro_act_dim(), cfg_.ou_theta, cfg_.ou_sigma));
    nn::OuNoise prim_noise(users * env_->prim_act_dim(), cfg_.ou_theta, cfg_.ou_sigma);

    double sum_extr = 0.0, sum_intr = 0.0, sum_macro_loss = 0.0, sum_prim_loss = 0.0;
    long updates = 0;

    for (long t = 1; t <= env_->config().t_max; ++t) {
        for (const auto& req : env_->pending_requests()) {
            std::vector<double> raw(env_->macro_act_dim());
            if (random_policy) {
                for (double& x : raw) x = uact(rng_);
            } else {
                const auto obs = req.obs.to_vector(env_->config().video.n_levels(),
                                                   env_->config().buffer_threshold);
                nn::ForwardResult fr =
                    nn::forward(agents_[req.user].actor, {obs}, actor_hidden[req.user]);
                actor_hidden[req.user] = fr.h_final;
                const auto& noise = macro_noise[req.user].step(rng_);
                for (std::size_t k = 0; k < raw.size(); ++k)
                    raw[k] = std::clamp(fr.outputs[0][k] + noise[k], -1.0, 1.0);
            }
            env_->set_macro_action(req.user, raw);
        }

        std::vector<double> prim_raw(users * env_->prim_act_dim());
        if (random_policy) {
            for (double& x : prim_raw) x = uact(rng_);
        } else {
            const auto obs = env_->prim_observation_joint();
            nn::ForwardResult fr = nn::forward(joint_.actor, {obs}, joint_hidden);
            joint_hidden = fr.h_final;
            const auto& noise = prim_noise.step(rng_);
            for (std::size_t k = 0; k < prim_raw.size(); ++k)
                prim_raw[k] = std::clamp(fr.outputs[0][k] + noise[k], -1.0, 1.0);
        }
        env_->set_prim_action(prim_raw);

        SlotResult res = env_->finish_slot();
        sum_extr += res.r_extr;
        sum_intr += res.r_intr;

        MacroRecord rec;
        rec.episode = episode_id;
        rec.t = res.t;
        rec.terminal = res.terminal;
        for (const auto& ar : res.agent_records) {
            rec.obs.push_back(ar.obs);
            rec.act.push_back(ar.act_raw);
            rec.next_obs.push_back(ar.next_obs);
            rec.r_cum.push_back(ar.r_cum);
            rec.elapsed.push_back(ar.elapsed);
            rec.completed.push_back(ar.completed ? 1 : 0);
        }
        macro_buf_.push(std::move(rec));
        for (auto& pr : res.prim_records) prim_buf_.push(std::move(pr));

        if (learn) {
            auto has_window = [](std::size_t view, std::size_t count) { return view >= count; };
            const auto any_view = macro_buf_.filter_any();
            bool updated = false;
            for (std::size_t u = 0; u < users; ++u) {
                const auto own_view = macro_buf_.filter_agent(u);
                if (has_window(any_view.size(), cfg_.batch_macro) &&
                    has_window(own_view.size(), cfg_.batch_macro)) {
                    try {
                        update_macro_critic(
                            u, macro_buf_.sample_window(any_view, cfg_.batch_macro, rng_));
                        update_macro_actor(
                            u, macro_buf_.sample_window(own_view, cfg_.batch_macro, rng_));
                        updated = true;
                    } catch (const std::runtime_error&) {
                        // no in-episode window yet; keep collecting
                    }
                }
            }
            if (prim_buf_.size() >= cfg_.batch_prim) {
                try {
                    update_prim(prim_buf_.sample_window(cfg_.batch_prim, rng_));
                    updated = true;
                } catch (const std::runtime_error&) {
                }
            }
            if (updated) {
                for (std::size_t u = 0; u < users; ++u) {
                    soft_update(agents_[u].critic.params(),
                                agents_[u].target_critic.params(), cfg_.soft_eps);
                    soft_update(agents_[u].actor.params(), agents_[u].target_actor.params(),
                                cfg_.soft_eps);
                }
                soft_update(joint_.critic.params(), joint_.target_critic.params(),
                            cfg_.soft_eps);
                soft_update(joint_.actor.params(), joint_.target_actor.params(), cfg_.soft_eps);
                sum_macro_loss += last_macro_loss_;
                sum_prim_loss += last_prim_loss_;
                ++updates;
            }
        }
    }

    if (point) {
        point->episode = episode_id;
        const double inv_t = 1.0 / static_cast<double>(env_->config().t_max);
        point->mean_extr = sum_extr * inv_t;
        point->mean_intr = sum_intr * inv_t;
        point->macro_critic_loss = updates ? sum_macro_loss / static_cast<double>(updates) : 0.0;
        point->prim_critic_loss = updates ? sum_prim_loss / static_cast<double>(updates) : 0.0;
    }
}

TrainResult HierarchicalTrainer::train() {
    // random exploration fills the buffers before any gradient step
    long warm_slots = 0;
    while (warm_slots < cfg_.warmup_slots) {
        ++episode_counter_;
        run_episode(episode_counter_, /*random_policy=*/true, /*learn=*/false, nullptr);
        warm_slots += env_->config().t_max;
    }

    TrainResult res;
    for (long ep = 0; ep < cfg_.episodes; ++ep) {
        ++episode_counter_;
        TrainCurvePoint point;
        run_episode(episode_counter_, /*random_policy=*/false, /*learn=*/true, &point);
        res.curve.push_back(point);
    }
    res.agents = agents_;
    res.joint = joint_;
    return res;
}

std::vector<SlotResult> rollout_episode(Environment& env, long episode_id,
                                        const EpisodePolicies& pol, Rng& rng) {
    env.reset(episode_id);
    const std::size_t users = env.n_users();
    std::uniform_real_distribution<double> uact(-1.0, 1.0);

    std::vector<nn::Hidden> actor_hidden(users);
    nn::Hidden joint_hidden;
    if (pol.agents)
        for (std::size_t u = 0; u < users; ++u)
            actor_hidden[u] = (*pol.agents)[u].actor.zero_hidden();
    if (pol.joint) joint_hidden = pol.joint->actor.zero_hidden();

    std::vector<SlotResult> slots;
    for (long t = 1; t <= env.config().t_max; ++t) {
        for (const auto& req : env.pending_requests()) {
            std::vector<double> raw(env.macro_act_dim());
            if (pol.agents) {
                const auto obs = req.obs.to_vector(env.config().video.n_levels(),
                                                   env.config().buffer_threshold);
                nn::ForwardResult fr =
                    nn::forward((*pol.agents)[req.user].actor, {obs}, actor_hidden[req.user]);
                actor_hidden[req.user] = fr.h_final;
                raw = fr.outputs[0];
            } else {
                for (double& x : raw) x = uact(rng);
            }
            env.set_macro_action(req.user, raw);
        }
        std::vector<double> prim_raw(users * env.prim_act_dim());
        if (pol.joint) {
            const auto obs = env.prim_observation_joint();
            nn::ForwardResult fr = nn::forward(pol.joint->actor, {obs}, joint_hidden);
            joint_hidden = fr.h_final;
            prim_raw = fr.outputs[0];
        } else {
            for (double& x : prim_raw) x = uact(rng);
        }
        env.set_prim_action(prim_raw);
        slots.push_back(env.finish_slot());
    }
    return slots;
}

}  // namespace thz360
