// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/env.hpp"

#include <algorithm>
#include <cmath>

namespace thz360 {

void RewardConfig::validate() const {
    if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("RewardConfig: gamma outside (0,1]");
    if (lambda_intr < 0.0) throw std::invalid_argument("RewardConfig: lambda_intr must be non-negative");
}

void EnvConfig::validate() const {
    phy.validate();
    geo.validate();
    video.validate();
    qoe.validate();
    reward.validate();
    fusion.validate();
    if (tiling.n_tiles() != video.n_tiles())
        throw std::invalid_argument("EnvConfig: tiling does not match the video tile count");
    if (map_width % tiling.cols != 0 || map_height % tiling.rows != 0)
        throw std::invalid_argument("EnvConfig: tiling does not partition the feature map");
    if (buffer_threshold < 0) throw std::invalid_argument("EnvConfig: negative buffer threshold");
    if (t_max < 1) throw std::invalid_argument("EnvConfig: episode length must be >= 1");
    if (geo.user_positions.empty()) throw std::invalid_argument("EnvConfig: no users");
}

std::vector<double> MacroObservation::to_vector(std::size_t n_levels,
                                                int buffer_threshold) const {
    std::vector<double> v;
    v.reserve(indicator.size() + avg_feature.size() + 2);
    for (int b : indicator) v.push_back(static_cast<double>(b));
    for (double f : avg_feature) v.push_back(f);
    v.push_back(prev_avg_quality / static_cast<double>(n_levels));
    v.push_back(buffer_threshold > 0
                    ? static_cast<double>(buffer_at_request) / buffer_threshold
                    : 0.0);
    return v;
}

std::vector<double> PrimObservation::to_vector(double max_chunk_bits, int buffer_threshold,
                                               int chunk_slots) const {
    std::vector<double> v;
    v.reserve(nonblocked.size() + 2);
    for (int b : nonblocked) v.push_back(static_cast<double>(b));
    v.push_back(max_chunk_bits > 0.0 ? delta_rem / max_chunk_bits : 0.0);
    v.push_back(static_cast<double>(delta_time) /
                static_cast<double>(buffer_threshold + chunk_slots));
    return v;
}

double avg_transmitted_level(const QualitySelection& sel, const std::set<std::size_t>& pred) {
    if (pred.empty()) return 1.0;
    double mean = 0.0;
    for (std::size_t n : pred) mean += sel.levels.at(n);
    return mean / static_cast<double>(pred.size());
}

MacroObservation build_macro_obs(const TilePrediction& tiles, const UserStreamState& state) {
    MacroObservation obs;
    obs.indicator = tiles.indicator;
    obs.avg_feature = tiles.avg_feature;
    obs.prev_avg_quality = state.last_avg_quality;
    obs.buffer_at_request = state.buffer_slots;
    return obs;
}

PrimObservation build_prim_obs(std::size_t user, const HeadPose& predicted_pose,
                               const UserStreamState& state, const Geometry& geo) {
    PrimObservation obs;
    const auto nb = nonblocked_aps(predicted_pose, user, geo);
    obs.nonblocked.assign(geo.n_aps(), 0);
    for (std::size_t a : nb) obs.nonblocked[a] = 1;
    obs.delta_rem = state.delta_rem;
    obs.delta_time = state.delta_time;
    return obs;
}

UserStreamState update_stream_state(UserStreamState state, double delivered_bits) {
    if (state.delta_rem > 0.0) {
        state.delta_rem = pos_part(state.delta_rem - delivered_bits);
        state.delta_time -= 1;
    }
    return state;
}

std::pair<MacroAction, QualitySelection> apply_macro_action(const std::vector<double>& raw,
                                                            const TilePrediction& tiles,
                                                            const VideoConfig& vc) {
    if (raw.size() != vc.n_tiles())
        throw std::invalid_argument("apply_macro_action: raw action length mismatch");
    const double lo = vc.quality_bitrates.front();
    const double hi = vc.quality_bitrates.back();
    MacroAction action;
    action.bitrates.assign(vc.n_tiles(), 0.0);
    QualitySelection sel;
    sel.levels.assign(vc.n_tiles(), 0);
    for (std::size_t n : tiles.pred_set) {
        const double clipped = std::clamp(raw[n], -1.0, 1.0);
        const double nu = lo + 0.5 * (clipped + 1.0) * (hi - lo);
        action.bitrates[n] = nu;
        sel.levels[n] = round_bitrate(nu, vc);
    }
    return {action, sel};
}

BeamSet apply_prim_action(const std::vector<double>& raw, std::size_t n_users,
                          std::size_t n_aps, std::size_t n_tx, double p_max) {
    if (raw.size() != n_users * n_aps * n_tx * 2)
        throw std::invalid_argument("apply_prim_action: raw action length mismatch");
    // full-scale raw entries land on a per-beam norm of sqrt(p_max / n_users)
    const double gain = std::sqrt(p_max / (2.0 * static_cast<double>(n_users * n_tx)));
    BeamSet beams = BeamSet::zeros(n_users, n_aps, n_tx);
    std::size_t i = 0;
    for (std::size_t u = 0; u < n_users; ++u)
        for (std::size_t a = 0; a < n_aps; ++a)
            for (std::size_t k = 0; k < n_tx; ++k) {
                beams.beams[u][a](k) = gain * arma::cx_double(raw[i], raw[i + 1]);
                i += 2;
            }
    return project_power(std::move(beams), p_max);
}

double extrinsic_reward(const std::vector<double>& qoe_completing) {
    double r = 0.0;
    for (double q : qoe_completing) r += q;
    return r;
}

double intrinsic_reward(const std::vector<double>& rates, const std::vector<double>& delta_rem,
                        double lambda_intr, double slot_seconds) {
    if (rates.size() != delta_rem.size())
        throw std::invalid_argument("intrinsic_reward: size mismatch");
    double sum_rate = 0.0, backlog = 0.0;
    for (std::size_t u = 0; u < rates.size(); ++u) {
        sum_rate += rates[u];
        backlog += pos_part(delta_rem[u] - slot_seconds * rates[u]);
    }
    return sum_rate - lambda_intr * backlog;
}

TracePoseSource::TracePoseSource(const TraceTable& table) : table_(&table) {}

void TracePoseSource::on_episode(long /*episode*/,
                                 const std::vector<std::size_t>& video_of_user) {
    video_of_user_ = video_of_user;
}

HeadPose TracePoseSource::actual(std::size_t user, long frame) const {
    const auto uit = table_->find(user);
    if (uit == table_->end()) throw std::invalid_argument("TracePoseSource: unknown user");
    const auto vit = uit->second.find(video_of_user_.at(user));
    if (vit == uit->second.end()) throw std::invalid_argument("TracePoseSource: unknown video");
    return trace_pose(vit->second, frame);
}

void PersistencePosePredictor::on_request(std::size_t user, long f_now) {
    anchor_[user] = src_->actual(user, f_now);
}

HeadPose PersistencePosePredictor::predicted_pose(std::size_t user, long frame) {
    const auto it = anchor_.find(user);
    if (it != anchor_.end()) return it->second;
    return src_->actual(user, frame);
}

Environment::Environment(EnvConfig cfg, const SaliencyProvider& saliency, PoseSource& poses,
                         PosePredictor& predictor, std::size_t n_videos)
    : cfg_(std::move(cfg)),
      saliency_(&saliency),
      poses_(&poses),
      predictor_(&predictor),
      n_videos_(n_videos) {
    cfg_.validate();
    if (n_videos_ == 0) throw std::invalid_argument("Environment: no videos");
    if (saliency_->width() != cfg_.map_width || saliency_->height() != cfg_.map_height)
        throw std::invalid_argument("Environment: saliency map size mismatch");
}

void Environment::reset(long episode_index) {
    episode_ = episode_index;
    t_ = 1;
    done_ = false;
    scheduled_extr_.clear();
    beams_.reset();
    prim_act_raw_.clear();
    open_prim_.reset();
    predictor_->reset();
    pending_.clear();

    video_of_user_.resize(cfg_.geo.n_users());
    for (std::size_t u = 0; u < video_of_user_.size(); ++u)
        video_of_user_[u] =
            (u + static_cast<std::size_t>(std::max(0L, episode_index))) % n_videos_;
    poses_->on_episode(episode_index, video_of_user_);

    users_.assign(cfg_.geo.n_users(), UserRuntime{});
    for (std::size_t u = 0; u < users_.size(); ++u) {
        UserRuntime& ru = users_[u];
        ru.stream.buffer_slots = 0;
        ru.stream.chunk_index = 1;
        ru.stream.t_req = 1;
        ru.stream.delta_rem = 0.0;
        ru.stream.delta_time = 0;
        ru.stream.buffer_threshold = cfg_.buffer_threshold;
        ru.stream.last_avg_quality = 1.0;
        stage_request(u, 1);
        pending_.push_back(*ru.staged);
        ru.staged.reset();
        ru.obs_vec = ru.staged_obs_vec;
    }
}

HeadPose Environment::actual_pose_at(std::size_t user, long t) const {
    return poses_->actual(user, frame_of_slot(t));
}

void Environment::stage_request(std::size_t user, long request_slot) {
    UserRuntime& ru = users_[user];
    const long f_now = frame_of_slot(request_slot);
    predictor_->on_request(user, f_now);

    const std::size_t chunk = ru.stream.chunk_index;
    const std::size_t frames_per_chunk = cfg_.video.n_frames_per_chunk;
    const long gf_start = static_cast<long>((chunk - 1) * frames_per_chunk);
    const long playback_chunk = f_now / static_cast<long>(frames_per_chunk) + 1;
    const long gap = std::max(1L, static_cast<long>(chunk) - playback_chunk);

    const std::size_t content_frames = cfg_.video.n_chunks * frames_per_chunk;
    std::vector<FeatureMap> sal_frames;
    std::vector<HeadPose> pred_poses;
    sal_frames.reserve(frames_per_chunk);
    pred_poses.reserve(frames_per_chunk);
    for (std::size_t f = 0; f < frames_per_chunk; ++f) {
        const long gf = gf_start + static_cast<long>(f);
        sal_frames.push_back(saliency_->frame_map(
            video_of_user_[user], static_cast<std::size_t>(gf) % content_frames));
        pred_poses.push_back(predictor_->predicted_pose(user, gf));
    }

    PendingRequest req;
    req.user = user;
    req.chunk = chunk;
    req.tiles = predict_tiles(sal_frames, pred_poses, gap, cfg_.tiling, cfg_.fusion);
    req.obs = build_macro_obs(req.tiles, ru.stream);
    ru.staged = req;
    ru.staged_obs_vec =
        req.obs.to_vector(cfg_.video.n_levels(), cfg_.buffer_threshold);
}

std::set<std::size_t> Environment::actual_chunk_tiles(std::size_t user,
                                                      std::size_t chunk) const {
    const std::size_t frames_per_chunk = cfg_.video.n_frames_per_chunk;
    const long gf_start = static_cast<long>((chunk - 1) * frames_per_chunk);
    std::set<std::size_t> tiles;
    for (std::size_t f = 0; f < frames_per_chunk; ++f) {
        const HeadPose pose = poses_->actual(user, gf_start + static_cast<long>(f));
        auto view = viewport_from_pose(pose, cfg_.tiling, cfg_.fusion, cfg_.map_width,
                                       cfg_.map_height);
        tiles.insert(view.begin(), view.end());
    }
    return tiles;
}

void Environment::set_macro_action(std::size_t user, const std::vector<double>& raw) {
    auto it = std::find_if(pending_.begin(), pending_.end(),
                           [&](const PendingRequest& p) { return p.user == user; });
    if (it == pending_.end())
        throw std::invalid_argument("set_macro_action: user has no pending request");
    UserRuntime& ru = users_[user];
    if (ru.action_set) throw std::logic_error("set_macro_action: action already set");
    auto [action, sel] = apply_macro_action(raw, it->tiles, cfg_.video);
    ru.act_raw = raw;
    ru.sel = sel;
    ru.tiles = it->tiles;
    ru.obs = it->obs;
    ru.obs_vec = ru.obs.to_vector(cfg_.video.n_levels(), cfg_.buffer_threshold);

    ru.stream.delta_rem = chunk_size_bits(sel, cfg_.video);
    ru.stream.delta_time = ru.stream.buffer_slots;
    ru.stream.last_avg_quality = avg_transmitted_level(sel, it->tiles.pred_set);
    ru.realized_td = 0;
    ru.realized_wt = 0;
    ru.next_req = -1;
    ru.action_set = true;
}

void Environment::set_macro_selection(std::size_t user, const QualitySelection& sel) {
    auto it = std::find_if(pending_.begin(), pending_.end(),
                           [&](const PendingRequest& p) { return p.user == user; });
    if (it == pending_.end())
        throw std::invalid_argument("set_macro_selection: user has no pending request");
    UserRuntime& ru = users_[user];
    if (ru.action_set) throw std::logic_error("set_macro_selection: action already set");
    for (std::size_t n = 0; n < sel.levels.size(); ++n) {
        const bool inside = it->tiles.pred_set.count(n) > 0;
        if (inside && sel.levels[n] < 1)
            throw std::invalid_argument("set_macro_selection: predicted tile left unassigned");
        if (!inside && sel.levels[n] != 0)
            throw std::invalid_argument("set_macro_selection: level outside the predicted set");
    }
    ru.act_raw.clear();
    ru.sel = sel;
    ru.tiles = it->tiles;
    ru.obs = it->obs;
    ru.obs_vec = ru.obs.to_vector(cfg_.video.n_levels(), cfg_.buffer_threshold);
    ru.stream.delta_rem = chunk_size_bits(sel, cfg_.video);
    ru.stream.delta_time = ru.stream.buffer_slots;
    ru.stream.last_avg_quality = avg_transmitted_level(sel, it->tiles.pred_set);
    ru.realized_td = 0;
    ru.realized_wt = 0;
    ru.next_req = -1;
    ru.action_set = true;
}

std::vector<PrimObservation> Environment::prim_observations() const {
    if (done_) throw std::logic_error("prim_observations: episode finished");
    for (const auto& p : pending_)
        if (!users_[p.user].action_set)
            throw std::logic_error("prim_observations: macro action still pending");
    std::vector<PrimObservation> obs;
    obs.reserve(users_.size());
    for (std::size_t u = 0; u < users_.size(); ++u) {
        const HeadPose pose = predictor_->predicted_pose(u, frame_of_slot(t_));
        obs.push_back(build_prim_obs(u, pose, users_[u].stream, cfg_.geo));
    }
    return obs;
}

std::vector<double> Environment::prim_observation_joint() const {
    std::vector<double> joint;
    for (const auto& o : prim_observations()) {
        const auto v = o.to_vector(cfg_.max_chunk_bits(), cfg_.buffer_threshold,
                                   cfg_.video.chunk_slots);
        joint.insert(joint.end(), v.begin(), v.end());
    }
    return joint;
}

void Environment::set_prim_action(const std::vector<double>& raw_joint) {
    if (raw_joint.size() != n_users() * prim_act_dim())
        throw std::invalid_argument("set_prim_action: joint action length mismatch");
    prim_act_raw_ = raw_joint;
    beams_.reset();
}

void Environment::set_beams(const BeamSet& beams) {
    beams_ = beams;
    prim_act_raw_.clear();
}

std::vector<std::vector<ChannelMatrix>> Environment::current_channels() const {
    std::vector<HeadPose> poses;
    poses.reserve(n_users());
    for (std::size_t u = 0; u < n_users(); ++u) poses.push_back(actual_pose_at(u, t_));
    return all_channels(poses, cfg_.geo, cfg_.phy);
}

std::vector<std::set<std::size_t>> Environment::current_nb_actual() const {
    std::vector<std::set<std::size_t>> nb;
    for (std::size_t u = 0; u < n_users(); ++u)
        nb.push_back(nonblocked_aps(actual_pose_at(u, t_), u, cfg_.geo));
    return nb;
}

std::vector<std::set<std::size_t>> Environment::current_nb_predicted() const {
    std::vector<std::set<std::size_t>> nb;
    for (std::size_t u = 0; u < n_users(); ++u)
        nb.push_back(nonblocked_aps(predictor_->predicted_pose(u, frame_of_slot(t_)), u,
                                    cfg_.geo));
    return nb;
}

std::vector<double> Environment::macro_raw_joint() const {
    std::vector<double> joint;
    for (const auto& ru : users_) {
        if (ru.act_raw.empty()) return {};  // baseline mode, no raw representation
        joint.insert(joint.end(), ru.act_raw.begin(), ru.act_raw.end());
    }
    return joint;
}

SlotResult Environment::finish_slot() {
    if (done_) throw std::logic_error("finish_slot: episode finished");
    for (const auto& p : pending_)
        if (!users_[p.user].action_set)
            throw std::logic_error("finish_slot: macro action still pending");
    if (!beams_ && prim_act_raw_.empty())
        throw std::logic_error("finish_slot: no beamforming decision for this slot");

    SlotResult res;
    res.t = t_;
    res.terminal = (t_ == cfg_.t_max);

    const std::vector<double> prim_vec = prim_observation_joint();
    const std::vector<double> macro_joint = macro_raw_joint();

    BeamSet beams = beams_ ? *beams_
                           : apply_prim_action(prim_act_raw_, n_users(), cfg_.geo.n_aps(),
                                               cfg_.phy.n_tx, cfg_.phy.p_max_watt());

    const auto channels = current_channels();
    const auto nb_actual = current_nb_actual();
    res.rates.resize(n_users());
    for (std::size_t u = 0; u < n_users(); ++u)
        res.rates[u] = user_rate(u, beams, channels, nb_actual, cfg_.phy);

    res.delta_rem.resize(n_users());
    for (std::size_t u = 0; u < n_users(); ++u) res.delta_rem[u] = users_[u].stream.delta_rem;

    const auto sit = scheduled_extr_.find(t_);
    res.r_extr = sit == scheduled_extr_.end() ? 0.0 : sit->second;
    if (sit != scheduled_extr_.end()) scheduled_extr_.erase(sit);
    res.r_intr =
        intrinsic_reward(res.rates, res.delta_rem, cfg_.reward.lambda_intr, cfg_.video.slot_seconds);

    // per-agent discounted accumulation over the running macro-action
    for (auto& ru : users_)
        ru.r_cum += std::pow(cfg_.reward.gamma, static_cast<double>(t_ - ru.stream.t_req)) *
                    res.r_extr;

    // download accounting and completion detection
    for (std::size_t u = 0; u < n_users(); ++u) {
        UserRuntime& ru = users_[u];
        const bool was_open = ru.stream.delta_rem > 0.0;
        ru.stream = update_stream_state(ru.stream, cfg_.video.slot_seconds * res.rates[u]);
        if (was_open && ru.stream.delta_rem == 0.0) {
            const int td = static_cast<int>(t_ - ru.stream.t_req + 1);
            const int wt = waiting_time(ru.stream, td, cfg_.video);
            const long rd = rebuffering_delay(td, ru.stream.buffer_slots);
            const auto actual = actual_chunk_tiles(u, ru.stream.chunk_index);
            QoEReport rep =
                qoe_chunk(ru.sel, actual, ru.last_view_avg, rd, cfg_.qoe);
            ru.last_view_avg = rep.avg_view_quality;
            ru.realized_td = td;
            ru.realized_wt = wt;
            ru.next_req = ru.stream.t_req + td + wt;
            scheduled_extr_[ru.stream.t_req + td] += rep.qoe;

            Completion done;
            done.user = u;
            done.chunk = ru.stream.chunk_index;
            done.qoe = rep;
            done.td = td;
            done.wt = wt;
            done.rd = rd;
            done.overlap = tiles_overlap(ru.tiles.pred_set, actual);
            res.completions.push_back(std::move(done));
        }
        if (ru.stream.delta_rem == 0.0 && ru.realized_td > 0) {
            // waiting for the buffer to drain; the stall countdown holds
            ru.stream.delta_time =
                pos_part(ru.stream.buffer_slots - ru.realized_td) + cfg_.video.chunk_slots;
        }
    }

    // macro-action records for this slot
    res.agent_records.resize(n_users());
    for (std::size_t u = 0; u < n_users(); ++u) {
        UserRuntime& ru = users_[u];
        AgentSlotRecord& rec = res.agent_records[u];
        rec.obs = ru.obs_vec;
        rec.act_raw = ru.act_raw;
        rec.r_cum = ru.r_cum;
        rec.elapsed = static_cast<int>(t_ - ru.stream.t_req + 1);
        rec.completed = (ru.next_req == t_ + 1);
        if (rec.completed) {
            ru.stream = advance_request(ru.stream, ru.realized_td, ru.realized_wt, cfg_.video);
            stage_request(u, t_ + 1);
            rec.next_obs = ru.staged_obs_vec;
            ru.r_cum = 0.0;
        } else {
            rec.next_obs = ru.obs_vec;
        }
    }

    // primitive-action records complete one slot late: the follow-up
    // observation and joint macro-action only exist at the next slot
    if (open_prim_) {
        open_prim_->next_obs = prim_vec;
        open_prim_->next_macro_raw = macro_joint;
        res.prim_records.push_back(std::move(*open_prim_));
        open_prim_.reset();
    }
    PrimSlotRecord cur;
    cur.episode = episode_;
    cur.t = t_;
    cur.obs = prim_vec;
    cur.act_raw = prim_act_raw_;
    cur.macro_raw = macro_joint;
    cur.r_intr = res.r_intr;
    cur.terminal = res.terminal;
    if (res.terminal) {
        // no bootstrap past the horizon; keep a placeholder follow-up
        cur.next_obs = prim_vec;
        cur.next_macro_raw = macro_joint;
        res.prim_records.push_back(std::move(cur));
    } else {
        open_prim_ = std::move(cur);
    }

    beams_.reset();
    prim_act_raw_.clear();

    t_ += 1;
    pending_.clear();
    if (t_ > cfg_.t_max) {
        done_ = true;
        res.done = true;
    } else {
        for (std::size_t u = 0; u < n_users(); ++u) {
            UserRuntime& ru = users_[u];
            if (ru.staged && ru.stream.t_req == t_) {
                pending_.push_back(*ru.staged);
                ru.staged.reset();
                ru.action_set = false;
            }
        }
    }
    return res;
}

// ---- replay buffers ----

void MacCertsBuffer::push(MacroRecord rec) {
    records_.push_back(std::move(rec));
    if (records_.size() > capacity_)
        records_.erase(records_.begin(),
                       records_.begin() + static_cast<long>(records_.size() - capacity_));
}

std::vector<std::size_t> MacCertsBuffer::filter_agent(std::size_t agent) const {
    std::vector<std::size_t> view;
    for (std::size_t i = 0; i < records_.size(); ++i)
        if (records_[i].completed.at(agent) || records_[i].terminal) view.push_back(i);
    return view;
}

std::vector<std::size_t> MacCertsBuffer::filter_any() const {
    std::vector<std::size_t> view;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& c = records_[i].completed;
        const bool any = records_[i].terminal ||
                         std::any_of(c.begin(), c.end(), [](char f) { return f != 0; });
        if (any) view.push_back(i);
    }
    return view;
}

std::vector<std::size_t> MacCertsBuffer::sample_window(const std::vector<std::size_t>& view,
                                                       std::size_t count, Rng& rng) const {
    if (count == 0) throw std::invalid_argument("sample_window: empty window");
    if (view.size() < count)
        throw std::runtime_error("sample_window: minibatch larger than the filtered buffer");
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + count <= view.size(); ++s) {
        bool ok = true;
        for (std::size_t i = 1; i < count && ok; ++i)
            ok = records_[view[s + i]].episode == records_[view[s]].episode;
        if (ok) starts.push_back(s);
    }
    if (starts.empty())
        throw std::runtime_error("sample_window: no in-episode window of the requested size");
    std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);
    const std::size_t s = starts[pick(rng)];
    return std::vector<std::size_t>(view.begin() + static_cast<long>(s),
                                    view.begin() + static_cast<long>(s + count));
}

void PrimReplayBuffer::push(PrimSlotRecord rec) {
    records_.push_back(std::move(rec));
    if (records_.size() > capacity_)
        records_.erase(records_.begin(),
                       records_.begin() + static_cast<long>(records_.size() - capacity_));
}

std::vector<std::size_t> PrimReplayBuffer::sample_window(std::size_t count, Rng& rng) const {
    if (count == 0) throw std::invalid_argument("sample_window: empty window");
    if (records_.size() < count)
        throw std::runtime_error("sample_window: minibatch larger than the buffer");
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + count <= records_.size(); ++s) {
        bool ok = true;
        for (std::size_t i = 1; i < count && ok; ++i)
            ok = records_[s + i].episode == records_[s].episode;
        if (ok) starts.push_back(s);
    }
    if (starts.empty())
        throw std::runtime_error("sample_window: no in-episode window of the requested size");
    std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);
    const std::size_t s = starts[pick(rng)];
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = s + i;
    return idx;
}

}  // namespace thz360
