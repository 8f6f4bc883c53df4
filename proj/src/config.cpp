// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace thz360 {

namespace {

using nlohmann::json;

// strict object view: every key must be consumed
class Strict {
  public:
    Strict(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) throw std::invalid_argument(path_ + ": expected an object");
    }
    ~Strict() = default;

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_->find(key);
        if (it == j_->end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(path_ + "." + key + ": " + e.what());
        }
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_->contains(key);
    }

    const json& sub(const char* key) {
        seen_.insert(key);
        return (*j_)[key];
    }

    void finish() const {
        for (const auto& [key, value] : j_->items())
            if (!seen_.count(key))
                throw std::invalid_argument(path_ + "." + key + ": unknown key");
    }

  private:
    const json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<Point3> read_points(const json& j, const std::string& path) {
    std::vector<Point3> out;
    if (!j.is_array()) throw std::invalid_argument(path + ": expected an array of [x,y,z]");
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 3)
            throw std::invalid_argument(path + ": expected [x,y,z] triples");
        out.push_back(Point3{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
    return out;
}

json points_to_json(const std::vector<Point3>& pts) {
    json j = json::array();
    for (const auto& p : pts) j.push_back({p.x, p.y, p.z});
    return j;
}

ExperimentConfig scenario_defaults() {
    ExperimentConfig cfg;
    cfg.env.geo.ap_positions = {{9, 1, 4}, {5, 5, 4}, {1, 9, 4}};
    cfg.env.geo.phi_blocked = kPi;
    cfg.env.video.n_frames_per_chunk = 30;  // 30 fps, one-second chunks
    cfg.env.t_max = 153;
    cfg.env.buffer_threshold = 30;
    cfg.headpred.model.q_hist = 30;
    cfg.headpred.model.d_gru = 16;
    cfg.headpred.model.n_layers = 4;
    cfg.train.episodes = 50;
    cfg.train.warmup_slots = 200;
    cfg.train.batch_macro = 8;
    cfg.train.batch_prim = 8;
    cfg.train.lr_actor = 1e-3;
    cfg.train.lr_critic = 1e-3;
    cfg.train.nets.agent_hidden = 16;
    cfg.train.nets.agent_fc = 16;
    cfg.train.nets.joint_hidden = 32;
    cfg.train.nets.joint_fc = 32;
    return cfg;
}

}  // namespace

std::vector<Point3> place_users(std::size_t n_users, double room_x, double room_y,
                                double height) {
    if (n_users == 0) throw std::invalid_argument("place_users: no users");
    std::size_t rows = static_cast<std::size_t>(std::floor(std::sqrt(double(n_users))));
    while (rows > 1 && n_users % rows != 0) --rows;
    const std::size_t cols = n_users / rows;
    std::vector<Point3> out;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out.push_back(Point3{(static_cast<double>(c) + 0.5) * room_x / double(cols),
                                 (static_cast<double>(r) + 0.5) * room_y / double(rows),
                                 height});
    return out;
}

void ExperimentConfig::finalize() {
    if (env.geo.user_positions.empty())
        env.geo.user_positions = place_users(n_users, room_x, room_y, user_height);
    n_users = env.geo.n_users();
    env.tiling = Tiling{env.video.tile_rows, env.video.tile_cols};
    saliency.width = env.map_width;
    saliency.height = env.map_height;
    // prediction horizon covers a chunk plus the deepest possible prefetch
    headpred.model.q_pred =
        env.video.n_frames_per_chunk +
        static_cast<std::size_t>(env.video.n_frames_per_chunk) *
            static_cast<std::size_t>(env.buffer_threshold) /
            static_cast<std::size_t>(env.video.chunk_slots);
    train.gamma = env.reward.gamma;
    train.seed = seed;
    env.validate();
    headpred.model.validate();
    train.validate();
    wmmse.validate();
    if (n_videos == 0) throw std::invalid_argument("config: n_videos must be >= 1");
    for (std::size_t v : headpred.train_videos)
        if (v >= n_videos) throw std::invalid_argument("config: headpred.train_videos out of range");
    for (std::size_t v : headpred.test_videos)
        if (v >= n_videos) throw std::invalid_argument("config: headpred.test_videos out of range");
    if (policy.bitrate != "drl" && policy.bitrate != "priority")
        throw std::invalid_argument("config: policy.bitrate must be drl or priority");
    if (policy.beamforming != "drl" && policy.beamforming != "wmmse")
        throw std::invalid_argument("config: policy.beamforming must be drl or wmmse");
    if (policy.predictor != "oracle" && policy.predictor != "persistence" &&
        policy.predictor != "pfl" && policy.predictor != "fedavg")
        throw std::invalid_argument(
            "config: policy.predictor must be oracle, persistence, pfl or fedavg");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root_json;
    try {
        root_json = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    ExperimentConfig cfg = scenario_defaults();
    Strict root(root_json, "config");
    root.get("seed", cfg.seed);

    if (root.has("phy")) {
        Strict p(root.sub("phy"), "config.phy");
        p.get("f_c_hz", cfg.env.phy.f_c);
        p.get("kappa_per_m", cfg.env.phy.kappa);
        p.get("bandwidth_hz", cfg.env.phy.bandwidth);
        p.get("n_tx", cfg.env.phy.n_tx);
        p.get("n_rx", cfg.env.phy.n_rx);
        p.get("g_ap_dbi", cfg.env.phy.g_ap_dbi);
        p.get("g_user_dbi", cfg.env.phy.g_user_dbi);
        p.get("p_max_dbm", cfg.env.phy.p_max_dbm);
        p.get("noise_dbm", cfg.env.phy.noise_dbm);
        p.get("element_spacing", cfg.env.phy.element_spacing);
        p.finish();
    }
    if (root.has("geometry")) {
        Strict g(root.sub("geometry"), "config.geometry");
        if (g.has("room")) {
            const auto& room = g.sub("room");
            if (!room.is_array() || room.size() != 2)
                throw std::invalid_argument("config.geometry.room: expected [x, y]");
            cfg.room_x = room[0].get<double>();
            cfg.room_y = room[1].get<double>();
        }
        if (g.has("ap_positions"))
            cfg.env.geo.ap_positions = read_points(g.sub("ap_positions"),
                                                   "config.geometry.ap_positions");
        if (g.has("user_positions"))
            cfg.env.geo.user_positions = read_points(g.sub("user_positions"),
                                                     "config.geometry.user_positions");
        g.get("n_users", cfg.n_users);
        g.get("user_height_m", cfg.user_height);
        g.get("phi_blocked_rad", cfg.env.geo.phi_blocked);
        g.finish();
    }
    if (root.has("video")) {
        Strict v(root.sub("video"), "config.video");
        v.get("tile_rows", cfg.env.video.tile_rows);
        v.get("tile_cols", cfg.env.video.tile_cols);
        v.get("frames_per_chunk", cfg.env.video.n_frames_per_chunk);
        v.get("chunk_slots", cfg.env.video.chunk_slots);
        v.get("slot_seconds", cfg.env.video.slot_seconds);
        v.get("bitrates_bps", cfg.env.video.quality_bitrates);
        v.get("n_chunks", cfg.env.video.n_chunks);
        v.finish();
    }
    if (root.has("qoe")) {
        Strict q(root.sub("qoe"), "config.qoe");
        q.get("lambda_spatial", cfg.env.qoe.lambda_spatial);
        q.get("lambda_temp", cfg.env.qoe.lambda_temp);
        q.get("lambda_rd", cfg.env.qoe.lambda_rd);
        q.finish();
    }
    if (root.has("reward")) {
        Strict r(root.sub("reward"), "config.reward");
        r.get("gamma", cfg.env.reward.gamma);
        r.get("lambda_intr", cfg.env.reward.lambda_intr);
        r.finish();
    }
    if (root.has("fusion")) {
        Strict f(root.sub("fusion"), "config.fusion");
        f.get("kernel_sigma_rad", cfg.env.fusion.kernel_sigma);
        f.get("alpha_marg", cfg.env.fusion.alpha_marg);
        f.get("fov_vertical_deg", cfg.env.fusion.fov_vertical_deg);
        f.get("fov_horizontal_deg", cfg.env.fusion.fov_horizontal_deg);
        f.finish();
    }
    if (root.has("map")) {
        Strict m(root.sub("map"), "config.map");
        m.get("width", cfg.env.map_width);
        m.get("height", cfg.env.map_height);
        m.finish();
    }
    root.get("buffer_threshold_slots", cfg.env.buffer_threshold);
    root.get("t_max_slots", cfg.env.t_max);
    root.get("n_videos", cfg.n_videos);
    if (root.has("saliency")) {
        Strict s(root.sub("saliency"), "config.saliency");
        s.get("components", cfg.saliency.components);
        s.get("sigma", cfg.saliency.sigma);
        s.get("drift_per_frame", cfg.saliency.drift_per_frame);
        s.get("dir", cfg.saliency_dir);
        s.finish();
    }
    if (root.has("traces")) {
        Strict t(root.sub("traces"), "config.traces");
        t.get("personas", cfg.traces.personas);
        t.get("frames_per_video", cfg.traces.frames_per_video);
        t.get("pull", cfg.traces.pull);
        t.get("noise", cfg.traces.noise);
        t.get("switch_every", cfg.traces.switch_every);
        t.get("file", cfg.traces.file);
        t.finish();
    }
    if (root.has("headpred")) {
        Strict h(root.sub("headpred"), "config.headpred");
        h.get("q_hist", cfg.headpred.model.q_hist);
        h.get("d_gru", cfg.headpred.model.d_gru);
        h.get("n_layers", cfg.headpred.model.n_layers);
        h.get("rounds", cfg.headpred.rounds);
        h.get("local_iters", cfg.headpred.local_iters);
        h.get("lr", cfg.headpred.lr);
        h.get("fine_tune_iters", cfg.headpred.fine_tune_iters);
        h.get("train_videos", cfg.headpred.train_videos);
        h.get("test_videos", cfg.headpred.test_videos);
        h.finish();
    }
    if (root.has("train")) {
        Strict t(root.sub("train"), "config.train");
        t.get("episodes", cfg.train.episodes);
        t.get("warmup_slots", cfg.train.warmup_slots);
        t.get("batch_macro", cfg.train.batch_macro);
        t.get("batch_prim", cfg.train.batch_prim);
        t.get("soft_eps", cfg.train.soft_eps);
        t.get("lr_actor", cfg.train.lr_actor);
        t.get("lr_critic", cfg.train.lr_critic);
        t.get("ou_theta", cfg.train.ou_theta);
        t.get("ou_sigma", cfg.train.ou_sigma);
        t.get("agent_hidden", cfg.train.nets.agent_hidden);
        t.get("agent_fc", cfg.train.nets.agent_fc);
        t.get("joint_hidden", cfg.train.nets.joint_hidden);
        t.get("joint_fc", cfg.train.nets.joint_fc);
        t.get("buffer_capacity", cfg.train.buffer_capacity);
        t.finish();
    }
    if (root.has("wmmse")) {
        Strict w(root.sub("wmmse"), "config.wmmse");
        w.get("max_iterations", cfg.wmmse.max_iterations);
        w.get("tolerance", cfg.wmmse.tolerance);
        w.get("dual_tolerance", cfg.wmmse.dual_tolerance);
        w.get("rate_weights", cfg.wmmse.rate_weights);
        w.finish();
    }
    if (root.has("policy")) {
        Strict p(root.sub("policy"), "config.policy");
        p.get("bitrate", cfg.policy.bitrate);
        p.get("beamforming", cfg.policy.beamforming);
        p.get("predictor", cfg.policy.predictor);
        p.get("reactive_blockage", cfg.policy.reactive_blockage);
        p.get("blockage_delay_slots", cfg.policy.blockage_delay_slots);
        p.finish();
    }
    if (root.has("eval")) {
        Strict e(root.sub("eval"), "config.eval");
        e.get("episodes", cfg.eval.episodes);
        e.get("qoe_thresholds", cfg.eval.qoe_thresholds);
        e.get("sweep_seeds", cfg.eval.sweep_seeds);
        e.finish();
    }
    if (root.has("paths")) {
        Strict p(root.sub("paths"), "config.paths");
        p.get("headpred_dir", cfg.headpred_dir);
        p.get("drl_dir", cfg.drl_dir);
        p.finish();
    }
    root.finish();
    cfg.finalize();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["phy"] = {{"f_c_hz", cfg.env.phy.f_c},
                {"kappa_per_m", cfg.env.phy.kappa},
                {"bandwidth_hz", cfg.env.phy.bandwidth},
                {"n_tx", cfg.env.phy.n_tx},
                {"n_rx", cfg.env.phy.n_rx},
                {"g_ap_dbi", cfg.env.phy.g_ap_dbi},
                {"g_user_dbi", cfg.env.phy.g_user_dbi},
                {"p_max_dbm", cfg.env.phy.p_max_dbm},
                {"noise_dbm", cfg.env.phy.noise_dbm},
                {"element_spacing", cfg.env.phy.element_spacing}};
    j["geometry"] = {{"room", {cfg.room_x, cfg.room_y}},
                     {"ap_positions", points_to_json(cfg.env.geo.ap_positions)},
                     {"user_positions", points_to_json(cfg.env.geo.user_positions)},
                     {"n_users", cfg.n_users},
                     {"user_height_m", cfg.user_height},
                     {"phi_blocked_rad", cfg.env.geo.phi_blocked}};
    j["video"] = {{"tile_rows", cfg.env.video.tile_rows},
                  {"tile_cols", cfg.env.video.tile_cols},
                  {"frames_per_chunk", cfg.env.video.n_frames_per_chunk},
                  {"chunk_slots", cfg.env.video.chunk_slots},
                  {"slot_seconds", cfg.env.video.slot_seconds},
                  {"bitrates_bps", cfg.env.video.quality_bitrates},
                  {"n_chunks", cfg.env.video.n_chunks}};
    j["qoe"] = {{"lambda_spatial", cfg.env.qoe.lambda_spatial},
                {"lambda_temp", cfg.env.qoe.lambda_temp},
                {"lambda_rd", cfg.env.qoe.lambda_rd}};
    j["reward"] = {{"gamma", cfg.env.reward.gamma},
                   {"lambda_intr", cfg.env.reward.lambda_intr}};
    j["fusion"] = {{"kernel_sigma_rad", cfg.env.fusion.kernel_sigma},
                   {"alpha_marg", cfg.env.fusion.alpha_marg},
                   {"fov_vertical_deg", cfg.env.fusion.fov_vertical_deg},
                   {"fov_horizontal_deg", cfg.env.fusion.fov_horizontal_deg}};
    j["map"] = {{"width", cfg.env.map_width}, {"height", cfg.env.map_height}};
    j["buffer_threshold_slots"] = cfg.env.buffer_threshold;
    j["t_max_slots"] = cfg.env.t_max;
    j["n_videos"] = cfg.n_videos;
    j["saliency"] = {{"components", cfg.saliency.components},
                     {"sigma", cfg.saliency.sigma},
                     {"drift_per_frame", cfg.saliency.drift_per_frame},
                     {"dir", cfg.saliency_dir}};
    j["traces"] = {{"personas", cfg.traces.personas},
                   {"frames_per_video", cfg.traces.frames_per_video},
                   {"pull", cfg.traces.pull},
                   {"noise", cfg.traces.noise},
                   {"switch_every", cfg.traces.switch_every},
                   {"file", cfg.traces.file}};
    j["headpred"] = {{"q_hist", cfg.headpred.model.q_hist},
                     {"d_gru", cfg.headpred.model.d_gru},
                     {"n_layers", cfg.headpred.model.n_layers},
                     {"rounds", cfg.headpred.rounds},
                     {"local_iters", cfg.headpred.local_iters},
                     {"lr", cfg.headpred.lr},
                     {"fine_tune_iters", cfg.headpred.fine_tune_iters},
                     {"train_videos", cfg.headpred.train_videos},
                     {"test_videos", cfg.headpred.test_videos}};
    j["train"] = {{"episodes", cfg.train.episodes},
                  {"warmup_slots", cfg.train.warmup_slots},
                  {"batch_macro", cfg.train.batch_macro},
                  {"batch_prim", cfg.train.batch_prim},
                  {"soft_eps", cfg.train.soft_eps},
                  {"lr_actor", cfg.train.lr_actor},
                  {"lr_critic", cfg.train.lr_critic},
                  {"ou_theta", cfg.train.ou_theta},
                  {"ou_sigma", cfg.train.ou_sigma},
                  {"agent_hidden", cfg.train.nets.agent_hidden},
                  {"agent_fc", cfg.train.nets.agent_fc},
                  {"joint_hidden", cfg.train.nets.joint_hidden},
                  {"joint_fc", cfg.train.nets.joint_fc},
                  {"buffer_capacity", cfg.train.buffer_capacity}};
    j["wmmse"] = {{"max_iterations", cfg.wmmse.max_iterations},
                  {"tolerance", cfg.wmmse.tolerance},
                  {"dual_tolerance", cfg.wmmse.dual_tolerance},
                  {"rate_weights", cfg.wmmse.rate_weights}};
    j["policy"] = {{"bitrate", cfg.policy.bitrate},
                   {"beamforming", cfg.policy.beamforming},
                   {"predictor", cfg.policy.predictor},
                   {"reactive_blockage", cfg.policy.reactive_blockage},
                   {"blockage_delay_slots", cfg.policy.blockage_delay_slots}};
    j["eval"] = {{"episodes", cfg.eval.episodes},
                 {"qoe_thresholds", cfg.eval.qoe_thresholds},
                 {"sweep_seeds", cfg.eval.sweep_seeds}};
    j["paths"] = {{"headpred_dir", cfg.headpred_dir}, {"drl_dir", cfg.drl_dir}};
    return j.dump(2);
}

void apply_policy_preset(ExperimentConfig& cfg, const std::string& preset) {
    if (preset == "drl") {
        cfg.policy.bitrate = "drl";
        cfg.policy.beamforming = "drl";
    } else if (preset == "wmmse") {
        cfg.policy.beamforming = "wmmse";
    } else if (preset == "priority") {
        cfg.policy.bitrate = "priority";
        cfg.policy.predictor = "persistence";
        cfg.policy.reactive_blockage = true;
        cfg.policy.beamforming = "wmmse";
    } else if (preset == "fedavg-pred") {
        cfg.policy.predictor = "fedavg";
    } else if (preset == "oracle-pred") {
        cfg.policy.predictor = "oracle";
    } else {
        throw std::invalid_argument("unknown policy preset: " + preset);
    }
}

}  // namespace thz360
