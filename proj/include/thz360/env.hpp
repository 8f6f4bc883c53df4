// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// The streaming control environment: per-slot beamforming decisions,
// asynchronous per-chunk bitrate decisions held until the next request,
// shared rewards, and the replay records both learners train from.

#ifndef THZ360_ENV_HPP
#define THZ360_ENV_HPP

#include <map>
#include <optional>

#include "thz360/fusion.hpp"
#include "thz360/phy.hpp"
#include "thz360/saliency.hpp"
#include "thz360/streaming.hpp"
#include "thz360/traces.hpp"

namespace thz360 {

struct RewardConfig {
    double gamma = 0.99;        // discount
    double lambda_intr = 2.0;   // backlog penalty weight
    void validate() const;
};

struct MacroObservation {
    std::vector<int> indicator;       // predicted-tile indicator
    std::vector<double> avg_feature;  // per-tile mean fused feature
    double prev_avg_quality = 1.0;    // mean transmitted level of the previous chunk
    int buffer_at_request = 0;

    /// Net-side encoding: [indicator, features, level/M, buffer/threshold].
    std::vector<double> to_vector(std::size_t n_levels, int buffer_threshold) const;
};

struct PrimObservation {
    std::vector<int> nonblocked;  // predicted non-blocked AP indicator
    double delta_rem = 0.0;       // bits left of the requested chunk
    long delta_time = 0;          // slots until stalling; may be negative

    std::vector<double> to_vector(double max_chunk_bits, int buffer_threshold,
                                  int chunk_slots) const;
};

/// Continuous per-tile bitrates before rounding; zero outside the
/// predicted set.
struct MacroAction {
    std::vector<double> bitrates;
};

/// Build the macro observation exposed to an agent at a request instant.
MacroObservation build_macro_obs(const TilePrediction& tiles, const UserStreamState& state);

/// Mean selected level over the predicted tiles (1 when the set is empty).
double avg_transmitted_level(const QualitySelection& sel, const std::set<std::size_t>& pred);

/// Build the per-slot observation from the predicted facing direction.
PrimObservation build_prim_obs(std::size_t user, const HeadPose& predicted_pose,
                               const UserStreamState& state, const Geometry& geo);

/// One slot of download accounting: the remaining bits shrink by the
/// delivered amount and the stall countdown decrements while a download
/// is still open (the waiting-time value is reasserted by the caller,
/// which knows the realized delay).
UserStreamState update_stream_state(UserStreamState state, double delivered_bits);

/// Map raw actor outputs in [-1,1]^N to bitrates in [nu_1, nu_M] on the
/// predicted tiles, then round down to the quality ladder.
std::pair<MacroAction, QualitySelection> apply_macro_action(const std::vector<double>& raw,
                                                            const TilePrediction& tiles,
                                                            const VideoConfig& vc);

/// Interpret consecutive real pairs as complex beam entries, scale to a
/// nominal per-beam amplitude, and project onto the per-AP power budget.
BeamSet apply_prim_action(const std::vector<double>& raw, std::size_t n_users,
                          std::size_t n_aps, std::size_t n_tx, double p_max);

/// Sum of chunk QoE values completing this slot.
double extrinsic_reward(const std::vector<double>& qoe_completing);

/// Sum rate minus the weighted backlog that this slot's rates could not
/// clear.
double intrinsic_reward(const std::vector<double>& rates, const std::vector<double>& delta_rem,
                        double lambda_intr, double slot_seconds);

// ---- pose prediction plumbed into the environment ----

class PoseSource {
  public:
    virtual ~PoseSource() = default;
    virtual HeadPose actual(std::size_t user, long frame) const = 0;
    /// Episode hook; trace-backed sources switch videos here.
    virtual void on_episode(long episode, const std::vector<std::size_t>& video_of_user) {
        (void)episode;
        (void)video_of_user;
    }
};

/// Plays back one trace video per user; frame indices clamp at the ends.
class TracePoseSource : public PoseSource {
  public:
    explicit TracePoseSource(const TraceTable& table);
    HeadPose actual(std::size_t user, long frame) const override;
    void on_episode(long episode, const std::vector<std::size_t>& video_of_user) override;

  private:
    const TraceTable* table_;
    std::vector<std::size_t> video_of_user_;
};

class PosePredictor {
  public:
    virtual ~PosePredictor() = default;
    /// Called at each chunk request with the current frame index.
    virtual void on_request(std::size_t user, long f_now) { (void)user; (void)f_now; }
    /// Predicted pose of the user at the given frame, conditioned on the
    /// last request.
    virtual HeadPose predicted_pose(std::size_t user, long frame) = 0;
    virtual void reset() {}
};

/// Ground-truth poses; the upper bound for prediction quality.
class OraclePosePredictor : public PosePredictor {
  public:
    explicit OraclePosePredictor(const PoseSource& src) : src_(&src) {}
    HeadPose predicted_pose(std::size_t user, long frame) override {
        return src_->actual(user, frame);
    }

  private:
    const PoseSource* src_;
};

/// Reuses the pose measured at the last request for every future frame.
class PersistencePosePredictor : public PosePredictor {
  public:
    explicit PersistencePosePredictor(const PoseSource& src) : src_(&src) {}
    void on_request(std::size_t user, long f_now) override;
    HeadPose predicted_pose(std::size_t user, long frame) override;
    void reset() override { anchor_.clear(); }

  private:
    const PoseSource* src_;
    std::map<std::size_t, HeadPose> anchor_;
};

// ---- environment configuration and per-slot protocol ----

struct EnvConfig {
    PhyConfig phy;
    Geometry geo;
    VideoConfig video;
    QoEConfig qoe;
    RewardConfig reward;
    FusionConfig fusion;
    Tiling tiling;
    std::size_t map_width = 48;
    std::size_t map_height = 24;
    int buffer_threshold = 30;  // B^THR, slots
    long t_max = 153;           // slots per episode

    std::size_t frames_per_slot() const {
        return video.n_frames_per_chunk / static_cast<std::size_t>(video.chunk_slots);
    }
    double max_chunk_bits() const {
        return static_cast<double>(video.n_tiles()) * video.quality_bitrates.back() *
               static_cast<double>(video.chunk_slots) * video.slot_seconds;
    }
    void validate() const;
};

struct Completion {
    std::size_t user = 0;
    std::size_t chunk = 0;
    QoEReport qoe;
    int td = 0;   // realized transmission delay, slots
    int wt = 0;   // waiting time, slots
    long rd = 0;  // rebuffering, slots
    double overlap = 0.0;
};

struct AgentSlotRecord {
    std::vector<double> obs, act_raw, next_obs;
    double r_cum = 0.0;
    int elapsed = 0;
    bool completed = false;
};

struct PrimSlotRecord {
    long episode = 0;
    long t = 0;
    std::vector<double> obs, act_raw, next_obs;
    std::vector<double> macro_raw, next_macro_raw;
    double r_intr = 0.0;
    bool terminal = false;
};

struct SlotResult {
    long t = 0;
    std::vector<double> rates;
    std::vector<double> delta_rem;  // at slot start
    double r_extr = 0.0;
    double r_intr = 0.0;
    std::vector<Completion> completions;
    bool done = false;
    bool terminal = false;
    std::vector<AgentSlotRecord> agent_records;
    std::vector<PrimSlotRecord> prim_records;  // deferred by one slot; 0..2 entries
};

struct PendingRequest {
    std::size_t user = 0;
    std::size_t chunk = 0;
    MacroObservation obs;
    TilePrediction tiles;
};

class Environment {
  public:
    Environment(EnvConfig cfg, const SaliencyProvider& saliency, PoseSource& poses,
                PosePredictor& predictor, std::size_t n_videos);

    /// Starts a fresh episode; users rotate through the available videos
    /// with the episode index so repeated episodes differ.
    void reset(long episode_index);

    long slot() const { return t_; }
    long episode() const { return episode_; }
    std::size_t n_users() const { return cfg_.geo.n_users(); }

    std::size_t macro_obs_dim() const { return 2 * cfg_.video.n_tiles() + 2; }
    std::size_t macro_act_dim() const { return cfg_.video.n_tiles(); }
    std::size_t prim_obs_dim() const { return cfg_.geo.n_aps() + 2; }
    std::size_t prim_act_dim() const {
        return 2 * cfg_.phy.n_tx * cfg_.geo.n_aps();  // per user
    }

    const EnvConfig& config() const { return cfg_; }

    /// Users owing a bitrate decision at the current slot.
    const std::vector<PendingRequest>& pending_requests() const { return pending_; }

    void set_macro_action(std::size_t user, const std::vector<double>& raw);
    void set_macro_selection(std::size_t user, const QualitySelection& sel);

    /// Valid once every pending request has an action.
    std::vector<PrimObservation> prim_observations() const;
    std::vector<double> prim_observation_joint() const;

    void set_prim_action(const std::vector<double>& raw_joint);
    void set_beams(const BeamSet& beams);

    SlotResult finish_slot();

    // channel state exposed for baseline beamformers
    std::vector<std::vector<ChannelMatrix>> current_channels() const;
    std::vector<std::set<std::size_t>> current_nb_actual() const;
    std::vector<std::set<std::size_t>> current_nb_predicted() const;

    long frame_of_slot(long t) const {
        return (t - 1) * static_cast<long>(cfg_.frames_per_slot());
    }

  private:
    struct UserRuntime {
        UserStreamState stream;
        std::optional<double> last_view_avg;
        QualitySelection sel;
        TilePrediction tiles;
        MacroObservation obs;
        std::vector<double> obs_vec;
        std::vector<double> act_raw;
        double r_cum = 0.0;
        long next_req = -1;  // scheduled next request slot; -1 while downloading
        int realized_td = 0;
        int realized_wt = 0;
        bool action_set = false;
        // staged materials for the already-built next request
        std::optional<PendingRequest> staged;
        std::vector<double> staged_obs_vec;
    };

    void stage_request(std::size_t user, long request_slot);
    std::set<std::size_t> actual_chunk_tiles(std::size_t user, std::size_t chunk) const;
    HeadPose actual_pose_at(std::size_t user, long t) const;
    std::vector<double> macro_raw_joint() const;

    EnvConfig cfg_;
    const SaliencyProvider* saliency_;
    PoseSource* poses_;
    PosePredictor* predictor_;
    std::size_t n_videos_;
    std::vector<std::size_t> video_of_user_;

    long episode_ = 0;
    long t_ = 0;
    bool done_ = true;
    std::vector<UserRuntime> users_;
    std::vector<PendingRequest> pending_;
    std::map<long, double> scheduled_extr_;  // slot -> queued QoE sum
    std::optional<BeamSet> beams_;
    std::vector<double> prim_act_raw_;
    std::optional<PrimSlotRecord> open_prim_;  // completed one slot later
};

// ---- replay buffers ----

struct MacroRecord {
    long episode = 0;
    long t = 0;
    std::vector<std::vector<double>> obs, act, next_obs;  // per agent
    std::vector<double> r_cum;
    std::vector<int> elapsed;
    std::vector<char> completed;
    bool terminal = false;
};

class MacCertsBuffer {
  public:
    explicit MacCertsBuffer(std::size_t capacity = 200000) : capacity_(capacity) {}

    void push(MacroRecord rec);
    std::size_t size() const { return records_.size(); }
    const MacroRecord& at(std::size_t i) const { return records_.at(i); }

    /// Record indices where the given agent completed its macro-action.
    std::vector<std::size_t> filter_agent(std::size_t agent) const;
    /// Record indices where at least one agent completed.
    std::vector<std::size_t> filter_any() const;

    /// A window of `count` consecutive entries of `view` lying in one
    /// episode, uniformly over the valid starts. Throws when no window
    /// fits.
    std::vector<std::size_t> sample_window(const std::vector<std::size_t>& view,
                                           std::size_t count, Rng& rng) const;

  private:
    std::vector<MacroRecord> records_;
    std::size_t capacity_;
};

class PrimReplayBuffer {
  public:
    explicit PrimReplayBuffer(std::size_t capacity = 200000) : capacity_(capacity) {}

    void push(PrimSlotRecord rec);
    std::size_t size() const { return records_.size(); }
    const PrimSlotRecord& at(std::size_t i) const { return records_.at(i); }

    std::vector<std::size_t> sample_window(std::size_t count, Rng& rng) const;

  private:
    std::vector<PrimSlotRecord> records_;
    std::size_t capacity_;
};

}  // namespace thz360

#endif  // THZ360_ENV_HPP
