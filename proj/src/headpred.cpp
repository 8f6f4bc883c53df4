// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/headpred.hpp"

#include <algorithm>
#include <cmath>

namespace thz360 {

namespace {

std::vector<nn::LayerSpec> body_spec(const HeadModelConfig& cfg) {
    std::vector<nn::LayerSpec> spec = {{nn::LayerKind::Input, 3}};
    for (std::size_t i = 0; i < cfg.n_layers; ++i)
        spec.push_back({nn::LayerKind::Gru, cfg.d_gru});
    return spec;
}

std::vector<std::vector<double>> encode_sequence(const std::vector<HeadPose>& poses) {
    std::vector<std::vector<double>> seq;
    seq.reserve(poses.size());
    for (const auto& p : poses) {
        const auto e = encode_pose(p);
        seq.push_back({e[0], e[1], e[2]});
    }
    return seq;
}

}  // namespace

void HeadModelConfig::validate() const {
    if (q_hist == 0 || q_pred == 0) throw std::invalid_argument("HeadModelConfig: empty windows");
    if (d_gru == 0 || n_layers == 0) throw std::invalid_argument("HeadModelConfig: empty model");
}

std::array<double, 3> encode_pose(const HeadPose& pose) {
    return {pose.theta, std::sin(pose.phi), std::cos(pose.phi)};
}

HeadPose decode_output(const std::vector<double>& out3) {
    HeadPose p;
    p.theta = std::clamp(out3[0], 0.0, kPi);
    p.phi = (out3[1] == 0.0 && out3[2] == 0.0) ? 0.0
                                               : wrap_two_pi(std::atan2(out3[1], out3[2]));
    return p;
}

HeadModel HeadModel::random(const HeadModelConfig& cfg, Rng& rng) {
    cfg.validate();
    HeadModel m;
    m.cfg = cfg;
    m.encoder = nn::Network::random(body_spec(cfg), rng);
    m.decoder = nn::Network::random(body_spec(cfg), rng);
    m.head = nn::Network::random(
        {{nn::LayerKind::Input, cfg.d_gru}, {nn::LayerKind::Fc, 3}}, rng);
    return m;
}

std::vector<double> HeadModel::gru_params() const {
    std::vector<double> flat = encoder.params();
    flat.insert(flat.end(), decoder.params().begin(), decoder.params().end());
    return flat;
}

void HeadModel::set_gru_params(const std::vector<double>& flat) {
    if (flat.size() != n_gru_params())
        throw std::invalid_argument("set_gru_params: length mismatch");
    std::copy(flat.begin(), flat.begin() + static_cast<long>(encoder.n_params()),
              encoder.params().begin());
    std::copy(flat.begin() + static_cast<long>(encoder.n_params()), flat.end(),
              decoder.params().begin());
}

std::vector<HeadPose> HeadModel::predict(const std::vector<HeadPose>& hist) const {
    if (hist.size() != cfg.q_hist)
        throw std::invalid_argument("predict: history length must equal q_hist");
    const auto enc_in = encode_sequence(hist);
    nn::ForwardResult enc = nn::forward(encoder, enc_in, {});
    // the decoder re-reads the latest pose at every step; the encoder
    // state carries the motion history
    std::vector<std::vector<double>> dec_in(cfg.q_pred, enc_in.back());
    nn::ForwardResult dec = nn::forward(decoder, dec_in, enc.h_final);
    nn::ForwardResult out = nn::forward(head, dec.outputs, {});
    std::vector<HeadPose> pred;
    pred.reserve(cfg.q_pred);
    for (const auto& o : out.outputs) pred.push_back(decode_output(o));
    return pred;
}

double head_loss(const std::vector<std::vector<HeadPose>>& preds,
                 const std::vector<std::vector<HeadPose>>& actuals) {
    if (preds.size() != actuals.size())
        throw std::invalid_argument("head_loss: sequence count mismatch");
    if (preds.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < preds.size(); ++s) {
        if (preds[s].size() != actuals[s].size())
            throw std::invalid_argument("head_loss: sequence length mismatch");
        double eps2 = 0.0;
        for (std::size_t t = 0; t < preds[s].size(); ++t) {
            const double dth = preds[s][t].theta - actuals[s][t].theta;
            const double dph = wrap_pi(preds[s][t].phi - actuals[s][t].phi);
            eps2 += dth * dth + dph * dph;
        }
        total += eps2;
    }
    return total / static_cast<double>(preds.size());
}

HeadGradient head_gradient(const HeadModel& model, const UserDataset& data) {
    HeadGradient grad;
    grad.d_gru.assign(model.n_gru_params(), 0.0);
    grad.d_fc.assign(model.head.n_params(), 0.0);
    if (data.empty()) return grad;
    const double inv_s = 1.0 / static_cast<double>(data.size());

    for (const auto& sample : data) {
        const auto enc_in = encode_sequence(sample.hist);
        nn::ForwardCache enc_cache, dec_cache, head_cache;
        nn::ForwardResult enc = nn::forward(model.encoder, enc_in, {}, &enc_cache);
        std::vector<std::vector<double>> dec_in(model.cfg.q_pred, enc_in.back());
        nn::ForwardResult dec = nn::forward(model.decoder, dec_in, enc.h_final, &dec_cache);
        nn::ForwardResult out = nn::forward(model.head, dec.outputs, {}, &head_cache);

        // d loss / d raw outputs; theta passes through its clamp only
        // inside the valid range, phi differentiates through atan2
        std::vector<std::vector<double>> d_out(out.outputs.size(), std::vector<double>(3, 0.0));
        double eps2 = 0.0;
        for (std::size_t t = 0; t < out.outputs.size(); ++t) {
            const auto& o = out.outputs[t];
            const HeadPose pred = decode_output(o);
            const HeadPose& act = sample.target[t];
            const double dth = pred.theta - act.theta;
            const double dph = wrap_pi(pred.phi - act.phi);
            eps2 += dth * dth + dph * dph;
            if (o[0] >= 0.0 && o[0] <= kPi) d_out[t][0] = 2.0 * dth * inv_s;
            const double denom = o[1] * o[1] + o[2] * o[2];
            if (denom > 1e-12) {
                d_out[t][1] = 2.0 * dph * (o[2] / denom) * inv_s;
                d_out[t][2] = 2.0 * dph * (-o[1] / denom) * inv_s;
            }
        }
        grad.loss += eps2 * inv_s;

        nn::BackwardResult bw_head = nn::backward(model.head, head_cache, d_out);
        nn::BackwardResult bw_dec =
            nn::backward(model.decoder, dec_cache, bw_head.d_inputs);
        nn::BackwardResult bw_enc = nn::backward(model.encoder, enc_cache, {}, bw_dec.d_h0);

        for (std::size_t i = 0; i < bw_enc.d_params.size(); ++i)
            grad.d_gru[i] += bw_enc.d_params[i];
        const std::size_t off = model.encoder.n_params();
        for (std::size_t i = 0; i < bw_dec.d_params.size(); ++i)
            grad.d_gru[off + i] += bw_dec.d_params[i];
        for (std::size_t i = 0; i < bw_head.d_params.size(); ++i)
            grad.d_fc[i] += bw_head.d_params[i];
    }
    return grad;
}

void local_update(HeadModel& model, const UserDataset& data, int iters, double lr) {
    if (iters < 1) throw std::invalid_argument("local_update: iters must be >= 1");
    for (int k = 0; k < iters; ++k) {
        const HeadGradient g = head_gradient(model, data);
        std::vector<double> flat = model.gru_params();
        for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= lr * g.d_gru[i];
        model.set_gru_params(flat);
    }
}

void fine_tune(HeadModel& model, const UserDataset& data, int iters, double lr) {
    for (int k = 0; k < iters; ++k) {
        const HeadGradient g = head_gradient(model, data);
        std::vector<double> flat = model.gru_params();
        for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= lr * g.d_gru[i];
        model.set_gru_params(flat);
        for (std::size_t i = 0; i < model.head.params().size(); ++i)
            model.head.params()[i] -= lr * g.d_fc[i];
    }
}

std::vector<double> aggregate(const std::vector<std::vector<double>>& parts,
                              const std::vector<double>& alpha) {
    if (parts.empty() || parts.size() != alpha.size())
        throw std::invalid_argument("aggregate: weight count mismatch");
    const std::size_t n = parts.front().size();
    std::vector<long double> acc(n, 0.0L);
    for (std::size_t u = 0; u < parts.size(); ++u) {
        if (parts[u].size() != n) throw std::invalid_argument("aggregate: length mismatch");
        for (std::size_t i = 0; i < n; ++i)
            acc[i] += static_cast<long double>(alpha[u]) * parts[u][i];
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(acc[i]);
    return out;
}

std::vector<double> aggregation_weights(const std::vector<std::size_t>& chunk_counts) {
    std::size_t total = 0;
    for (std::size_t c : chunk_counts) total += c;
    if (total == 0) throw std::invalid_argument("aggregation_weights: no data");
    std::vector<double> alpha;
    alpha.reserve(chunk_counts.size());
    for (std::size_t c : chunk_counts)
        alpha.push_back(static_cast<double>(c) / static_cast<double>(total));
    return alpha;
}

namespace {

double dataset_loss(const HeadModel& model, const UserDataset& data) {
    std::vector<std::vector<HeadPose>> preds, acts;
    for (const auto& s : data) {
        preds.push_back(model.predict(s.hist));
        acts.push_back(s.target);
    }
    return head_loss(preds, acts);
}

PflResult run_rounds(const PflConfig& cfg, const std::vector<UserDataset>& data,
                     const std::vector<double>& alpha, bool aggregate_head) {
    if (data.empty() || data.size() != alpha.size())
        throw std::invalid_argument("train: user/weight count mismatch");
    Rng rng(cfg.seed);
    HeadModel init = HeadModel::random(cfg.model, rng);

    std::vector<double> global_gru = init.gru_params();
    std::vector<double> global_fc = init.head.params();

    PflResult res;
    for (int r = 0; r < cfg.rounds; ++r) {
        std::vector<std::vector<double>> gru_parts(data.size());
        std::vector<std::vector<double>> fc_parts(data.size());
        double mean_loss = 0.0;
        for (std::size_t u = 0; u < data.size(); ++u) {
            HeadModel local = init;
            local.set_gru_params(global_gru);
            local.head.params() = global_fc;
            if (aggregate_head)
                fine_tune(local, data[u], cfg.local_iters, cfg.lr);
            else
                local_update(local, data[u], cfg.local_iters, cfg.lr);
            gru_parts[u] = local.gru_params();
            if (aggregate_head) fc_parts[u] = local.head.params();
            mean_loss += dataset_loss(local, data[u]) / static_cast<double>(data.size());
        }
        global_gru = aggregate(gru_parts, alpha);
        if (aggregate_head) global_fc = aggregate(fc_parts, alpha);
        res.round_loss.push_back(mean_loss);
    }

    res.global = init;
    res.global.set_gru_params(global_gru);
    res.global.head.params() = global_fc;
    return res;
}

}  // namespace

PflResult train_pfl(const PflConfig& cfg, const std::vector<UserDataset>& data,
                    const std::vector<double>& alpha) {
    PflResult res = run_rounds(cfg, data, alpha, /*aggregate_head=*/false);
    for (std::size_t u = 0; u < data.size(); ++u) {
        HeadModel personal = res.global;
        fine_tune(personal, data[u], cfg.fine_tune_iters, cfg.lr);
        res.personalized.push_back(std::move(personal));
    }
    return res;
}

PflResult train_fedavg(const PflConfig& cfg, const std::vector<UserDataset>& data,
                       const std::vector<double>& alpha) {
    PflResult res = run_rounds(cfg, data, alpha, /*aggregate_head=*/true);
    res.personalized.assign(data.size(), res.global);  // everyone shares the model
    return res;
}

std::vector<Persona> default_personas(std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("default_personas: need at least one persona");
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);
    std::vector<Persona> personas;
    for (std::size_t k = 0; k < n; ++k) {
        Persona p;
        const double centre = (static_cast<double>(k) + 0.5) * kTwoPi / static_cast<double>(n);
        for (int j = 0; j < 3; ++j)
            p.attractors.push_back(HeadPose{
                std::clamp(kPi / 2.0 + jitter(rng), 0.2, kPi - 0.2),
                wrap_two_pi(centre + 0.4 * jitter(rng))});
        personas.push_back(std::move(p));
    }
    return personas;
}

TraceTable generate_traces(const std::vector<Persona>& personas, std::size_t n_videos,
                           std::size_t frames_per_video, std::uint64_t seed) {
    TraceTable table;
    for (std::size_t u = 0; u < personas.size(); ++u) {
        const Persona& p = personas[u];
        if (p.attractors.empty())
            throw std::invalid_argument("generate_traces: persona without attractors");
        for (std::size_t v = 0; v < n_videos; ++v) {
            Rng rng(mix_seed(seed, u * 7919ULL + v));
            std::normal_distribution<double> gauss(0.0, 1.0);
            std::uniform_int_distribution<std::size_t> pick(0, p.attractors.size() - 1);
            HeadPose pose = p.attractors[pick(rng)];
            std::size_t target = pick(rng);
            std::vector<HeadPose> frames;
            frames.reserve(frames_per_video);
            for (std::size_t f = 0; f < frames_per_video; ++f) {
                if (p.switch_every > 0 && f > 0 &&
                    f % static_cast<std::size_t>(p.switch_every) == 0)
                    target = pick(rng);
                const HeadPose& att = p.attractors[target];
                pose.theta += p.pull * (att.theta - pose.theta) + p.noise * gauss(rng);
                pose.phi += p.pull * wrap_pi(att.phi - pose.phi) + p.noise * gauss(rng);
                pose.theta = std::clamp(pose.theta, 0.05, kPi - 0.05);
                pose.phi = wrap_two_pi(pose.phi);
                frames.push_back(pose);
            }
            table[u][v] = std::move(frames);
        }
    }
    return table;
}

UserDataset build_user_dataset(const TraceTable& traces, std::size_t user,
                               const std::vector<std::size_t>& videos, std::size_t q_hist,
                               std::size_t q_pred) {
    const auto it = traces.find(user);
    if (it == traces.end()) throw std::invalid_argument("build_user_dataset: unknown user");
    UserDataset data;
    for (std::size_t v : videos) {
        const auto vit = it->second.find(v);
        if (vit == it->second.end())
            throw std::invalid_argument("build_user_dataset: unknown video");
        const auto& frames = vit->second;
        for (std::size_t start = 0; start + q_hist + q_pred <= frames.size();
             start += q_hist) {
            TraceSample s;
            s.hist.assign(frames.begin() + static_cast<long>(start),
                          frames.begin() + static_cast<long>(start + q_hist));
            s.target.assign(frames.begin() + static_cast<long>(start + q_hist),
                            frames.begin() + static_cast<long>(start + q_hist + q_pred));
            data.push_back(std::move(s));
        }
    }
    return data;
}

}  // namespace thz360
