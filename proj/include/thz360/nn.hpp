// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.
//
// Minimal neural toolkit: stacked GRU / fully-connected layers with exact
// backpropagation through time, Adam, Ornstein-Uhlenbeck exploration
// noise, and a flat checkpoint format. Everything is 64-bit and plain
// loops; sizes here are small and gradient checks need the headroom.

#ifndef THZ360_NN_HPP
#define THZ360_NN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "thz360/common.hpp"

namespace thz360::nn {

enum class LayerKind { Input, Gru, Fc, Tanh, LeakyRelu };

struct LayerSpec {
    LayerKind kind = LayerKind::Input;
    std::size_t size = 0;  // input dim / hidden size / fc output size; 0 for activations
};

/// Parse "in:3|gru:16|lrelu|fc:8|tanh" into a layer list.
std::vector<LayerSpec> parse_spec(const std::string& text);
std::string format_spec(const std::vector<LayerSpec>& spec);

/// Hidden state: one vector per GRU layer, in order of appearance.
using Hidden = std::vector<std::vector<double>>;

/// One flat parameter vector plus the shape table derived from the spec.
class Network {
  public:
    Network() = default;
    explicit Network(std::vector<LayerSpec> spec);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
    static Network random(const std::vector<LayerSpec>& spec, Rng& rng);

    const std::vector<LayerSpec>& spec() const { return spec_; }
    std::size_t input_dim() const { return dims_.front(); }
    std::size_t output_dim() const { return dims_.back(); }
    std::size_t n_params() const { return params_.size(); }
    std::size_t n_gru_layers() const { return gru_hidden_sizes_.size(); }
    const std::vector<std::size_t>& gru_hidden_sizes() const { return gru_hidden_sizes_; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    Hidden zero_hidden() const;

    // layout helpers used by forward/backward
    std::size_t layer_count() const { return spec_.size(); }
    std::size_t layer_in_dim(std::size_t layer) const { return dims_[layer - 1]; }
    std::size_t layer_out_dim(std::size_t layer) const { return dims_[layer]; }
    std::size_t layer_offset(std::size_t layer) const { return offsets_[layer]; }

  private:
    std::vector<LayerSpec> spec_;
    std::vector<std::size_t> dims_;     // dims_[i] = output dim of layer i (dims_[0] = input)
    std::vector<std::size_t> offsets_;  // parameter offset per layer
    std::vector<std::size_t> gru_hidden_sizes_;
    std::vector<double> params_;
};

/// Everything backward needs, captured layer by layer and step by step.
struct ForwardCache {
    std::size_t steps = 0;
    // indexed [layer][t]
    std::vector<std::vector<std::vector<double>>> x;    // layer inputs
    std::vector<std::vector<std::vector<double>>> hprev, z, r, c, rh;  // GRU internals
    std::vector<std::vector<std::vector<double>>> y;    // activation outputs
};

struct ForwardResult {
    std::vector<std::vector<double>> outputs;  // per step
    Hidden h_final;
};

/// Run the stack over an input sequence from the given initial hidden
/// state (empty = zeros). Deterministic and pure.
ForwardResult forward(const Network& net, const std::vector<std::vector<double>>& seq,
                      const Hidden& h0, ForwardCache* cache = nullptr);

struct BackwardResult {
    std::vector<double> d_params;
    std::vector<std::vector<double>> d_inputs;  // per step
    Hidden d_h0;
};

/// Exact gradients of the forward pass. d_outputs gives the loss gradient
/// at each step's output (empty vectors allowed); d_h_final optionally
/// adds gradient arriving at the final hidden state of each GRU layer.
BackwardResult backward(const Network& net, const ForwardCache& cache,
                        const std::vector<std::vector<double>>& d_outputs,
                        const Hidden& d_h_final = {});

struct AdamState {
    std::vector<double> m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr = 1e-4;

    static AdamState for_params(std::size_t n, double lr);
};

/// In-place Adam update with bias correction.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& st);

/// Ornstein-Uhlenbeck process: x <- x + theta (0 - x) + sigma N(0, 1).
struct OuNoise {
    std::vector<double> state;
    double theta = 0.1;
    double sigma = 0.15;

    OuNoise() = default;
    OuNoise(std::size_t dim, double th, double sg)
        : state(dim, 0.0), theta(th), sigma(sg) {}
    void reset() { std::fill(state.begin(), state.end(), 0.0); }
    const std::vector<double>& step(Rng& rng);
};

/// Checkpoint: magic "NNCK", u32 spec length, UTF-8 spec string,
/// u64 param count, float64 params little-endian.
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace thz360::nn

#endif  // THZ360_NN_HPP
