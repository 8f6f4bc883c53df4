// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include "thz360/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace thz360::nn {

namespace {

constexpr double kLeakySlope = 0.01;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// y = W x + b, W row-major (rows x cols)
void affine(const double* w, const double* b, const std::vector<double>& x, std::size_t rows,
            std::size_t cols, std::vector<double>& y) {
    y.assign(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = b ? b[i] : 0.0;
        const double* wr = w + i * cols;
        for (std::size_t j = 0; j < cols; ++j) acc += wr[j] * x[j];
        y[i] = acc;
    }
}

// dx += W^T dy
void add_matT_vec(const double* w, const std::vector<double>& dy, std::size_t rows,
                  std::size_t cols, std::vector<double>& dx) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* wr = w + i * cols;
        const double g = dy[i];
        for (std::size_t j = 0; j < cols; ++j) dx[j] += wr[j] * g;
    }
}

// dW += dy x^T, db += dy
void accumulate_affine(double* dw, double* db, const std::vector<double>& dy,
                       const std::vector<double>& x, std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        double* wr = dw + i * cols;
        const double g = dy[i];
        for (std::size_t j = 0; j < cols; ++j) wr[j] += g * x[j];
        db[i] += g;
    }
}

std::size_t gru_param_count(std::size_t in, std::size_t h) { return 3 * (h * in + h * h + h); }

// offsets inside one GRU block: Wz Uz bz Wr Ur br Wc Uc bc
struct GruView {
    const double *wz, *uz, *bz, *wr, *ur, *br, *wc, *uc, *bc;
    GruView(const double* base, std::size_t in, std::size_t h) {
        const double* p = base;
        wz = p; p += h * in; uz = p; p += h * h; bz = p; p += h;
        wr = p; p += h * in; ur = p; p += h * h; br = p; p += h;
        wc = p; p += h * in; uc = p; p += h * h; bc = p; p += h;
    }
};

struct GruGradView {
    double *wz, *uz, *bz, *wr, *ur, *br, *wc, *uc, *bc;
    GruGradView(double* base, std::size_t in, std::size_t h) {
        double* p = base;
        wz = p; p += h * in; uz = p; p += h * h; bz = p; p += h;
        wr = p; p += h * in; ur = p; p += h * h; br = p; p += h;
        wc = p; p += h * in; uc = p; p += h * h; bc = p; p += h;
    }
};

}  // namespace

std::vector<LayerSpec> parse_spec(const std::string& text) {
    std::vector<LayerSpec> spec;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, '|')) {
        if (tok.rfind("in:", 0) == 0)
            spec.push_back({LayerKind::Input, std::stoul(tok.substr(3))});
        else if (tok.rfind("gru:", 0) == 0)
            spec.push_back({LayerKind::Gru, std::stoul(tok.substr(4))});
        else if (tok.rfind("fc:", 0) == 0)
            spec.push_back({LayerKind::Fc, std::stoul(tok.substr(3))});
        else if (tok == "tanh")
            spec.push_back({LayerKind::Tanh, 0});
        else if (tok == "lrelu")
            spec.push_back({LayerKind::LeakyRelu, 0});
        else
            throw std::invalid_argument("parse_spec: unknown layer token '" + tok + "'");
    }
    return spec;
}

std::string format_spec(const std::vector<LayerSpec>& spec) {
    std::string out;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (i) out += '|';
        switch (spec[i].kind) {
            case LayerKind::Input: out += "in:" + std::to_string(spec[i].size); break;
            case LayerKind::Gru: out += "gru:" + std::to_string(spec[i].size); break;
            case LayerKind::Fc: out += "fc:" + std::to_string(spec[i].size); break;
            case LayerKind::Tanh: out += "tanh"; break;
            case LayerKind::LeakyRelu: out += "lrelu"; break;
        }
    }
    return out;
}

Network::Network(std::vector<LayerSpec> spec) : spec_(std::move(spec)) {
    if (spec_.empty() || spec_.front().kind != LayerKind::Input || spec_.front().size == 0)
        throw std::invalid_argument("Network: spec must start with in:<dim>");
    dims_.resize(spec_.size());
    offsets_.resize(spec_.size(), 0);
    dims_[0] = spec_[0].size;
    std::size_t total = 0;
    for (std::size_t i = 1; i < spec_.size(); ++i) {
        offsets_[i] = total;
        const std::size_t in = dims_[i - 1];
        switch (spec_[i].kind) {
            case LayerKind::Input:
                throw std::invalid_argument("Network: in:<dim> only allowed first");
            case LayerKind::Gru:
                if (spec_[i].size == 0) throw std::invalid_argument("Network: zero GRU size");
                dims_[i] = spec_[i].size;
                gru_hidden_sizes_.push_back(spec_[i].size);
                total += gru_param_count(in, spec_[i].size);
                break;
            case LayerKind::Fc:
                if (spec_[i].size == 0) throw std::invalid_argument("Network: zero FC size");
                dims_[i] = spec_[i].size;
                total += spec_[i].size * in + spec_[i].size;
                break;
            case LayerKind::Tanh:
            case LayerKind::LeakyRelu:
                dims_[i] = in;
                break;
        }
    }
    params_.assign(total, 0.0);
}

Network Network::random(const std::vector<LayerSpec>& spec, Rng& rng) {
    Network net(spec);
    std::size_t pos = 0;
    auto fill_uniform = [&](std::size_t count, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (std::size_t i = 0; i < count; ++i) net.params_[pos++] = dist(rng);
    };
    auto skip_zeros = [&](std::size_t count) { pos += count; };
    for (std::size_t i = 1; i < net.spec_.size(); ++i) {
        const std::size_t in = net.dims_[i - 1];
        const std::size_t out = net.dims_[i];
        switch (net.spec_[i].kind) {
            case LayerKind::Gru:
                for (int gate = 0; gate < 3; ++gate) {
                    fill_uniform(out * in, in);   // W
                    fill_uniform(out * out, out); // U
                    skip_zeros(out);              // b
                }
                break;
            case LayerKind::Fc:
                fill_uniform(out * in, in);
                skip_zeros(out);
                break;
            default:
                break;
        }
    }
    return net;
}

Hidden Network::zero_hidden() const {
    Hidden h;
    for (std::size_t sz : gru_hidden_sizes_) h.emplace_back(sz, 0.0);
    return h;
}

ForwardResult forward(const Network& net, const std::vector<std::vector<double>>& seq,
                      const Hidden& h0, ForwardCache* cache) {
    const std::size_t layers = net.layer_count();
    const std::size_t steps = seq.size();
    Hidden hidden = h0.empty() ? net.zero_hidden() : h0;
    if (hidden.size() != net.n_gru_layers())
        throw std::invalid_argument("forward: hidden state layer count mismatch");
    for (std::size_t g = 0; g < hidden.size(); ++g)
        if (hidden[g].size() != net.gru_hidden_sizes()[g])
            throw std::invalid_argument("forward: hidden state size mismatch");

    if (cache) {
        cache->steps = steps;
        cache->x.assign(layers, {});
        cache->hprev.assign(layers, {});
        cache->z.assign(layers, {});
        cache->r.assign(layers, {});
        cache->c.assign(layers, {});
        cache->rh.assign(layers, {});
        cache->y.assign(layers, {});
    }

    ForwardResult res;
    res.outputs.reserve(steps);
    std::vector<double> cur, tmp_z, tmp_r, tmp_c, tmp_a;
    for (std::size_t t = 0; t < steps; ++t) {
        if (seq[t].size() != net.input_dim())
            throw std::invalid_argument("forward: input dim mismatch at step " + std::to_string(t));
        cur = seq[t];
        std::size_t gru_idx = 0;
        for (std::size_t li = 1; li < layers; ++li) {
            const std::size_t in = net.layer_in_dim(li);
            const std::size_t out = net.layer_out_dim(li);
            const double* base = net.params().data() + net.layer_offset(li);
            switch (net.spec()[li].kind) {
                case LayerKind::Gru: {
                    GruView v(base, in, out);
                    std::vector<double>& h = hidden[gru_idx];
                    affine(v.wz, v.bz, cur, out, in, tmp_z);
                    affine(v.wr, v.br, cur, out, in, tmp_r);
                    std::vector<double> uh;
                    affine(v.uz, nullptr, h, out, out, uh);
                    for (std::size_t i = 0; i < out; ++i) tmp_z[i] = sigmoid(tmp_z[i] + uh[i]);
                    affine(v.ur, nullptr, h, out, out, uh);
                    for (std::size_t i = 0; i < out; ++i) tmp_r[i] = sigmoid(tmp_r[i] + uh[i]);
                    std::vector<double> rh(out);
                    for (std::size_t i = 0; i < out; ++i) rh[i] = tmp_r[i] * h[i];
                    affine(v.wc, v.bc, cur, out, in, tmp_c);
                    affine(v.uc, nullptr, rh, out, out, uh);
                    for (std::size_t i = 0; i < out; ++i) tmp_c[i] = std::tanh(tmp_c[i] + uh[i]);
                    std::vector<double> hn(out);
                    for (std::size_t i = 0; i < out; ++i)
                        hn[i] = tmp_z[i] * h[i] + (1.0 - tmp_z[i]) * tmp_c[i];
                    if (cache) {
                        cache->x[li].push_back(cur);
                        cache->hprev[li].push_back(h);
                        cache->z[li].push_back(tmp_z);
                        cache->r[li].push_back(tmp_r);
                        cache->c[li].push_back(tmp_c);
                        cache->rh[li].push_back(rh);
                    }
                    h = hn;
                    cur = hn;
                    ++gru_idx;
                    break;
                }
                case LayerKind::Fc: {
                    if (cache) cache->x[li].push_back(cur);
                    affine(base, base + out * in, cur, out, in, tmp_a);
                    cur = tmp_a;
                    break;
                }
                case LayerKind::Tanh: {
                    for (double& v : cur) v = std::tanh(v);
                    if (cache) cache->y[li].push_back(cur);
                    break;
                }
                case LayerKind::LeakyRelu: {
                    if (cache) cache->x[li].push_back(cur);
                    for (double& v : cur) v = v > 0.0 ? v : kLeakySlope * v;
                    break;
                }
                case LayerKind::Input:
                    break;
            }
        }
        res.outputs.push_back(cur);
    }
    res.h_final = std::move(hidden);
    return res;
}

BackwardResult backward(const Network& net, const ForwardCache& cache,
                        const std::vector<std::vector<double>>& d_outputs,
                        const Hidden& d_h_final) {
    const std::size_t layers = net.layer_count();
    const std::size_t steps = cache.steps;
    if (!d_outputs.empty() && d_outputs.size() != steps)
        throw std::invalid_argument("backward: d_outputs length mismatch");

    BackwardResult res;
    res.d_params.assign(net.n_params(), 0.0);
    res.d_inputs.assign(steps, std::vector<double>(net.input_dim(), 0.0));

    // carry[g]: gradient flowing into GRU layer g's hidden state from t+1
    Hidden carry = net.zero_hidden();
    if (!d_h_final.empty()) {
        if (d_h_final.size() != carry.size())
            throw std::invalid_argument("backward: d_h_final layer count mismatch");
        for (std::size_t g = 0; g < carry.size(); ++g) carry[g] = d_h_final[g];
    }

    std::vector<double> dy;
    for (std::size_t ts = steps; ts-- > 0;) {
        if (!d_outputs.empty() && !d_outputs[ts].empty()) {
            if (d_outputs[ts].size() != net.output_dim())
                throw std::invalid_argument("backward: d_outputs dim mismatch");
            dy = d_outputs[ts];
        } else {
            dy.assign(net.output_dim(), 0.0);
        }
        std::size_t gru_idx = net.n_gru_layers();
        for (std::size_t li = layers; li-- > 1;) {
            const std::size_t in = net.layer_in_dim(li);
            const std::size_t out = net.layer_out_dim(li);
            const double* base = net.params().data() + net.layer_offset(li);
            double* gbase = res.d_params.data() + net.layer_offset(li);
            switch (net.spec()[li].kind) {
                case LayerKind::Gru: {
                    --gru_idx;
                    GruView v(base, in, out);
                    GruGradView g(gbase, in, out);
                    const auto& x = cache.x[li][ts];
                    const auto& h = cache.hprev[li][ts];
                    const auto& z = cache.z[li][ts];
                    const auto& r = cache.r[li][ts];
                    const auto& c = cache.c[li][ts];
                    const auto& rh = cache.rh[li][ts];
                    std::vector<double> dh_out(out);
                    for (std::size_t i = 0; i < out; ++i) dh_out[i] = dy[i] + carry[gru_idx][i];

                    std::vector<double> da_z(out), da_r(out), da_c(out), dh(out), drh(out, 0.0);
                    for (std::size_t i = 0; i < out; ++i) {
                        const double dz = dh_out[i] * (h[i] - c[i]);
                        const double dc = dh_out[i] * (1.0 - z[i]);
                        da_z[i] = dz * z[i] * (1.0 - z[i]);
                        da_c[i] = dc * (1.0 - c[i] * c[i]);
                        dh[i] = dh_out[i] * z[i];
                    }
                    add_matT_vec(v.uc, da_c, out, out, drh);
                    for (std::size_t i = 0; i < out; ++i) {
                        const double dr = drh[i] * h[i];
                        da_r[i] = dr * r[i] * (1.0 - r[i]);
                        dh[i] += drh[i] * r[i];
                    }
                    add_matT_vec(v.uz, da_z, out, out, dh);
                    add_matT_vec(v.ur, da_r, out, out, dh);

                    accumulate_affine(g.wz, g.bz, da_z, x, out, in);
                    accumulate_affine(g.wr, g.br, da_r, x, out, in);
                    accumulate_affine(g.wc, g.bc, da_c, x, out, in);
                    // U gradients: dU_z += da_z h^T, dU_r += da_r h^T, dU_c += da_c rh^T
                    for (std::size_t i = 0; i < out; ++i) {
                        double* uz_r = g.uz + i * out;
                        double* ur_r = g.ur + i * out;
                        double* uc_r = g.uc + i * out;
                        for (std::size_t j = 0; j < out; ++j) {
                            uz_r[j] += da_z[i] * h[j];
                            ur_r[j] += da_r[i] * h[j];
                            uc_r[j] += da_c[i] * rh[j];
                        }
                    }

                    std::vector<double> dx(in, 0.0);
                    add_matT_vec(v.wz, da_z, out, in, dx);
                    add_matT_vec(v.wr, da_r, out, in, dx);
                    add_matT_vec(v.wc, da_c, out, in, dx);
                    carry[gru_idx] = dh;
                    dy = dx;
                    break;
                }
                case LayerKind::Fc: {
                    const auto& x = cache.x[li][ts];
                    accumulate_affine(gbase, gbase + out * in, dy, x, out, in);
                    std::vector<double> dx(in, 0.0);
                    add_matT_vec(base, dy, out, in, dx);
                    dy = dx;
                    break;
                }
                case LayerKind::Tanh: {
                    const auto& y = cache.y[li][ts];
                    for (std::size_t i = 0; i < out; ++i) dy[i] *= (1.0 - y[i] * y[i]);
                    break;
                }
                case LayerKind::LeakyRelu: {
                    const auto& x = cache.x[li][ts];
                    for (std::size_t i = 0; i < out; ++i)
                        if (x[i] <= 0.0) dy[i] *= kLeakySlope;
                    break;
                }
                case LayerKind::Input:
                    break;
            }
        }
        res.d_inputs[ts] = dy;
    }
    res.d_h0 = std::move(carry);
    return res;
}

AdamState AdamState::for_params(std::size_t n, double lr) {
    AdamState st;
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);
    st.lr = lr;
    return st;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& st) {
    if (params.size() != grads.size() || params.size() != st.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    st.step += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grads[i];
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grads[i] * grads[i];
        const double mhat = st.m[i] / bc1;
        const double vhat = st.v[i] / bc2;
        params[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
    }
}

const std::vector<double>& OuNoise::step(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : state) x += theta * (0.0 - x) + sigma * normal(rng);
    return state;
}

void save_checkpoint(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out.write("NNCK", 4);
    const std::string spec = format_spec(net.spec());
    const std::uint32_t len = static_cast<std::uint32_t>(spec.size());
    unsigned char lb[4] = {static_cast<unsigned char>(len & 0xff),
                           static_cast<unsigned char>((len >> 8) & 0xff),
                           static_cast<unsigned char>((len >> 16) & 0xff),
                           static_cast<unsigned char>((len >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(lb), 4);
    out.write(spec.data(), static_cast<std::streamsize>(spec.size()));
    const std::uint64_t count = net.n_params();
    unsigned char cb[8];
    for (int i = 0; i < 8; ++i) cb[i] = static_cast<unsigned char>((count >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(cb), 8);
    for (double v : net.params()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char vb[8];
        for (int i = 0; i < 8; ++i) vb[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        out.write(reinterpret_cast<const char*>(vb), 8);
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Network load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "NNCK", 4) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    unsigned char lb[4];
    in.read(reinterpret_cast<char*>(lb), 4);
    const std::uint32_t len = static_cast<std::uint32_t>(lb[0]) |
                              (static_cast<std::uint32_t>(lb[1]) << 8) |
                              (static_cast<std::uint32_t>(lb[2]) << 16) |
                              (static_cast<std::uint32_t>(lb[3]) << 24);
    std::string spec(len, '\0');
    in.read(spec.data(), len);
    unsigned char cb[8];
    in.read(reinterpret_cast<char*>(cb), 8);
    std::uint64_t count = 0;
    for (int i = 0; i < 8; ++i) count |= static_cast<std::uint64_t>(cb[i]) << (8 * i);
    Network net(parse_spec(spec));
    if (net.n_params() != count)
        throw std::runtime_error("load_checkpoint: parameter count mismatch in " + path);
    for (double& v : net.params()) {
        unsigned char vb[8];
        in.read(reinterpret_cast<char*>(vb), 8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(vb[i]) << (8 * i);
        std::memcpy(&v, &bits, 8);
    }
    if (!in) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return net;
}

}  // namespace thz360::nn
