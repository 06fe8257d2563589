#pragma once

// Network families used by the experiments: deep MLPs (linear or ReLU) and a
// standard LSTM with a linear readout, plus their exact gradients (backprop /
// full-episode BPTT), the SGD / Adam update rules, and the REINFORCE logit
// gradient. Parameter sets expose a flat tensor view used by the optimizers
// and by the checkpoint archive (raw little-endian float64 + JSON manifest).

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

#include "metadyn/numerics.hpp"
#include "metadyn/util.hpp"

#include "json.hpp"

namespace metadyn::nets {

enum class Activation { linear, relu };

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec softmax(const Vec& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    Vec p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

// gradient over logits of -ret * log softmax(logits)[action]
inline Vec reinforce_logit_grad(const Vec& logits, int action, double ret) {
    if (action < 0 || action >= int(logits.size()))
        throw InvalidInputError("reinforce_logit_grad: action out of range");
    for (double v : logits)
        if (!std::isfinite(v)) throw InvalidInputError("reinforce_logit_grad: non-finite logits");
    Vec g = softmax(logits);
    for (double& v : g) v *= ret;
    g[action] -= ret;
    return g;
}

// ---------------------------------------------------------------------------
// Flat tensor view shared by optimizers and the archive writer.

struct TensorRef {
    std::string name;
    double* data;
    std::vector<int> shape;
    std::size_t size;
};

inline TensorRef ref(const std::string& name, Matrix& m) {
    return {name, m.data.data(), {m.rows, m.cols}, m.data.size()};
}
inline TensorRef ref(const std::string& name, Vec& v) {
    return {name, v.data(), {int(v.size())}, v.size()};
}

// ---------------------------------------------------------------------------
// MLP

struct MlpLayer {
    Matrix w;  // [out x in]
    Vec b;     // [out]
    Activation act = Activation::linear;
};

struct MlpParams {
    std::vector<MlpLayer> layers;

    int input_size() const { return layers.front().w.cols; }
    int output_size() const { return layers.back().w.rows; }

    std::vector<TensorRef> tensors() {
        std::vector<TensorRef> out;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            out.push_back(ref("layer" + std::to_string(l) + ".w", layers[l].w));
            out.push_back(ref("layer" + std::to_string(l) + ".b", layers[l].b));
        }
        return out;
    }

    bool finite() const {
        for (const auto& l : layers) {
            if (!l.w.finite()) return false;
            for (double v : l.b)
                if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

using MlpGrad = MlpParams;  // shape-congruent accumulator

inline MlpParams zeros_like(const MlpParams& p) {
    MlpParams g = p;
    for (auto& l : g.layers) {
        std::fill(l.w.data.begin(), l.w.data.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    return g;
}

// dims = {in, h1, ..., out}; hidden layers get `act`, the last is linear.
inline MlpParams init_mlp(const std::vector<int>& dims, Activation act, double sigma,
                          RngStream& rng) {
    MlpParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        MlpLayer layer;
        layer.w = Matrix(dims[l + 1], dims[l]);
        for (double& v : layer.w.data) v = sample_truncated_normal(sigma, rng);
        layer.b = Vec(dims[l + 1], 0.0);
        layer.act = (l + 2 < dims.size()) ? act : Activation::linear;
        p.layers.push_back(std::move(layer));
    }
    return p;
}

// sigma = 1/sqrt(fan_in) per layer
inline MlpParams init_mlp_fanin(const std::vector<int>& dims, Activation act, RngStream& rng) {
    MlpParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        MlpLayer layer;
        layer.w = Matrix(dims[l + 1], dims[l]);
        double sigma = 1.0 / std::sqrt(double(dims[l]));
        for (double& v : layer.w.data) v = sample_truncated_normal(sigma, rng);
        layer.b = Vec(dims[l + 1], 0.0);
        layer.act = (l + 2 < dims.size()) ? act : Activation::linear;
        p.layers.push_back(std::move(layer));
    }
    return p;
}

struct MlpCache {
    std::vector<Vec> pre;   // pre-activation per layer
    std::vector<Vec> post;  // post-activation per layer; post[0] is the input
};

inline Vec mlp_forward(const MlpParams& p, const Vec& x, MlpCache* cache = nullptr) {
    if (int(x.size()) != p.input_size()) throw ShapeError("mlp_forward: input size mismatch");
    if (cache) {
        cache->pre.clear();
        cache->post.clear();
        cache->post.push_back(x);
    }
    Vec a = x;
    for (const auto& layer : p.layers) {
        Vec z = matvec(layer.w, a);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += layer.b[i];
        if (cache) cache->pre.push_back(z);
        if (layer.act == Activation::relu)
            for (double& v : z) v = std::max(0.0, v);
        a = std::move(z);
        if (cache) cache->post.push_back(a);
    }
    return a;
}

// loss = mean over the batch of ||y_hat - y||^2, grad accumulated exactly.
// Batched: activations are [B x width] matrices so the layer products run as
// small GEMMs.
inline double mlp_l2_grad(const MlpParams& p, const std::vector<Vec>& xs,
                          const std::vector<Vec>& ys, MlpGrad& grad) {
    if (xs.empty() || xs.size() != ys.size()) throw ShapeError("mlp_l2_grad: bad batch");
    const int B = int(xs.size());
    const int nl = int(p.layers.size());
    const double inv_b = 1.0 / B;

    std::vector<Matrix> post(nl + 1);  // post[0] = inputs
    std::vector<Matrix> pre(nl);
    post[0] = Matrix(B, p.input_size());
    for (int n = 0; n < B; ++n) {
        if (int(xs[n].size()) != p.input_size()) throw ShapeError("mlp_l2_grad: input size");
        std::copy(xs[n].begin(), xs[n].end(), post[0].row(n));
    }
    for (int l = 0; l < nl; ++l) {
        const auto& layer = p.layers[l];
        Matrix z(B, layer.w.rows);
        for (int n = 0; n < B; ++n) std::copy(layer.b.begin(), layer.b.end(), z.row(n));
        gemm_accum_nt(post[l], layer.w, z);
        pre[l] = z;
        if (layer.act == Activation::relu)
            for (double& v : z.data) v = std::max(0.0, v);
        post[l + 1] = std::move(z);
    }

    double loss = 0.0;
    Matrix delta = post[nl];
    if (int(ys[0].size()) != p.output_size()) throw ShapeError("mlp_l2_grad: target size");
    for (int n = 0; n < B; ++n) {
        double* dn = delta.row(n);
        for (int i = 0; i < p.output_size(); ++i) {
            double d = dn[i] - ys[n][i];
            loss += d * d * inv_b;
            dn[i] = 2.0 * d * inv_b;
        }
    }
    for (int l = nl - 1; l >= 0; --l) {
        const auto& layer = p.layers[l];
        if (layer.act == Activation::relu)
            for (std::size_t i = 0; i < delta.data.size(); ++i)
                if (pre[l].data[i] <= 0.0) delta.data[i] = 0.0;
        auto& gl = grad.layers[l];
        gemm_accum_tn(delta, post[l], gl.w);
        for (int n = 0; n < B; ++n) {
            const double* dn = delta.row(n);
            for (int r = 0; r < layer.w.rows; ++r) gl.b[r] += dn[r];
        }
        if (l > 0) {
            Matrix prev(B, layer.w.cols);
            gemm_accum_nn(delta, layer.w, prev);
            delta = std::move(prev);
        }
    }
    return loss;
}

// Effective matrix of a purely linear MLP: the ordered product of its weight
// matrices (bias terms excluded).
inline Matrix mlp_effective_matrix(const MlpParams& p) {
    Matrix acc = p.layers[0].w;
    for (std::size_t l = 1; l < p.layers.size(); ++l) acc = matmul(p.layers[l].w, acc);
    return acc;
}

// ---------------------------------------------------------------------------
// LSTM (no peepholes). Gate order in the stacked tensors: input, forget,
// candidate, output.

struct LstmParams {
    int input_size = 0;
    int hidden_size = 0;
    int output_size = 0;
    Matrix wx;     // [4H x in]
    Matrix wh;     // [4H x H]
    Vec b;         // [4H]
    Matrix w_out;  // [out x H]
    Vec b_out;     // [out]

    std::vector<TensorRef> tensors() {
        return {ref("lstm.wx", wx), ref("lstm.wh", wh), ref("lstm.b", b),
                ref("readout.w", w_out), ref("readout.b", b_out)};
    }

    bool finite() const {
        if (!wx.finite() || !wh.finite() || !w_out.finite()) return false;
        for (double v : b)
            if (!std::isfinite(v)) return false;
        for (double v : b_out)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

using LstmGrad = LstmParams;

inline LstmParams zeros_like(const LstmParams& p) {
    LstmParams g = p;
    std::fill(g.wx.data.begin(), g.wx.data.end(), 0.0);
    std::fill(g.wh.data.begin(), g.wh.data.end(), 0.0);
    std::fill(g.b.begin(), g.b.end(), 0.0);
    std::fill(g.w_out.data.begin(), g.w_out.data.end(), 0.0);
    std::fill(g.b_out.begin(), g.b_out.end(), 0.0);
    return g;
}

// Truncated-normal weights with sigma = 1/sqrt(fan-in); forget-gate bias 1.
inline LstmParams init_lstm(int input_size, int hidden_size, int output_size, RngStream& rng) {
    LstmParams p;
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    p.output_size = output_size;
    p.wx = Matrix(4 * hidden_size, input_size);
    p.wh = Matrix(4 * hidden_size, hidden_size);
    p.b = Vec(4 * hidden_size, 0.0);
    p.w_out = Matrix(output_size, hidden_size);
    p.b_out = Vec(output_size, 0.0);
    double sx = 1.0 / std::sqrt(double(input_size));
    double sh = 1.0 / std::sqrt(double(hidden_size));
    for (double& v : p.wx.data) v = sample_truncated_normal(sx, rng);
    for (double& v : p.wh.data) v = sample_truncated_normal(sh, rng);
    for (double& v : p.w_out.data) v = sample_truncated_normal(sh, rng);
    for (int i = hidden_size; i < 2 * hidden_size; ++i) p.b[i] = 1.0;  // forget gate
    return p;
}

struct LstmState {
    Vec h;
    Vec c;

    static LstmState zero(int hidden_size) { return {Vec(hidden_size, 0.0), Vec(hidden_size, 0.0)}; }
};

namespace detail {

struct LstmStepWork {
    Vec gates;   // [4H] post-nonlinearity: i, f, g, o
    Vec c;       // [H]
    Vec tanh_c;  // [H]
    Vec h;       // [H]
};

inline void lstm_step_core(const LstmParams& p, const Vec& x, const Vec& h_prev,
                           const Vec& c_prev, LstmStepWork& w) {
    const int H = p.hidden_size;
    w.gates.assign(4 * H, 0.0);
    for (int r = 0; r < 4 * H; ++r) {
        const double* wxr = p.wx.row(r);
        double s = p.b[r];
        for (int j = 0; j < p.input_size; ++j) s += wxr[j] * x[j];
        const double* whr = p.wh.row(r);
        for (int j = 0; j < H; ++j) s += whr[j] * h_prev[j];
        w.gates[r] = s;
    }
    w.c.resize(H);
    w.tanh_c.resize(H);
    w.h.resize(H);
    for (int j = 0; j < H; ++j) {
        double i = sigmoid(w.gates[j]);
        double f = sigmoid(w.gates[H + j]);
        double g = std::tanh(w.gates[2 * H + j]);
        double o = sigmoid(w.gates[3 * H + j]);
        w.gates[j] = i;
        w.gates[H + j] = f;
        w.gates[2 * H + j] = g;
        w.gates[3 * H + j] = o;
        w.c[j] = f * c_prev[j] + i * g;
        w.tanh_c[j] = std::tanh(w.c[j]);
        w.h[j] = o * w.tanh_c[j];
    }
}

}  // namespace detail

// One recurrent step plus linear readout of the new hidden state.
inline Vec lstm_step(const LstmParams& p, LstmState& state, const Vec& input) {
    if (int(input.size()) != p.input_size) throw ShapeError("lstm_step: input size mismatch");
    if (int(state.h.size()) != p.hidden_size) throw ShapeError("lstm_step: state size mismatch");
    detail::LstmStepWork w;
    detail::lstm_step_core(p, input, state.h, state.c, w);
    state.h = w.h;
    state.c = std::move(w.c);
    Vec out(p.output_size);
    for (int r = 0; r < p.output_size; ++r) {
        const double* wr = p.w_out.row(r);
        double s = p.b_out[r];
        for (int j = 0; j < p.hidden_size; ++j) s += wr[j] * state.h[j];
        out[r] = s;
    }
    return out;
}

// Per-episode objectives for BPTT.
//
// L2: loss = (1/T) sum_t ||y_hat_t - y_t||^2.
// Reinforce: loss = -sum_t return_t * log softmax(logits_t)[action_t];
// the caller decides what the per-step return coefficient means.
struct L2EpisodeLoss {
    const std::vector<Vec>* targets;
};
struct ReinforceEpisodeLoss {
    const std::vector<int>* actions;
    const Vec* returns;
};
using EpisodeLoss = std::variant<L2EpisodeLoss, ReinforceEpisodeLoss>;

namespace detail {

// Full forward + backward through one episode; gradients are accumulated
// into `grad` (unscaled). Returns the episode loss.
inline double lstm_episode_grad(const LstmParams& p, const std::vector<Vec>& inputs,
                                const EpisodeLoss& loss_spec, LstmGrad& grad) {
    const int T = int(inputs.size());
    if (T == 0) throw InvalidInputError("lstm_episode_grad: empty episode");
    const int H = p.hidden_size;

    std::vector<LstmStepWork> steps(T);
    std::vector<Vec> outputs(T);
    Vec h_prev(H, 0.0), c_prev(H, 0.0);
    for (int t = 0; t < T; ++t) {
        lstm_step_core(p, inputs[t], h_prev, c_prev, steps[t]);
        outputs[t].resize(p.output_size);
        for (int r = 0; r < p.output_size; ++r) {
            const double* wr = p.w_out.row(r);
            double s = p.b_out[r];
            for (int j = 0; j < H; ++j) s += wr[j] * steps[t].h[j];
            outputs[t][r] = s;
        }
        h_prev = steps[t].h;
        c_prev = steps[t].c;
    }

    // per-step output gradients and the loss
    double loss = 0.0;
    std::vector<Vec> dout(T);
    if (std::holds_alternative<L2EpisodeLoss>(loss_spec)) {
        const auto& spec = std::get<L2EpisodeLoss>(loss_spec);
        if (int(spec.targets->size()) != T) throw ShapeError("lstm_episode_grad: target count");
        for (int t = 0; t < T; ++t) {
            const Vec& y = (*spec.targets)[t];
            dout[t].resize(p.output_size);
            for (int r = 0; r < p.output_size; ++r) {
                double d = outputs[t][r] - y[r];
                loss += d * d / T;
                dout[t][r] = 2.0 * d / T;
            }
        }
    } else {
        const auto& spec = std::get<ReinforceEpisodeLoss>(loss_spec);
        if (int(spec.actions->size()) != T || int(spec.returns->size()) != T)
            throw ShapeError("lstm_episode_grad: action/return count");
        for (int t = 0; t < T; ++t) {
            Vec probs = softmax(outputs[t]);
            int a = (*spec.actions)[t];
            double ret = (*spec.returns)[t];
            loss -= ret * std::log(std::max(probs[a], 1e-300));
            dout[t] = probs;
            for (double& v : dout[t]) v *= ret;
            dout[t][a] -= ret;
        }
    }

    // backward through time
    Vec dh(H, 0.0), dc(H, 0.0), dz(4 * H);
    const Vec zero_state(H, 0.0);
    for (int t = T - 1; t >= 0; --t) {
        const auto& st = steps[t];
        // readout
        for (int r = 0; r < p.output_size; ++r) {
            double d = dout[t][r];
            grad.b_out[r] += d;
            double* gw = grad.w_out.row(r);
            const double* wr = p.w_out.row(r);
            for (int j = 0; j < H; ++j) {
                gw[j] += d * st.h[j];
                dh[j] += wr[j] * d;
            }
        }
        const Vec& cp = (t > 0) ? steps[t - 1].c : zero_state;
        const Vec& hp = (t > 0) ? steps[t - 1].h : zero_state;
        for (int j = 0; j < H; ++j) {
            double i = st.gates[j], f = st.gates[H + j];
            double g = st.gates[2 * H + j], o = st.gates[3 * H + j];
            double tc = st.tanh_c[j];
            double d_o = dh[j] * tc;
            double d_c = dc[j] + dh[j] * o * (1.0 - tc * tc);
            double d_i = d_c * g;
            double d_g = d_c * i;
            double d_f = d_c * cp[j];
            dc[j] = d_c * f;  // flows to step t-1
            dz[j] = d_i * i * (1.0 - i);
            dz[H + j] = d_f * f * (1.0 - f);
            dz[2 * H + j] = d_g * (1.0 - g * g);
            dz[3 * H + j] = d_o * o * (1.0 - o);
        }
        std::fill(dh.begin(), dh.end(), 0.0);
        for (int r = 0; r < 4 * H; ++r) {
            double d = dz[r];
            grad.b[r] += d;
            double* gx = grad.wx.row(r);
            const Vec& x = inputs[t];
            for (int j = 0; j < p.input_size; ++j) gx[j] += d * x[j];
            double* gh = grad.wh.row(r);
            const double* whr = p.wh.row(r);
            for (int j = 0; j < H; ++j) {
                gh[j] += d * hp[j];
                dh[j] += whr[j] * d;
            }
        }
    }
    return loss;
}

}  // namespace detail

struct LstmEpisodeSpec {
    std::vector<Vec> inputs;       // T x input_size
    std::vector<Vec> l2_targets;   // supervised objective, or
    std::vector<int> actions;      // REINFORCE objective
    Vec returns;
};

// Mean episode loss over a minibatch with the exact gradient of that mean.
// Episodes are processed in fixed blocks whose partial gradients are summed
// in block order, so the result is independent of the worker count.
inline double lstm_bptt(const LstmParams& params, const std::vector<LstmEpisodeSpec>& episodes,
                        LstmGrad& grad) {
    if (episodes.empty()) throw InvalidInputError("lstm_bptt: empty minibatch");
    const std::size_t B = episodes.size();
    const std::size_t n_blocks = std::min<std::size_t>(B, 16);
    std::vector<LstmGrad> block_grads(n_blocks, zeros_like(params));
    Vec block_loss(n_blocks, 0.0);
    parallel_for(n_blocks, [&](std::size_t blk) {
        std::size_t lo = blk * B / n_blocks, hi = (blk + 1) * B / n_blocks;
        for (std::size_t e = lo; e < hi; ++e) {
            const auto& ep = episodes[e];
            EpisodeLoss spec = ep.l2_targets.empty()
                                   ? EpisodeLoss(ReinforceEpisodeLoss{&ep.actions, &ep.returns})
                                   : EpisodeLoss(L2EpisodeLoss{&ep.l2_targets});
            block_loss[blk] += detail::lstm_episode_grad(params, ep.inputs, spec, block_grads[blk]);
        }
    });
    double loss = 0.0;
    const double inv_b = 1.0 / double(B);
    auto grefs = grad.tensors();
    for (std::size_t blk = 0; blk < n_blocks; ++blk) {
        loss += block_loss[blk];
        auto brefs = block_grads[blk].tensors();
        for (std::size_t k = 0; k < grefs.size(); ++k)
            for (std::size_t i = 0; i < grefs[k].size; ++i)
                grefs[k].data[i] += inv_b * brefs[k].data[i];
    }
    return loss * inv_b;
}

// ---------------------------------------------------------------------------
// Optimizers

inline void sgd_update(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads,
                       double lr) {
    if (lr <= 0.0) throw InvalidInputError("sgd_update: lr must be > 0");
    for (std::size_t k = 0; k < params.size(); ++k)
        for (std::size_t i = 0; i < params[k].size; ++i)
            params[k].data[i] -= lr * grads[k].data[i];
}

struct AdamState {
    std::vector<Vec> m, v;
    long t = 0;

    std::vector<TensorRef> tensors() {
        std::vector<TensorRef> out;
        for (std::size_t k = 0; k < m.size(); ++k) {
            out.push_back(ref("adam.m" + std::to_string(k), m[k]));
            out.push_back(ref("adam.v" + std::to_string(k), v[k]));
        }
        return out;
    }
};

inline void adam_update(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads,
                        AdamState& state, double lr, double beta1 = 0.9, double beta2 = 0.999,
                        double eps = 1e-8) {
    if (lr <= 0.0) throw InvalidInputError("adam_update: lr must be > 0");
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p.size, 0.0);
            state.v.emplace_back(p.size, 0.0);
        }
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(beta1, double(state.t));
    const double bc2 = 1.0 - std::pow(beta2, double(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        double* m = state.m[k].data();
        double* v = state.v[k].data();
        const double* g = grads[k].data;
        double* p = params[k].data;
        for (std::size_t i = 0; i < params[k].size; ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    }
}

// ---------------------------------------------------------------------------
// Tensor archive: <prefix>.bin holds raw little-endian float64 payloads back
// to back; <prefix>.json lists names, shapes and byte offsets.

inline void save_tensor_archive(const std::string& prefix, const std::vector<TensorRef>& refs) {
    std::ofstream bin(prefix + ".bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw Error("save_tensor_archive: cannot open " + prefix + ".bin");
    nlohmann::json manifest;
    manifest["byte_order"] = "little";
    manifest["dtype"] = "float64";
    manifest["tensors"] = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& r : refs) {
        bin.write(reinterpret_cast<const char*>(r.data), std::streamsize(r.size * sizeof(double)));
        manifest["tensors"].push_back(
            {{"name", r.name}, {"shape", r.shape}, {"byte_offset", offset}});
        offset += r.size * sizeof(double);
    }
    bin.close();
    std::ofstream js(prefix + ".json", std::ios::trunc);
    js << manifest.dump(2) << "\n";
}

inline void load_tensor_archive(const std::string& prefix, const std::vector<TensorRef>& refs) {
    std::ifstream js(prefix + ".json");
    if (!js) throw Error("load_tensor_archive: cannot open " + prefix + ".json");
    nlohmann::json manifest = nlohmann::json::parse(js);
    std::ifstream bin(prefix + ".bin", std::ios::binary);
    if (!bin) throw Error("load_tensor_archive: cannot open " + prefix + ".bin");
    for (const auto& r : refs) {
        bool found = false;
        for (const auto& entry : manifest["tensors"]) {
            if (entry["name"] != r.name) continue;
            std::size_t expect = 1;
            for (int d : entry["shape"].get<std::vector<int>>()) expect *= std::size_t(d);
            if (expect != r.size)
                throw ShapeError("load_tensor_archive: shape mismatch for " + r.name);
            bin.seekg(std::streamoff(entry["byte_offset"].get<std::size_t>()));
            bin.read(reinterpret_cast<char*>(r.data), std::streamsize(r.size * sizeof(double)));
            found = true;
            break;
        }
        if (!found) throw Error("load_tensor_archive: tensor missing: " + r.name);
    }
}

}  // namespace metadyn::nets
