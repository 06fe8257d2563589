#include <catch2/catch_amalgamated.hpp>

#include "metadyn/nets.hpp"

using namespace metadyn;
using namespace metadyn::nets;

namespace {

// rel error with a floor so near-zero coordinates compare absolutely
double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-4});
}

// central finite difference of `loss_fn` w.r.t. every tensor element
template <typename Params, typename LossFn>
void check_grad_against_fd(Params& params, const Params& analytic_grad, LossFn loss_fn,
                           double eps = 1e-5, double tol = 1e-4) {
    Params& mutable_grad = const_cast<Params&>(analytic_grad);
    auto prefs = params.tensors();
    auto grefs = mutable_grad.tensors();
    for (std::size_t k = 0; k < prefs.size(); ++k) {
        for (std::size_t i = 0; i < prefs[k].size; ++i) {
            double saved = prefs[k].data[i];
            prefs[k].data[i] = saved + eps;
            double up = loss_fn();
            prefs[k].data[i] = saved - eps;
            double down = loss_fn();
            prefs[k].data[i] = saved;
            double fd = (up - down) / (2.0 * eps);
            REQUIRE(rel_err(grefs[k].data[i], fd) < tol);
        }
    }
}

MlpParams identity_linear_mlp(int n) {
    MlpParams p;
    for (int l = 0; l < 2; ++l) {
        MlpLayer layer;
        layer.w = Matrix::identity(n);
        layer.b = Vec(n, 0.0);
        layer.act = Activation::linear;
        p.layers.push_back(layer);
    }
    return p;
}

}  // namespace

TEST_CASE("mlp forward composes layers") {
    MlpParams p = identity_linear_mlp(2);
    Vec y = mlp_forward(p, {1.0, 2.0});
    CHECK(y[0] == 1.0);
    CHECK(y[1] == 2.0);

    // all-zero weights: output equals the final bias
    RngStream rng(1, 0);
    MlpParams z = init_mlp({3, 4, 2}, Activation::relu, 0.1, rng);
    for (auto& layer : z.layers) std::fill(layer.w.data.begin(), layer.w.data.end(), 0.0);
    z.layers.back().b = {0.7, -0.3};
    Vec yz = mlp_forward(z, {1.0, 2.0, 3.0});
    CHECK(yz[0] == 0.7);
    CHECK(yz[1] == -0.3);

    CHECK_THROWS_AS(mlp_forward(z, {1.0}), ShapeError);
}

TEST_CASE("mlp forward matches a naive reimplementation") {
    RngStream rng(2, 0);
    MlpParams p = init_mlp({4, 6, 5, 3}, Activation::relu, 0.5, rng);
    for (auto& layer : p.layers)
        for (double& v : layer.b) v = 0.3 * rng.gaussian();
    Vec x{0.3, -1.2, 0.5, 2.0};
    Vec got = mlp_forward(p, x);

    // independent forward pass
    Vec a = x;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        Vec z(layer.w.rows);
        for (int r = 0; r < layer.w.rows; ++r) {
            z[r] = layer.b[r];
            for (int c = 0; c < layer.w.cols; ++c) z[r] += layer.w(r, c) * a[c];
        }
        if (layer.act == Activation::relu)
            for (double& v : z) v = v > 0.0 ? v : 0.0;
        a = z;
    }
    REQUIRE(got.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(got[i] == Catch::Approx(a[i]).margin(1e-12));
}

TEST_CASE("deep linear mlp equals its effective matrix") {
    RngStream rng(3, 0);
    MlpParams p = init_mlp({3, 10, 3}, Activation::linear, 0.4, rng);
    Matrix w_eff = mlp_effective_matrix(p);
    for (int trial = 0; trial < 10; ++trial) {
        Vec x(3);
        for (double& v : x) v = rng.gaussian();
        Vec direct = mlp_forward(p, x);
        Vec via = matvec(w_eff, x);
        for (int i = 0; i < 3; ++i) CHECK(direct[i] == Catch::Approx(via[i]).margin(1e-10));
    }
}

TEST_CASE("mlp l2 loss and gradient basics") {
    MlpParams p = identity_linear_mlp(2);
    MlpGrad g = zeros_like(p);
    double loss = mlp_l2_grad(p, {{1.0, 2.0}}, {{1.0, 2.0}}, g);
    CHECK(loss == 0.0);
    for (auto& layer : g.layers)
        for (double v : layer.w.data) CHECK(v == 0.0);

    // scalar net y = w x, w=2: one sample (x=1, y=0) gives loss 4, dL/dw 4
    MlpParams s;
    MlpLayer layer;
    layer.w = Matrix(1, 1);
    layer.w(0, 0) = 2.0;
    layer.b = Vec(1, 0.0);
    s.layers.push_back(layer);
    MlpGrad gs = zeros_like(s);
    double ls = mlp_l2_grad(s, {{1.0}}, {{0.0}}, gs);
    CHECK(ls == Catch::Approx(4.0));
    CHECK(gs.layers[0].w(0, 0) == Catch::Approx(4.0));
}

TEST_CASE("mlp gradients match finite differences") {
    RngStream rng(4, 0);
    for (int config = 0; config < 10; ++config) {
        Activation act = (config % 2 == 0) ? Activation::relu : Activation::linear;
        MlpParams p = init_mlp({3, 5, 4, 2}, act, 0.6, rng);
        std::vector<Vec> xs, ys;
        for (int n = 0; n < 3; ++n) {
            Vec x(3), y(2);
            for (double& v : x) v = rng.gaussian();
            for (double& v : y) v = rng.gaussian();
            xs.push_back(x);
            ys.push_back(y);
        }
        // keep ReLU pre-activations away from the kink so fd stays valid
        if (act == Activation::relu) {
            MlpCache cache;
            double closest = 1e9;
            for (const auto& x : xs) {
                mlp_forward(p, x, &cache);
                for (std::size_t l = 0; l + 1 < p.layers.size(); ++l)
                    for (double v : cache.pre[l]) closest = std::min(closest, std::abs(v));
            }
            if (closest < 1e-3) continue;
        }
        MlpGrad g = zeros_like(p);
        mlp_l2_grad(p, xs, ys, g);
        MlpGrad dummy = zeros_like(p);
        check_grad_against_fd(p, g, [&] {
            MlpGrad scratch = zeros_like(p);
            return mlp_l2_grad(p, xs, ys, scratch);
        });
    }
}

TEST_CASE("lstm zero-parameter step") {
    LstmParams p;
    p.input_size = 3;
    p.hidden_size = 4;
    p.output_size = 2;
    p.wx = Matrix(16, 3);
    p.wh = Matrix(16, 4);
    p.b = Vec(16, 0.0);
    p.w_out = Matrix(2, 4);
    p.b_out = {0.5, -1.0};
    LstmState st = LstmState::zero(4);
    Vec out = lstm_step(p, st, {1.0, 2.0, 3.0});
    CHECK(out[0] == 0.5);
    CHECK(out[1] == -1.0);
    for (double h : st.h) CHECK(h == 0.0);  // o * tanh(c) with c = 0
}

TEST_CASE("saturated forget gate preserves the cell") {
    RngStream rng(5, 0);
    LstmParams p = init_lstm(2, 3, 1, rng);
    std::fill(p.wx.data.begin(), p.wx.data.end(), 0.0);
    std::fill(p.wh.data.begin(), p.wh.data.end(), 0.0);
    for (int j = 0; j < 3; ++j) {
        p.b[j] = -50.0;       // input gate shut
        p.b[3 + j] = 50.0;    // forget gate saturated on
        p.b[6 + j] = 0.0;
        p.b[9 + j] = 0.0;
    }
    LstmState st = LstmState::zero(3);
    st.c = {0.3, -0.7, 1.1};
    Vec c0 = st.c;
    for (int t = 0; t < 5; ++t) lstm_step(p, st, {1.0, -1.0});
    for (int j = 0; j < 3; ++j) CHECK(st.c[j] == Catch::Approx(c0[j]).margin(1e-12));
}

TEST_CASE("lstm step matches an independent gate-equation reimplementation") {
    RngStream rng(6, 0);
    LstmParams p = init_lstm(3, 5, 2, rng);
    LstmState st = LstmState::zero(5);
    st.h = {0.1, -0.2, 0.3, 0.0, -0.5};
    st.c = {0.5, 0.2, -0.1, 0.7, 0.0};
    Vec x{0.4, -1.1, 0.9};
    LstmState ref = st;
    Vec out = lstm_step(p, st, x);

    const int H = 5;
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    Vec h_new(H), c_new(H);
    for (int j = 0; j < H; ++j) {
        double zi = p.b[j], zf = p.b[H + j], zg = p.b[2 * H + j], zo = p.b[3 * H + j];
        for (int k = 0; k < 3; ++k) {
            zi += p.wx(j, k) * x[k];
            zf += p.wx(H + j, k) * x[k];
            zg += p.wx(2 * H + j, k) * x[k];
            zo += p.wx(3 * H + j, k) * x[k];
        }
        for (int k = 0; k < H; ++k) {
            zi += p.wh(j, k) * ref.h[k];
            zf += p.wh(H + j, k) * ref.h[k];
            zg += p.wh(2 * H + j, k) * ref.h[k];
            zo += p.wh(3 * H + j, k) * ref.h[k];
        }
        c_new[j] = sig(zf) * ref.c[j] + sig(zi) * std::tanh(zg);
        h_new[j] = sig(zo) * std::tanh(c_new[j]);
    }
    for (int j = 0; j < H; ++j) {
        CHECK(st.c[j] == Catch::Approx(c_new[j]).margin(1e-12));
        CHECK(st.h[j] == Catch::Approx(h_new[j]).margin(1e-12));
    }
    for (int r = 0; r < 2; ++r) {
        double expect = p.b_out[r];
        for (int j = 0; j < H; ++j) expect += p.w_out(r, j) * h_new[j];
        CHECK(out[r] == Catch::Approx(expect).margin(1e-12));
    }

    // determinism: identical inputs give bit-identical outputs
    LstmState st2 = ref;
    Vec out2 = lstm_step(p, st2, x);
    CHECK(out2 == out);
    CHECK(st2.h == st.h);
}

TEST_CASE("single-step bptt reduces to the direct gradient") {
    RngStream rng(7, 0);
    LstmParams p = init_lstm(2, 4, 2, rng);
    LstmEpisodeSpec ep;
    ep.inputs = {{0.5, -0.3}};
    ep.l2_targets = {{0.2, 0.9}};
    LstmGrad g = zeros_like(p);
    double loss = lstm_bptt(p, {ep}, g);

    LstmState st = LstmState::zero(4);
    Vec out = lstm_step(p, st, ep.inputs[0]);
    double direct = 0.0;
    for (int i = 0; i < 2; ++i) direct += (out[i] - ep.l2_targets[0][i]) * (out[i] - ep.l2_targets[0][i]);
    CHECK(loss == Catch::Approx(direct).margin(1e-12));

    // readout gradient in the single-step case: d/dW_out = 2 (out - y) h^T
    for (int r = 0; r < 2; ++r)
        for (int j = 0; j < 4; ++j)
            CHECK(g.w_out(r, j) ==
                  Catch::Approx(2.0 * (out[r] - ep.l2_targets[0][r]) * st.h[j]).margin(1e-10));
}

TEST_CASE("bptt gradients match finite differences, l2 objective") {
    RngStream rng(8, 0);
    LstmParams p = init_lstm(3, 6, 2, rng);
    std::vector<LstmEpisodeSpec> batch(2);
    for (auto& ep : batch) {
        for (int t = 0; t < 5; ++t) {
            Vec x(3), y(2);
            for (double& v : x) v = rng.gaussian();
            for (double& v : y) v = rng.gaussian();
            ep.inputs.push_back(x);
            ep.l2_targets.push_back(y);
        }
    }
    LstmGrad g = zeros_like(p);
    lstm_bptt(p, batch, g);
    check_grad_against_fd(p, g, [&] {
        LstmGrad scratch = zeros_like(p);
        return lstm_bptt(p, batch, scratch);
    });
}

TEST_CASE("bptt gradients match finite differences, reinforce objective") {
    RngStream rng(9, 0);
    LstmParams p = init_lstm(4, 5, 3, rng);
    std::vector<LstmEpisodeSpec> batch(2);
    for (auto& ep : batch) {
        for (int t = 0; t < 5; ++t) {
            Vec x(4);
            for (double& v : x) v = rng.gaussian();
            ep.inputs.push_back(x);
            ep.actions.push_back(int(rng.uniform_index(3)));
            ep.returns.push_back(rng.uniform(0.0, 3.0));
        }
    }
    LstmGrad g = zeros_like(p);
    lstm_bptt(p, batch, g);
    check_grad_against_fd(p, g, [&] {
        LstmGrad scratch = zeros_like(p);
        return lstm_bptt(p, batch, scratch);
    });
}

TEST_CASE("bptt is stationary at zero parameters with zero targets") {
    LstmParams p;
    p.input_size = 2;
    p.hidden_size = 3;
    p.output_size = 1;
    p.wx = Matrix(12, 2);
    p.wh = Matrix(12, 3);
    p.b = Vec(12, 0.0);
    p.w_out = Matrix(1, 3);
    p.b_out = Vec(1, 0.0);
    LstmEpisodeSpec ep;
    for (int t = 0; t < 4; ++t) {
        ep.inputs.push_back({0.5, -0.5});
        ep.l2_targets.push_back({0.0});
    }
    LstmGrad g = zeros_like(p);
    double loss = lstm_bptt(p, {ep}, g);
    CHECK(loss == 0.0);
    // output and cell paths carry no signal, so every gradient vanishes
    for (double v : g.w_out.data) CHECK(v == 0.0);
    for (double v : g.wx.data) CHECK(v == 0.0);
    CHECK_THROWS_AS(lstm_bptt(p, {}, g), InvalidInputError);
}

TEST_CASE("sgd update arithmetic") {
    Vec theta{1.0};
    Vec grad{2.0};
    std::vector<TensorRef> p{ref("t", theta)}, g{ref("g", grad)};
    sgd_update(p, g, 0.1);
    CHECK(theta[0] == Catch::Approx(0.8));

    Vec zero{0.0};
    std::vector<TensorRef> gz{ref("g", zero)};
    sgd_update(p, gz, 0.1);
    CHECK(theta[0] == Catch::Approx(0.8));

    // two updates match one update with the summed deltas
    Vec a{1.0}, b{1.0};
    Vec g1{0.3}, g2{-0.7}, gsum{-0.4};
    std::vector<TensorRef> pa{ref("a", a)}, pb{ref("b", b)};
    std::vector<TensorRef> r1{ref("g", g1)}, r2{ref("g", g2)}, rs{ref("g", gsum)};
    sgd_update(pa, r1, 0.05);
    sgd_update(pa, r2, 0.05);
    sgd_update(pb, rs, 0.05);
    CHECK(a[0] == Catch::Approx(b[0]).margin(1e-15));

    CHECK_THROWS_AS(sgd_update(pa, r1, 0.0), InvalidInputError);
}

TEST_CASE("adam first step and fixed point") {
    Vec theta{1.0, -2.0};
    Vec grad{0.5, -3.0};
    AdamState st;
    std::vector<TensorRef> p{ref("t", theta)}, g{ref("g", grad)};
    adam_update(p, g, st, 0.01);
    // first step moves every coordinate by ~lr regardless of magnitude
    CHECK(std::abs(1.0 - theta[0]) == Catch::Approx(0.01).margin(1e-6));
    CHECK(std::abs(-2.0 - theta[1]) == Catch::Approx(0.01).margin(1e-6));

    Vec theta2{3.0};
    Vec gz{0.0};
    AdamState st2;
    std::vector<TensorRef> p2{ref("t", theta2)}, g2{ref("g", gz)};
    for (int i = 0; i < 10; ++i) adam_update(p2, g2, st2, 0.1);
    CHECK(theta2[0] == Catch::Approx(3.0));
}

TEST_CASE("adam recurrence matches a hand-rolled five-step tabulation") {
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double g = 0.7;
    Vec theta{1.0};
    Vec grad{g};
    AdamState st;
    std::vector<TensorRef> p{ref("t", theta)}, gr{ref("g", grad)};

    double m = 0.0, v = 0.0, ref_theta = 1.0;
    for (int t = 1; t <= 5; ++t) {
        adam_update(p, gr, st, lr, b1, b2, eps);
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        double mh = m / (1 - std::pow(b1, t));
        double vh = v / (1 - std::pow(b2, t));
        ref_theta -= lr * mh / (std::sqrt(vh) + eps);
        REQUIRE(theta[0] == Catch::Approx(ref_theta).margin(1e-10));
    }
}

TEST_CASE("reinforce logit gradient") {
    Vec logits(5, 1.3);  // uniform
    Vec g = reinforce_logit_grad(logits, 0, 1.0);
    CHECK(g[0] == Catch::Approx(0.2 - 1.0).margin(1e-12));
    for (int i = 1; i < 5; ++i) CHECK(g[i] == Catch::Approx(0.2).margin(1e-12));

    Vec gz = reinforce_logit_grad(logits, 2, 0.0);
    for (double v : gz) CHECK(v == 0.0);

    CHECK_THROWS_AS(reinforce_logit_grad(logits, 5, 1.0), InvalidInputError);

    // fd check of the scalar objective -ret log softmax[a]
    RngStream rng(10, 0);
    Vec z(4);
    for (double& v : z) v = rng.gaussian();
    const int action = 2;
    const double ret = 1.7;
    Vec ga = reinforce_logit_grad(z, action, ret);
    for (int i = 0; i < 4; ++i) {
        const double eps = 1e-6;
        Vec zp = z, zm = z;
        zp[i] += eps;
        zm[i] -= eps;
        double up = -ret * std::log(softmax(zp)[action]);
        double dn = -ret * std::log(softmax(zm)[action]);
        double fd = (up - dn) / (2 * eps);
        CHECK(std::abs(ga[i] - fd) / std::max({std::abs(fd), std::abs(ga[i]), 1e-4}) < 1e-6);
    }
}

TEST_CASE("tensor archive round trips") {
    RngStream rng(11, 0);
    LstmParams p = init_lstm(3, 4, 2, rng);
    LstmParams q = init_lstm(3, 4, 2, rng);
    std::string prefix = "archive_test_tmp";
    save_tensor_archive(prefix, p.tensors());
    load_tensor_archive(prefix, q.tensors());
    CHECK(q.wx == p.wx);
    CHECK(q.wh == p.wh);
    CHECK(q.b == p.b);
    CHECK(q.w_out == p.w_out);
    CHECK(q.b_out == p.b_out);
    std::remove((prefix + ".bin").c_str());
    std::remove((prefix + ".json").c_str());

    LstmParams wrong = init_lstm(3, 5, 2, rng);
    save_tensor_archive(prefix, p.tensors());
    CHECK_THROWS_AS(load_tensor_archive(prefix, wrong.tensors()), ShapeError);
    std::remove((prefix + ".bin").c_str());
    std::remove((prefix + ".json").c_str());
}

TEST_CASE("updates keep finite parameters finite") {
    RngStream rng(12, 0);
    LstmParams p = init_lstm(2, 3, 1, rng);
    LstmGrad g = zeros_like(p);
    for (double& v : g.wx.data) v = rng.gaussian() * 1e3;
    auto prefs = p.tensors();
    auto grefs = g.tensors();
    AdamState st;
    for (int i = 0; i < 100; ++i) adam_update(prefs, grefs, st, 0.1);
    CHECK(p.finite());
    for (int i = 0; i < 100; ++i) sgd_update(prefs, grefs, 1e-4);
    CHECK(p.finite());
}
