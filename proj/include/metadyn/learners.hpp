#pragma once

// Sample-inefficient baselines: deep-network regression Learners trained on
// a single task with SGD/Adam, the coupled/decoupled REINFORCE bandit
// Learners, and the LSTM-as-Learner control (the meta-training loop run on a
// degenerate single-task distribution).

#include "metadyn/analysis.hpp"
#include "metadyn/metalearners.hpp"
#include "metadyn/nets.hpp"
#include "metadyn/tasks.hpp"

namespace metadyn::learners {

enum class LearnerFamily {
    linear_regression,
    fourier_regression,
    bandit_coupled,
    bandit_decoupled,
    lstm_control,
};

struct LearnerConfig {
    LearnerFamily family = LearnerFamily::linear_regression;
    std::vector<int> hidden = {10};  // MLP hidden widths
    nets::Activation activation = nets::Activation::linear;
    double init_sigma = 0.1;  // <= 0 selects 1/sqrt(fan-in)
    meta::Optimizer optimizer = meta::Optimizer::sgd;
    double lr = 1e-3;
    int minibatch = 100;
    long budget = 4000;
    std::vector<long> snapshot_schedule;  // default geometric if empty
    int probe_count = 100;   // ReLU-control effective-matrix probe size
    double stop_mean_q = 0.98;  // bandits: halt when mean correct-prob reaches this
    double bandit_sgd_lr = 1e-2;  // unvalidated default; Adam is the reference setup
};

// Appendix defaults for each family.
inline LearnerConfig learner_defaults(LearnerFamily family) {
    LearnerConfig cfg;
    cfg.family = family;
    switch (family) {
        case LearnerFamily::linear_regression:
            cfg.hidden = {10};
            cfg.activation = nets::Activation::linear;
            cfg.init_sigma = 0.1;
            cfg.optimizer = meta::Optimizer::sgd;
            cfg.lr = 1e-3;
            cfg.minibatch = 100;
            cfg.budget = 4000;  // 2D; the 5D runs use 16000
            break;
        case LearnerFamily::fourier_regression:
            cfg.hidden = {256, 256, 256, 256, 256};
            cfg.activation = nets::Activation::relu;
            cfg.init_sigma = 0.0;
            cfg.optimizer = meta::Optimizer::adam;
            cfg.lr = 1e-4;
            cfg.minibatch = 40;
            cfg.budget = 5000;
            break;
        case LearnerFamily::bandit_coupled:
        case LearnerFamily::bandit_decoupled:
            cfg.init_sigma = 1.0 / std::sqrt(5.0);
            cfg.optimizer = meta::Optimizer::adam;
            cfg.lr = 1e-4;
            cfg.minibatch = 200;
            cfg.budget = 2000000;
            break;
        case LearnerFamily::lstm_control:
            break;
    }
    return cfg;
}

// Every step up to 100, then ~5% growth per snapshot. Resolves both the fast
// first mode and the slow last one on a log axis.
inline std::vector<long> snapshot_schedule(long budget) {
    std::vector<long> out;
    for (long s = 0; s <= std::min<long>(budget, 100); ++s) out.push_back(s);
    long s = 100;
    while (s < budget) {
        s = std::max(s + 1, long(std::ceil(double(s) * 1.05)));
        out.push_back(std::min(s, budget));
    }
    if (out.back() != budget) out.push_back(budget);
    return out;
}

struct LearnerTrace {
    std::vector<long> steps;
    Vec loss_or_reward;
    std::vector<Matrix> w_hat;       // linear family
    std::vector<Vec> probe_outputs;  // fourier family (probe-grid readout)
    std::vector<Matrix> policies;    // bandit families
};

struct DivergedRunError : Error {
    LearnerTrace trace;  // everything recorded before the run went non-finite
    explicit DivergedRunError(std::string msg, LearnerTrace t)
        : Error(std::move(msg)), trace(std::move(t)) {}
};

// --------------------------- linear regression -----------------------------

// Deep-linear Learner (or the ReLU control). Snapshots record the effective
// matrix: the exact layer product for linear nets, a least-squares probe
// estimate over fresh Gaussian inputs for the ReLU control. The recorded
// loss is evaluated on a fresh minibatch at the snapshot step.
inline LearnerTrace train_linear_learner(const tasks::LinearTask& task, const LearnerConfig& cfg,
                                         RngStream rng) {
    const int nx = task.w.cols, ny = task.w.rows;
    std::vector<int> dims{nx};
    for (int h : cfg.hidden) dims.push_back(h);
    dims.push_back(ny);
    RngStream init_rng = rng.substream(0);
    RngStream data_rng = rng.substream(1);
    RngStream eval_rng = rng.substream(2);
    RngStream probe_rng = rng.substream(3);
    nets::MlpParams net =
        cfg.init_sigma > 0.0 ? nets::init_mlp(dims, cfg.activation, cfg.init_sigma, init_rng)
                             : nets::init_mlp_fanin(dims, cfg.activation, init_rng);
    nets::AdamState adam;
    std::vector<long> schedule =
        cfg.snapshot_schedule.empty() ? snapshot_schedule(cfg.budget) : cfg.snapshot_schedule;
    const bool exact_product = cfg.activation == nets::Activation::linear;

    LearnerTrace trace;
    auto snapshot = [&](long step) {
        tasks::Episode ev = tasks::sample_linear_episode(task, cfg.minibatch, eval_rng);
        double loss = 0.0;
        for (int n = 0; n < cfg.minibatch; ++n) {
            Vec y = nets::mlp_forward(net, ev.inputs[n]);
            for (int i = 0; i < ny; ++i) {
                double d = y[i] - ev.targets[n][i];
                loss += d * d / cfg.minibatch;
            }
        }
        Matrix w_hat;
        if (exact_product) {
            w_hat = nets::mlp_effective_matrix(net);
        } else {
            Matrix xs(cfg.probe_count, nx), ys(cfg.probe_count, ny);
            for (int j = 0; j < cfg.probe_count; ++j) {
                Vec x(nx);
                for (double& v : x) v = probe_rng.gaussian();
                Vec y = nets::mlp_forward(net, x);
                for (int i = 0; i < nx; ++i) xs(j, i) = x[i];
                for (int i = 0; i < ny; ++i) ys(j, i) = y[i];
            }
            w_hat = least_squares(xs, ys);
        }
        trace.steps.push_back(step);
        trace.loss_or_reward.push_back(loss);
        trace.w_hat.push_back(std::move(w_hat));
    };

    std::size_t next_snap = 0;
    for (long step = 0; step <= cfg.budget; ++step) {
        if (next_snap < schedule.size() && schedule[next_snap] == step) {
            snapshot(step);
            ++next_snap;
        }
        if (step == cfg.budget) break;
        tasks::Episode batch = tasks::sample_linear_episode(task, cfg.minibatch, data_rng);
        nets::MlpGrad grad = nets::zeros_like(net);
        double loss = nets::mlp_l2_grad(net, batch.inputs, batch.targets, grad);
        if (!std::isfinite(loss))
            throw DivergedRunError("train_linear_learner: non-finite loss at step " +
                                       std::to_string(step),
                                   std::move(trace));
        auto prefs = net.tensors();
        auto grefs = grad.tensors();
        if (cfg.optimizer == meta::Optimizer::sgd)
            nets::sgd_update(prefs, grefs, cfg.lr);
        else
            nets::adam_update(prefs, grefs, adam, cfg.lr);
        if (!net.finite())
            throw DivergedRunError("train_linear_learner: non-finite parameters at step " +
                                       std::to_string(step),
                                   std::move(trace));
    }
    return trace;
}

// --------------------------- fourier regression ----------------------------

inline LearnerTrace train_fourier_learner(const tasks::FourierTask& task, const LearnerConfig& cfg,
                                          RngStream rng) {
    std::vector<int> dims{1};
    for (int h : cfg.hidden) dims.push_back(h);
    dims.push_back(1);
    RngStream init_rng = rng.substream(0);
    RngStream data_rng = rng.substream(1);
    RngStream eval_rng = rng.substream(2);
    nets::MlpParams net =
        cfg.init_sigma > 0.0 ? nets::init_mlp(dims, cfg.activation, cfg.init_sigma, init_rng)
                             : nets::init_mlp_fanin(dims, cfg.activation, init_rng);
    nets::AdamState adam;
    std::vector<long> schedule =
        cfg.snapshot_schedule.empty() ? snapshot_schedule(cfg.budget) : cfg.snapshot_schedule;
    const Vec grid = analysis::probe_grid();

    LearnerTrace trace;
    auto snapshot = [&](long step) {
        tasks::Episode ev = tasks::sample_fourier_episode(task, cfg.minibatch, eval_rng);
        double loss = 0.0;
        for (int n = 0; n < cfg.minibatch; ++n) {
            double d = nets::mlp_forward(net, ev.inputs[n])[0] - ev.targets[n][0];
            loss += d * d / cfg.minibatch;
        }
        Vec out(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) out[j] = nets::mlp_forward(net, {grid[j]})[0];
        trace.steps.push_back(step);
        trace.loss_or_reward.push_back(loss);
        trace.probe_outputs.push_back(std::move(out));
    };

    std::size_t next_snap = 0;
    for (long step = 0; step <= cfg.budget; ++step) {
        if (next_snap < schedule.size() && schedule[next_snap] == step) {
            snapshot(step);
            ++next_snap;
        }
        if (step == cfg.budget) break;
        tasks::Episode batch = tasks::sample_fourier_episode(task, cfg.minibatch, data_rng);
        nets::MlpGrad grad = nets::zeros_like(net);
        double loss = nets::mlp_l2_grad(net, batch.inputs, batch.targets, grad);
        if (!std::isfinite(loss))
            throw DivergedRunError("train_fourier_learner: non-finite loss at step " +
                                       std::to_string(step),
                                   std::move(trace));
        auto prefs = net.tensors();
        auto grefs = grad.tensors();
        if (cfg.optimizer == meta::Optimizer::sgd)
            nets::sgd_update(prefs, grefs, cfg.lr);
        else
            nets::adam_update(prefs, grefs, adam, cfg.lr);
    }
    return trace;
}

// ------------------------------- bandits -----------------------------------

namespace detail {

// Linear + softmax over a one-hot context; the shared bias couples contexts.
struct SoftmaxNet {
    Matrix w;  // [K_a x K_c]
    Vec b;     // [K_a]

    Vec logits(int ctx) const {
        Vec z(b);
        for (int a = 0; a < w.rows; ++a) z[a] += w(a, ctx);
        return z;
    }
};

inline Matrix policy_table(const SoftmaxNet& net, int kc) {
    Matrix pol(kc, net.w.rows);
    for (int c = 0; c < kc; ++c) {
        Vec p = nets::softmax(net.logits(c));
        for (int a = 0; a < net.w.rows; ++a) pol(c, a) = p[a];
    }
    return pol;
}

inline double mean_correct_prob(const Matrix& pol, const tasks::BanditTask& task) {
    double acc = 0.0;
    for (int c = 0; c < task.contexts; ++c) acc += pol(c, task.correct_actions[c]);
    return acc / task.contexts;
}

inline double expected_reward(const Matrix& pol, const tasks::BanditTask& task) {
    double acc = 0.0;
    for (int c = 0; c < task.contexts; ++c)
        acc += analysis::bandit_expected_reward(pol(c, task.correct_actions[c]), task.p_correct,
                                                task.p_incorrect);
    return acc / task.contexts;
}

}  // namespace detail

// Coupled REINFORCE Learner: one linear+softmax network with a shared bias
// across contexts. Training halts once the policy's mean correct-action
// probability reaches cfg.stop_mean_q (the paper's 0.98 criterion), or at
// the budget. Snapshots store the full policy table; the recorded scalar is
// the exact expected reward of the policy.
inline LearnerTrace train_bandit_coupled(const tasks::BanditTask& task, const LearnerConfig& cfg,
                                         RngStream rng) {
    const int kc = task.contexts, ka = task.actions;
    RngStream init_rng = rng.substream(0);
    RngStream data_rng = rng.substream(1);
    detail::SoftmaxNet net;
    net.w = Matrix(ka, kc);
    net.b = Vec(ka);
    for (double& v : net.w.data) v = sample_truncated_normal(cfg.init_sigma, init_rng);
    for (double& v : net.b) v = sample_truncated_normal(cfg.init_sigma, init_rng);
    nets::AdamState adam;
    std::vector<long> schedule =
        cfg.snapshot_schedule.empty() ? snapshot_schedule(cfg.budget) : cfg.snapshot_schedule;

    LearnerTrace trace;
    auto snapshot = [&](long step, const Matrix& pol) {
        trace.steps.push_back(step);
        trace.loss_or_reward.push_back(detail::expected_reward(pol, task));
        trace.policies.push_back(pol);
    };

    std::size_t next_snap = 0;
    for (long step = 0; step <= cfg.budget; ++step) {
        Matrix pol = detail::policy_table(net, kc);
        bool stopped = detail::mean_correct_prob(pol, task) >= cfg.stop_mean_q;
        if ((next_snap < schedule.size() && schedule[next_snap] == step) || stopped ||
            step == cfg.budget) {
            snapshot(step, pol);
            while (next_snap < schedule.size() && schedule[next_snap] <= step) ++next_snap;
        }
        if (stopped || step == cfg.budget) break;

        Matrix gw(ka, kc);
        Vec gb(ka, 0.0);
        const double inv_b = 1.0 / cfg.minibatch;
        for (int n = 0; n < cfg.minibatch; ++n) {
            int ctx = int(data_rng.uniform_index(std::uint64_t(kc)));
            Vec probs = nets::softmax(net.logits(ctx));
            int action = meta::detail::sample_from_probs(probs, data_rng);
            int reward = tasks::bandit_reward(task, ctx, action, data_rng);
            if (reward == 0) continue;
            // d/dlogits of -r log pi(a) = r (probs - onehot(a))
            for (int a = 0; a < ka; ++a) {
                double g = reward * probs[a] * inv_b;
                if (a == action) g -= reward * inv_b;
                gw(a, ctx) += g;
                gb[a] += g;
            }
        }
        std::vector<nets::TensorRef> prefs{nets::ref("w", net.w), nets::ref("b", net.b)};
        std::vector<nets::TensorRef> grefs{nets::ref("w", gw), nets::ref("b", gb)};
        if (cfg.optimizer == meta::Optimizer::sgd)
            nets::sgd_update(prefs, grefs, cfg.bandit_sgd_lr);
        else
            nets::adam_update(prefs, grefs, adam, cfg.lr);
        if (!net.w.finite())
            throw DivergedRunError("train_bandit_coupled: non-finite parameters", std::move(trace));
    }
    return trace;
}

// Decoupled control: one network per context; each step's minibatch routes
// every sample to its own context's network only.
inline LearnerTrace train_bandit_decoupled(const tasks::BanditTask& task, const LearnerConfig& cfg,
                                           RngStream rng) {
    const int kc = task.contexts, ka = task.actions;
    RngStream init_rng = rng.substream(0);
    RngStream data_rng = rng.substream(1);
    // per-context nets are effectively tabular: logits_c = w_c + b_c
    std::vector<Vec> w(kc, Vec(ka)), b(kc, Vec(ka));
    for (int c = 0; c < kc; ++c) {
        for (double& v : w[c]) v = sample_truncated_normal(cfg.init_sigma, init_rng);
        for (double& v : b[c]) v = sample_truncated_normal(cfg.init_sigma, init_rng);
    }
    std::vector<nets::AdamState> adam(kc);
    std::vector<long> schedule =
        cfg.snapshot_schedule.empty() ? snapshot_schedule(cfg.budget) : cfg.snapshot_schedule;

    auto policy_table = [&]() {
        Matrix pol(kc, ka);
        for (int c = 0; c < kc; ++c) {
            Vec z(ka);
            for (int a = 0; a < ka; ++a) z[a] = w[c][a] + b[c][a];
            Vec p = nets::softmax(z);
            for (int a = 0; a < ka; ++a) pol(c, a) = p[a];
        }
        return pol;
    };

    LearnerTrace trace;
    std::size_t next_snap = 0;
    for (long step = 0; step <= cfg.budget; ++step) {
        Matrix pol = policy_table();
        bool stopped = detail::mean_correct_prob(pol, task) >= cfg.stop_mean_q;
        if ((next_snap < schedule.size() && schedule[next_snap] == step) || stopped ||
            step == cfg.budget) {
            trace.steps.push_back(step);
            trace.loss_or_reward.push_back(detail::expected_reward(pol, task));
            trace.policies.push_back(pol);
            while (next_snap < schedule.size() && schedule[next_snap] <= step) ++next_snap;
        }
        if (stopped || step == cfg.budget) break;

        std::vector<Vec> gw(kc, Vec(ka, 0.0)), gb(kc, Vec(ka, 0.0));
        std::vector<int> counts(kc, 0);
        std::vector<std::vector<std::pair<int, int>>> samples(kc);  // (action, reward)
        for (int n = 0; n < cfg.minibatch; ++n) {
            int ctx = int(data_rng.uniform_index(std::uint64_t(kc)));
            Vec z(ka);
            for (int a = 0; a < ka; ++a) z[a] = w[ctx][a] + b[ctx][a];
            Vec probs = nets::softmax(z);
            int action = meta::detail::sample_from_probs(probs, data_rng);
            int reward = tasks::bandit_reward(task, ctx, action, data_rng);
            samples[ctx].push_back({action, reward});
        }
        for (int c = 0; c < kc; ++c) {
            if (samples[c].empty()) continue;
            counts[c] = int(samples[c].size());
            Vec z(ka);
            for (int a = 0; a < ka; ++a) z[a] = w[c][a] + b[c][a];
            Vec probs = nets::softmax(z);
            const double inv_n = 1.0 / counts[c];
            for (auto [action, reward] : samples[c]) {
                if (reward == 0) continue;
                for (int a = 0; a < ka; ++a) {
                    double g = reward * probs[a] * inv_n;
                    if (a == action) g -= reward * inv_n;
                    gw[c][a] += g;
                    gb[c][a] += g;
                }
            }
        }
        for (int c = 0; c < kc; ++c) {
            if (counts[c] == 0) continue;  // no data for this context this step
            std::vector<nets::TensorRef> prefs{nets::ref("w", w[c]), nets::ref("b", b[c])};
            std::vector<nets::TensorRef> grefs{nets::ref("w", gw[c]), nets::ref("b", gb[c])};
            if (cfg.optimizer == meta::Optimizer::sgd)
                nets::sgd_update(prefs, grefs, cfg.bandit_sgd_lr);
            else
                nets::adam_update(prefs, grefs, adam[c], cfg.lr);
        }
    }
    return trace;
}

// ----------------------------- LSTM control --------------------------------

// The meta-training loop run unchanged on a degenerate (fixed-task)
// distribution. Snapshots record the end-of-episode effective function at
// each outer checkpoint, averaged over a few probe episodes.
inline LearnerTrace train_lstm_control(const meta::MetaTrainConfig& meta_cfg, RngStream rng,
                                       int probe_episodes = 20, int n_probe = 100) {
    if (meta_cfg.family == meta::Family::linear &&
        meta_cfg.linear_dist.mode != tasks::LinearTaskDistribution::Mode::fixed_task)
        throw InvalidInputError("train_lstm_control: distribution must be fixed-task");
    if (meta_cfg.family == meta::Family::fourier && !meta_cfg.fixed_fourier)
        throw InvalidInputError("train_lstm_control: fourier control needs a fixed task");

    meta::MetaTrainer trainer(meta_cfg, rng.substream(1));
    RngStream probe_rng = rng.substream(2);
    LearnerTrace trace;
    while (true) {
        meta::MetaCheckpoint ck = trainer.run_to_next_checkpoint();
        trace.steps.push_back(ck.outer_step);
        trace.loss_or_reward.push_back(ck.outer_loss);
        if (meta_cfg.family == meta::Family::linear) {
            const tasks::LinearTask task{meta_cfg.linear_dist.fixed_w,
                                         meta_cfg.linear_dist.noise_std};
            Matrix acc(task.w.rows, task.w.cols);
            RngStream ck_rng = probe_rng.substream(std::uint64_t(ck.outer_step));
            for (int e = 0; e < probe_episodes; ++e) {
                auto tr = meta::probe_inner_linear(ck.params[0], task, meta_cfg.t_steps, n_probe,
                                                   ck_rng.substream(e));
                const Matrix& last = tr.w_hat.back();
                for (std::size_t i = 0; i < acc.data.size(); ++i)
                    acc.data[i] += last.data[i] / probe_episodes;
            }
            trace.w_hat.push_back(std::move(acc));
        } else {
            Vec acc(analysis::probe_grid().size(), 0.0);
            RngStream ck_rng = probe_rng.substream(std::uint64_t(ck.outer_step));
            for (int e = 0; e < probe_episodes; ++e) {
                auto tr = meta::probe_inner_fourier(ck.params[0], meta_cfg.fixed_fourier_task,
                                                    meta_cfg.t_steps, ck_rng.substream(e));
                for (std::size_t i = 0; i < acc.size(); ++i)
                    acc[i] += tr.outputs.back()[i] / probe_episodes;
            }
            trace.probe_outputs.push_back(std::move(acc));
        }
        if (trainer.done()) break;
    }
    return trace;
}

// --------------------------- progress measures ------------------------------

// q_k(t) = s_hat_k / s_k per snapshot, in the target task's SVD coordinates.
inline std::vector<Vec> linear_learner_q(const LearnerTrace& trace, const tasks::LinearTask& task) {
    SvdResult f = svd(task.w);
    std::vector<Vec> q;
    q.reserve(trace.w_hat.size());
    for (const auto& w_hat : trace.w_hat) {
        Vec s_hat = analysis::effective_spectrum(w_hat, f.u, f.v);
        Vec row(s_hat.size());
        for (std::size_t k = 0; k < row.size(); ++k) row[k] = s_hat[k] / f.s[k];
        q.push_back(std::move(row));
    }
    return q;
}

// Fourier projection q_k(t) of the probe-grid readout per snapshot.
inline std::vector<Vec> fourier_learner_q(const LearnerTrace& trace,
                                          const tasks::FourierTask& task,
                                          analysis::ProjectionKind kind =
                                              analysis::ProjectionKind::phase_aware) {
    const Vec grid = analysis::probe_grid();
    Vec g_true(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) g_true[i] = tasks::eval_fourier(task, grid[i]);
    ComplexSpectrum g_spec = dft_real(g_true);
    std::vector<int> modes = analysis::active_modes(g_spec);
    std::vector<Vec> q;
    q.reserve(trace.probe_outputs.size());
    for (const auto& out : trace.probe_outputs)
        q.push_back(analysis::fourier_projection(dft_real(out), g_spec, modes, kind));
    return q;
}

// Rank-ordered correct-action probabilities q_k(t) per snapshot.
inline std::vector<Vec> bandit_learner_q(const LearnerTrace& trace, const tasks::BanditTask& task,
                                         std::vector<int>* order = nullptr) {
    std::vector<Vec> q;
    q.reserve(trace.policies.size());
    for (const auto& pol : trace.policies) {
        Vec row(task.contexts);
        for (int c = 0; c < task.contexts; ++c) row[c] = pol(c, task.correct_actions[c]);
        q.push_back(std::move(row));
    }
    analysis::ContextRanking ranking = analysis::rank_order_contexts(q);
    if (order) *order = ranking.order;
    return ranking.reordered;
}

// ------------------------- trace -> CSV tables -----------------------------

// Linear-family payload goes out as the effective spectrum in the target
// task's coordinates (columns s_hat_1..K).
inline analysis::LearnerTraceTable linear_trace_table(const LearnerTrace& trace,
                                                      const tasks::LinearTask& task,
                                                      const std::string& run_id) {
    SvdResult f = svd(task.w);
    analysis::LearnerTraceTable t;
    t.run_id = run_id;
    for (std::size_t k = 1; k <= f.s.size(); ++k)
        t.payload_columns.push_back("s_hat_" + std::to_string(k));
    t.steps = trace.steps;
    t.loss_or_reward = trace.loss_or_reward;
    for (const auto& w_hat : trace.w_hat)
        t.payload.push_back(analysis::effective_spectrum(w_hat, f.u, f.v));
    return t;
}

inline analysis::LearnerTraceTable fourier_trace_table(const LearnerTrace& trace,
                                                       const std::string& run_id) {
    analysis::LearnerTraceTable t;
    t.run_id = run_id;
    for (std::size_t i = 1; i <= analysis::probe_grid().size(); ++i)
        t.payload_columns.push_back("yprobe_" + std::to_string(i));
    t.steps = trace.steps;
    t.loss_or_reward = trace.loss_or_reward;
    t.payload = trace.probe_outputs;
    return t;
}

inline analysis::LearnerTraceTable bandit_trace_table(const LearnerTrace& trace,
                                                      const std::string& run_id) {
    analysis::LearnerTraceTable t;
    t.run_id = run_id;
    if (!trace.policies.empty()) {
        const Matrix& pol = trace.policies.front();
        for (int c = 0; c < pol.rows; ++c)
            for (int a = 0; a < pol.cols; ++a)
                t.payload_columns.push_back("pi_c" + std::to_string(c) + "_a" + std::to_string(a));
    }
    t.steps = trace.steps;
    t.loss_or_reward = trace.loss_or_reward;
    for (const auto& pol : trace.policies) t.payload.push_back(pol.data);
    return t;
}

}  // namespace metadyn::learners
