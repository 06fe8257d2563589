#pragma once

// Outer-training of LSTM Meta-Learners across task distributions, and
// inner-loop probing of the trained (frozen) networks.
//
// Input layouts fed to the LSTM:
//   regression:  [x_t | y_{t-1}]                 with y_0 = 0
//   bandit:      [onehot(c_t) | onehot(a_{t-1}) | r_{t-1}]   zeroed at t = 1
//   bandit, decoupled: [onehot(a_{t-1}) | r_{t-1}]  (context input dropped)
//
// The supervised outer objective is the mean over the minibatch of
// (1/T) sum_t ||y_hat_t - y_t||^2. The bandit objective is REINFORCE with
// per-step return-to-go coefficients (no baseline unless configured).

#include "metadyn/analysis.hpp"
#include "metadyn/nets.hpp"
#include "metadyn/tasks.hpp"
#include "metadyn/util.hpp"

namespace metadyn::meta {

enum class Family { linear, fourier, bandit_coupled, bandit_decoupled };
enum class Optimizer { sgd, adam };

struct MetaTrainConfig {
    Family family = Family::linear;

    // task distribution
    tasks::LinearTaskDistribution linear_dist =
        tasks::LinearTaskDistribution::matrix_normal(2, 2, 1.0, 0.01);
    tasks::FourierMode fourier_mode = tasks::FourierMode::unit_amplitudes;
    int fourier_modes = 5;
    double fourier_noise_std = 0.01;
    // fixed-task control: every episode reuses this exact task
    bool fixed_fourier = false;
    tasks::FourierTask fixed_fourier_task;
    int bandit_contexts = 5;
    int bandit_actions = 5;
    double p_correct = 0.8;
    double p_incorrect = 0.2;
    bool bandit_conflict_tasks = false;  // training tasks; default independent draws
    bool fixed_bandit = false;
    tasks::BanditTask fixed_bandit_task;

    int t_steps = 20;       // episode length T
    int minibatch = 200;    // episodes per outer update
    Optimizer optimizer = Optimizer::sgd;
    double lr = 1e-2;
    long outer_updates = 100000;
    int hidden = 64;
    int checkpoint_count = 20;
    std::vector<long> checkpoint_schedule;  // filled from checkpoint_count if empty
    bool reinforce_baseline = false;        // moving-average baseline, off by default
};

inline MetaTrainConfig meta_defaults(Family family) {
    MetaTrainConfig cfg;
    cfg.family = family;
    switch (family) {
        case Family::linear:
            cfg.optimizer = Optimizer::sgd;
            cfg.lr = 1e-2;
            cfg.t_steps = 20;
            cfg.outer_updates = 100000;
            break;
        case Family::fourier:
            cfg.optimizer = Optimizer::adam;
            cfg.lr = 1e-4;
            cfg.t_steps = 40;
            cfg.outer_updates = 200000;
            break;
        case Family::bandit_coupled:
        case Family::bandit_decoupled:
            cfg.optimizer = Optimizer::adam;
            cfg.lr = 1e-4;
            cfg.t_steps = 100;  // Appendix also quotes 125; both are config values
            cfg.outer_updates = 100000;
            break;
    }
    return cfg;
}

// 0, then geometric up to the budget (always includes the budget itself).
inline std::vector<long> geometric_checkpoints(long budget, int count) {
    std::vector<long> out{0};
    if (budget <= 0) return out;
    int interior = std::max(count - 1, 1);
    for (int i = 0; i < interior; ++i) {
        double f = double(i) / double(std::max(interior - 1, 1));
        long step = lround(std::pow(double(budget), f));
        if (step > out.back()) out.push_back(step);
    }
    if (out.back() != budget) out.push_back(budget);
    return out;
}

struct MetaCheckpoint {
    long outer_step = 0;
    std::vector<nets::LstmParams> params;  // one entry, or K_c when decoupled
    double outer_loss = 0.0;               // mean loss since the previous checkpoint
    double outer_reward = 0.0;             // bandit families: mean episode reward
};

inline int lstm_input_size(const MetaTrainConfig& cfg) {
    switch (cfg.family) {
        case Family::linear: return cfg.linear_dist.nx + cfg.linear_dist.ny;
        case Family::fourier: return 2;
        case Family::bandit_coupled: return cfg.bandit_contexts + cfg.bandit_actions + 1;
        case Family::bandit_decoupled: return cfg.bandit_actions + 1;
    }
    throw InvalidInputError("lstm_input_size: bad family");
}

inline int lstm_output_size(const MetaTrainConfig& cfg) {
    switch (cfg.family) {
        case Family::linear: return cfg.linear_dist.ny;
        case Family::fourier: return 1;
        case Family::bandit_coupled:
        case Family::bandit_decoupled: return cfg.bandit_actions;
    }
    throw InvalidInputError("lstm_output_size: bad family");
}

namespace detail {

// readout of one step without mutating the caller's state
inline Vec step_output(const nets::LstmParams& p, const nets::LstmState& state, const Vec& input,
                       nets::detail::LstmStepWork& work) {
    nets::detail::lstm_step_core(p, input, state.h, state.c, work);
    Vec out(p.output_size);
    for (int r = 0; r < p.output_size; ++r) {
        const double* wr = p.w_out.row(r);
        double s = p.b_out[r];
        for (int j = 0; j < p.hidden_size; ++j) s += wr[j] * work.h[j];
        out[r] = s;
    }
    return out;
}

inline int sample_from_probs(const Vec& probs, RngStream& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return int(i);
    }
    return int(probs.size()) - 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trainer. Drives outer updates and emits checkpoints; per-update randomness
// derives from (stream, update index) so runs can resume mid-stream and
// worker counts never change the draws.

class MetaTrainer {
public:
    MetaTrainer(MetaTrainConfig cfg, RngStream rng) : cfg_(std::move(cfg)), rng_(rng) {
        if (cfg_.t_steps < 1) throw InvalidInputError("MetaTrainer: T must be >= 1");
        if (cfg_.outer_updates < 0) throw InvalidInputError("MetaTrainer: negative budget");
        if (cfg_.checkpoint_schedule.empty())
            cfg_.checkpoint_schedule = geometric_checkpoints(cfg_.outer_updates, cfg_.checkpoint_count);
        const int n_nets = (cfg_.family == Family::bandit_decoupled) ? cfg_.bandit_contexts : 1;
        RngStream init_rng = rng_.substream(0x1417);
        for (int i = 0; i < n_nets; ++i) {
            RngStream r = init_rng.substream(i);
            params_.push_back(
                nets::init_lstm(lstm_input_size(cfg_), cfg_.hidden, lstm_output_size(cfg_), r));
        }
        adam_.resize(n_nets);
        baseline_.assign(std::size_t(cfg_.t_steps) * n_nets, 0.0);
    }

    const MetaTrainConfig& config() const { return cfg_; }
    long update_index() const { return update_; }
    bool done() const { return update_ >= cfg_.outer_updates || diverged_; }
    bool diverged() const { return diverged_; }
    std::vector<nets::LstmParams>& params() { return params_; }
    const std::vector<nets::LstmParams>& params() const { return params_; }
    nets::AdamState& adam_state(int i) { return adam_[i]; }
    Vec& baseline_state() { return baseline_; }

    // After externally restoring params/adam/baseline, jump to this update.
    void restore(long update_index) { update_ = update_index; }

    // Index of the next checkpoint boundary at or after the current update.
    long next_checkpoint_step() const {
        for (long s : cfg_.checkpoint_schedule)
            if (s >= update_) return s;
        return cfg_.outer_updates;
    }

    // Runs updates until the next checkpoint boundary and returns that
    // checkpoint (params snapshot taken before any later update).
    MetaCheckpoint run_to_next_checkpoint() {
        long target = next_checkpoint_step();
        while (update_ < target && !diverged_) step_once();
        MetaCheckpoint ck;
        ck.outer_step = update_;
        ck.params = params_;
        ck.outer_loss = window_n_ ? window_loss_ / double(window_n_) : 0.0;
        ck.outer_reward = window_n_ ? window_reward_ / double(window_n_) : 0.0;
        window_loss_ = window_reward_ = 0.0;
        window_n_ = 0;
        return ck;
    }

    // Convenience: run the full budget, collecting every checkpoint.
    std::vector<MetaCheckpoint> run_all() {
        std::vector<MetaCheckpoint> out;
        out.push_back(run_to_next_checkpoint());  // checkpoint 0 (or resume point)
        while (!done()) {
            step_once();
            if (is_checkpoint(update_)) out.push_back(run_to_next_checkpoint());
        }
        return out;
    }

private:
    bool is_checkpoint(long step) const {
        for (long s : cfg_.checkpoint_schedule)
            if (s == step) return true;
        return false;
    }

    void step_once() {
        RngStream update_rng = rng_.substream(0x5EED).substream(std::uint64_t(update_));
        double loss = 0.0, reward = 0.0;
        switch (cfg_.family) {
            case Family::linear:
            case Family::fourier: loss = regression_update(update_rng); break;
            case Family::bandit_coupled: loss = bandit_update(update_rng, 0, &reward); break;
            case Family::bandit_decoupled: {
                double rsum = 0.0;
                for (int c = 0; c < cfg_.bandit_contexts; ++c) {
                    double r = 0.0;
                    loss += bandit_update(update_rng.substream(c), c, &r);
                    rsum += r;
                }
                loss /= cfg_.bandit_contexts;
                reward = rsum / cfg_.bandit_contexts;
                break;
            }
        }
        if (!std::isfinite(loss)) {
            diverged_ = true;
            return;
        }
        window_loss_ += loss;
        window_reward_ += reward;
        ++window_n_;
        ++update_;
    }

    double regression_update(RngStream& update_rng) {
        const int T = cfg_.t_steps;
        std::vector<nets::LstmEpisodeSpec> episodes(cfg_.minibatch);
        const std::size_t n_blocks = std::min<std::size_t>(episodes.size(), 16);
        parallel_for(n_blocks, [&](std::size_t blk) {
            std::size_t lo = blk * episodes.size() / n_blocks;
            std::size_t hi = (blk + 1) * episodes.size() / n_blocks;
            for (std::size_t e = lo; e < hi; ++e) {
                RngStream ep_rng = update_rng.substream(e);
                tasks::Episode ep;
                if (cfg_.family == Family::linear) {
                    tasks::LinearTask task = tasks::sample_linear_task(cfg_.linear_dist, ep_rng);
                    ep = tasks::sample_linear_episode(task, T, ep_rng);
                } else {
                    tasks::FourierTask task =
                        cfg_.fixed_fourier ? cfg_.fixed_fourier_task
                                           : tasks::sample_fourier_task(cfg_.fourier_mode, ep_rng,
                                                                        cfg_.fourier_modes,
                                                                        cfg_.fourier_noise_std);
                    ep = tasks::sample_fourier_episode(task, T, ep_rng);
                }
                auto& spec = episodes[e];
                spec.inputs.resize(T);
                spec.l2_targets.resize(T);
                const int ny = int(ep.targets[0].size());
                for (int t = 0; t < T; ++t) {
                    Vec in = ep.inputs[t];
                    in.resize(in.size() + ny, 0.0);
                    if (t > 0)
                        std::copy(ep.targets[t - 1].begin(), ep.targets[t - 1].end(),
                                  in.end() - ny);
                    spec.inputs[t] = std::move(in);
                    spec.l2_targets[t] = ep.targets[t];
                }
            }
        });
        nets::LstmGrad grad = nets::zeros_like(params_[0]);
        double loss = nets::lstm_bptt(params_[0], episodes, grad);
        apply_update(0, grad);
        return loss;
    }

    // One REINFORCE update for net `net_i`. In the coupled family the episode
    // stream mixes contexts; decoupled nets see a single-context stream with
    // the context input dropped.
    double bandit_update(RngStream update_rng, int net_i, double* mean_reward) {
        const int T = cfg_.t_steps;
        const bool decoupled = cfg_.family == Family::bandit_decoupled;
        nets::LstmParams& net = params_[net_i];
        std::vector<nets::LstmEpisodeSpec> episodes(cfg_.minibatch);
        Vec ep_reward(episodes.size(), 0.0);
        const std::size_t n_blocks = std::min<std::size_t>(episodes.size(), 16);
        parallel_for(n_blocks, [&](std::size_t blk) {
            std::size_t lo = blk * episodes.size() / n_blocks;
            std::size_t hi = (blk + 1) * episodes.size() / n_blocks;
            nets::detail::LstmStepWork work;
            for (std::size_t e = lo; e < hi; ++e) {
                RngStream ep_rng = update_rng.substream(0xB00 + e);
                tasks::BanditTask task =
                    cfg_.fixed_bandit
                        ? cfg_.fixed_bandit_task
                        : tasks::sample_bandit_task(cfg_.bandit_contexts, cfg_.bandit_actions,
                                                    cfg_.p_correct, cfg_.p_incorrect,
                                                    cfg_.bandit_conflict_tasks, ep_rng);
                auto& spec = episodes[e];
                spec.inputs.resize(T);
                spec.actions.resize(T);
                spec.returns.resize(T);
                nets::LstmState state = nets::LstmState::zero(cfg_.hidden);
                int prev_action = -1, prev_reward = 0;
                for (int t = 0; t < T; ++t) {
                    int ctx = decoupled
                                  ? net_i
                                  : int(ep_rng.uniform_index(std::uint64_t(task.contexts)));
                    spec.inputs[t] = bandit_input(ctx, prev_action, prev_reward, decoupled);
                    Vec logits = detail::step_output(net, state, spec.inputs[t], work);
                    state.h = work.h;
                    state.c = work.c;
                    Vec probs = nets::softmax(logits);
                    int action = detail::sample_from_probs(probs, ep_rng);
                    int reward = tasks::bandit_reward(task, ctx, action, ep_rng);
                    spec.actions[t] = action;
                    spec.returns[t] = reward;  // rewards now; return-to-go below
                    prev_action = action;
                    prev_reward = reward;
                }
                double acc = 0.0;
                for (int t = T - 1; t >= 0; --t) {
                    acc += spec.returns[t];
                    spec.returns[t] = acc;
                }
                ep_reward[e] = acc / T;
            }
        });
        double reward_sum = 0.0;
        for (double r : ep_reward) reward_sum += r;
        if (mean_reward) *mean_reward = reward_sum / double(episodes.size());
        if (cfg_.reinforce_baseline) {
            double* base = baseline_.data() + std::size_t(net_i) * cfg_.t_steps;
            for (auto& spec : episodes)
                for (int t = 0; t < T; ++t) spec.returns[t] -= base[t];
            for (int t = 0; t < T; ++t) {
                double mean_g = 0.0;
                for (auto& spec : episodes) mean_g += spec.returns[t] + base[t];
                mean_g /= double(episodes.size());
                base[t] = 0.99 * base[t] + 0.01 * mean_g;
            }
        }
        nets::LstmGrad grad = nets::zeros_like(net);
        double loss = nets::lstm_bptt(net, episodes, grad);
        apply_update(net_i, grad);
        return loss;
    }

    Vec bandit_input(int ctx, int prev_action, int prev_reward, bool decoupled) const {
        Vec in(decoupled ? cfg_.bandit_actions + 1 : cfg_.bandit_contexts + cfg_.bandit_actions + 1,
               0.0);
        int base = 0;
        if (!decoupled) {
            in[ctx] = 1.0;
            base = cfg_.bandit_contexts;
        }
        if (prev_action >= 0) {
            in[base + prev_action] = 1.0;
            in[base + cfg_.bandit_actions] = double(prev_reward);
        }
        return in;
    }

    void apply_update(int net_i, nets::LstmGrad& grad) {
        auto prefs = params_[net_i].tensors();
        auto grefs = grad.tensors();
        if (cfg_.optimizer == Optimizer::sgd)
            nets::sgd_update(prefs, grefs, cfg_.lr);
        else
            nets::adam_update(prefs, grefs, adam_[net_i], cfg_.lr);
    }

    MetaTrainConfig cfg_;
    RngStream rng_;
    std::vector<nets::LstmParams> params_;
    std::vector<nets::AdamState> adam_;
    Vec baseline_;
    long update_ = 0;
    bool diverged_ = false;
    double window_loss_ = 0.0, window_reward_ = 0.0;
    long window_n_ = 0;
};

inline std::vector<MetaCheckpoint> outer_train_regression(const MetaTrainConfig& cfg,
                                                          RngStream rng) {
    if (cfg.family != Family::linear && cfg.family != Family::fourier)
        throw InvalidInputError("outer_train_regression: wrong family");
    return MetaTrainer(cfg, rng).run_all();
}

inline std::vector<MetaCheckpoint> outer_train_bandit(const MetaTrainConfig& cfg, RngStream rng) {
    if (cfg.family != Family::bandit_coupled && cfg.family != Family::bandit_decoupled)
        throw InvalidInputError("outer_train_bandit: wrong family");
    return MetaTrainer(cfg, rng).run_all();
}

// ---------------------------------------------------------------------------
// Inner-loop probing of frozen parameters.

struct LinearInnerTrace {
    tasks::LinearTask task;
    std::vector<Matrix> w_hat;  // [T], least-squares estimate per inner step
    std::uint64_t rng_stream = 0;
};

// Fix one observation sequence; at each step t, freeze the recurrent state
// reached after observations 1..t-1 and regress the step's input-output map
// from n_probe fresh Gaussian probes. The probe input pairs the probe x with
// the true previous target (the probe replaces only x_t).
inline LinearInnerTrace probe_inner_linear(const nets::LstmParams& params,
                                           const tasks::LinearTask& task, int t_steps, int n_probe,
                                           RngStream rng) {
    LinearInnerTrace trace;
    trace.task = task;
    trace.rng_stream = rng.stream_id();
    RngStream obs_rng = rng.substream(1);
    RngStream probe_rng = rng.substream(2);
    tasks::Episode ep = tasks::sample_linear_episode(task, t_steps, obs_rng);
    const int nx = task.w.cols, ny = task.w.rows;
    nets::LstmState state = nets::LstmState::zero(params.hidden_size);
    nets::detail::LstmStepWork work;
    for (int t = 0; t < t_steps; ++t) {
        Vec y_prev(ny, 0.0);
        if (t > 0) y_prev = ep.targets[t - 1];
        Matrix xs(n_probe, nx);
        Matrix ys(n_probe, ny);
        for (int j = 0; j < n_probe; ++j) {
            Vec in(nx + ny);
            for (int i = 0; i < nx; ++i) {
                double x = probe_rng.gaussian();
                xs(j, i) = x;
                in[i] = x;
            }
            std::copy(y_prev.begin(), y_prev.end(), in.begin() + nx);
            Vec out = detail::step_output(params, state, in, work);
            for (int i = 0; i < ny; ++i) ys(j, i) = out[i];
        }
        trace.w_hat.push_back(least_squares(xs, ys));
        // now consume the real observation t
        Vec in(nx + ny);
        std::copy(ep.inputs[t].begin(), ep.inputs[t].end(), in.begin());
        std::copy(y_prev.begin(), y_prev.end(), in.begin() + nx);
        nets::lstm_step(params, state, in);
    }
    return trace;
}

struct FourierInnerTrace {
    tasks::FourierTask task;
    std::vector<Vec> outputs;  // [T][40], probe-grid readout per inner step
    std::uint64_t rng_stream = 0;
};

inline FourierInnerTrace probe_inner_fourier(const nets::LstmParams& params,
                                             const tasks::FourierTask& task, int t_steps,
                                             RngStream rng) {
    FourierInnerTrace trace;
    trace.task = task;
    trace.rng_stream = rng.stream_id();
    RngStream obs_rng = rng.substream(1);
    tasks::Episode ep = tasks::sample_fourier_episode(task, t_steps, obs_rng);
    const Vec grid = analysis::probe_grid();
    nets::LstmState state = nets::LstmState::zero(params.hidden_size);
    nets::detail::LstmStepWork work;
    for (int t = 0; t < t_steps; ++t) {
        double y_prev = (t > 0) ? ep.targets[t - 1][0] : 0.0;
        Vec out(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j)
            out[j] = detail::step_output(params, state, {grid[j], y_prev}, work)[0];
        trace.outputs.push_back(std::move(out));
        nets::lstm_step(params, state, {ep.inputs[t][0], y_prev});
    }
    return trace;
}

struct BanditInnerTrace {
    tasks::BanditTask task;
    std::vector<Matrix> policies;  // [T], rows are pi_t(.|c)
    tasks::BanditEpisode behavioral;
    std::uint64_t rng_stream = 0;
};

// Roll one behavioural episode; at each step fork the recurrent state and
// evaluate every context counterfactually (with the true previous action and
// reward). The behavioural step reuses the fork of the visited context, so
// probing never perturbs the rollout.
inline BanditInnerTrace probe_inner_bandit(const nets::LstmParams& params,
                                           const tasks::BanditTask& task, int t_steps,
                                           RngStream rng, bool record_probes = true) {
    BanditInnerTrace trace;
    trace.task = task;
    trace.rng_stream = rng.stream_id();
    RngStream ep_rng = rng.substream(1);
    const int kc = task.contexts, ka = task.actions;
    trace.behavioral.contexts.reserve(t_steps);
    nets::LstmState state = nets::LstmState::zero(params.hidden_size);
    nets::detail::LstmStepWork work, work_ctx;
    int prev_action = -1, prev_reward = 0;
    for (int t = 0; t < t_steps; ++t) {
        int ctx = int(ep_rng.uniform_index(std::uint64_t(kc)));
        Vec in(kc + ka + 1, 0.0);
        if (prev_action >= 0) {
            in[kc + prev_action] = 1.0;
            in[kc + ka] = double(prev_reward);
        }
        Matrix pol(record_probes ? kc : 0, ka);
        Vec behav_probs;
        for (int c = record_probes ? 0 : ctx; c < (record_probes ? kc : ctx + 1); ++c) {
            Vec cin = in;
            cin[c] = 1.0;
            Vec logits = detail::step_output(params, state, cin, (c == ctx) ? work : work_ctx);
            Vec probs = nets::softmax(logits);
            if (c == ctx) behav_probs = probs;
            if (record_probes)
                for (int a = 0; a < ka; ++a) pol(c, a) = probs[a];
        }
        if (record_probes) trace.policies.push_back(std::move(pol));
        // behavioural transition reuses the visited context's fork
        state.h = work.h;
        state.c = work.c;
        int action = detail::sample_from_probs(behav_probs, ep_rng);
        int reward = tasks::bandit_reward(task, ctx, action, ep_rng);
        trace.behavioral.contexts.push_back(ctx);
        trace.behavioral.actions.push_back(action);
        trace.behavioral.rewards.push_back(reward);
        prev_action = action;
        prev_reward = reward;
    }
    return trace;
}

// Decoupled control: net c rolls its own single-context stream; row c of the
// recorded policy at step t is net c's policy at its own step t.
inline BanditInnerTrace probe_inner_bandit_decoupled(const std::vector<nets::LstmParams>& nets_,
                                                     const tasks::BanditTask& task, int t_steps,
                                                     RngStream rng) {
    BanditInnerTrace trace;
    trace.task = task;
    trace.rng_stream = rng.stream_id();
    const int kc = task.contexts, ka = task.actions;
    if (int(nets_.size()) != kc)
        throw InvalidInputError("probe_inner_bandit_decoupled: need one net per context");
    trace.policies.assign(t_steps, Matrix(kc, ka));
    nets::detail::LstmStepWork work;
    for (int c = 0; c < kc; ++c) {
        RngStream ep_rng = rng.substream(100 + c);
        nets::LstmState state = nets::LstmState::zero(nets_[c].hidden_size);
        int prev_action = -1, prev_reward = 0;
        for (int t = 0; t < t_steps; ++t) {
            Vec in(ka + 1, 0.0);
            if (prev_action >= 0) {
                in[prev_action] = 1.0;
                in[ka] = double(prev_reward);
            }
            Vec logits = detail::step_output(nets_[c], state, in, work);
            state.h = work.h;
            state.c = work.c;
            Vec probs = nets::softmax(logits);
            for (int a = 0; a < ka; ++a) trace.policies[t](c, a) = probs[a];
            int action = detail::sample_from_probs(probs, ep_rng);
            int reward = tasks::bandit_reward(task, c, action, ep_rng);
            prev_action = action;
            prev_reward = reward;
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Episode batteries: probe many episodes and average the progress measures.

// Mean q_k(t) over episodes for a linear-family net probed on tasks drawn
// from `dist` (each episode gets a freshly rotated task). Returns [T][K].
inline std::vector<Vec> linear_q_series(const nets::LstmParams& params,
                                        const tasks::LinearTaskDistribution& dist, int t_steps,
                                        int n_probe, int episodes, RngStream rng) {
    std::vector<std::vector<Vec>> per_episode(episodes);
    parallel_for(std::size_t(episodes), [&](std::size_t e) {
        RngStream ep_rng = rng.substream(e);
        RngStream task_rng = ep_rng.substream(0);
        tasks::LinearTask task = tasks::sample_linear_task(dist, task_rng);
        SvdResult f = svd(task.w);
        LinearInnerTrace trace = probe_inner_linear(params, task, t_steps, n_probe, ep_rng);
        auto& rows = per_episode[e];
        rows.resize(t_steps);
        for (int t = 0; t < t_steps; ++t) {
            Vec s_hat = analysis::effective_spectrum(trace.w_hat[t], f.u, f.v);
            Vec q(s_hat.size());
            for (std::size_t k = 0; k < q.size(); ++k) q[k] = s_hat[k] / f.s[k];
            rows[t] = std::move(q);
        }
    });
    return analysis::mean_series(per_episode);
}

// Mean Fourier projection q_k(t) over episodes; modes are the task's active
// modes (fixed amplitudes across episodes). Returns [T][#modes].
inline std::vector<Vec> fourier_q_series(const nets::LstmParams& params, tasks::FourierMode mode,
                                         int k_modes, double noise_std, int t_steps, int episodes,
                                         RngStream rng,
                                         analysis::ProjectionKind kind =
                                             analysis::ProjectionKind::phase_aware) {
    const Vec grid = analysis::probe_grid();
    std::vector<std::vector<Vec>> per_episode(episodes);
    parallel_for(std::size_t(episodes), [&](std::size_t e) {
        RngStream ep_rng = rng.substream(e);
        tasks::FourierTask task =
            tasks::sample_fourier_task(mode, ep_rng, k_modes, noise_std);
        Vec g_true(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) g_true[i] = tasks::eval_fourier(task, grid[i]);
        ComplexSpectrum g_spec = dft_real(g_true);
        std::vector<int> modes = analysis::active_modes(g_spec);
        FourierInnerTrace trace = probe_inner_fourier(params, task, t_steps, ep_rng);
        auto& rows = per_episode[e];
        rows.resize(t_steps);
        for (int t = 0; t < t_steps; ++t)
            rows[t] = analysis::fourier_projection(dft_real(trace.outputs[t]), g_spec, modes, kind);
    });
    return analysis::mean_series(per_episode);
}

// Mean rank-ordered q_k(t) over behavioural episodes on conflict tasks.
// Rank-ordering happens within each episode before averaging.
inline std::vector<Vec> bandit_q_series(const std::vector<nets::LstmParams>& nets_, bool decoupled,
                                        int t_steps, int episodes, RngStream rng,
                                        int contexts = 5, int actions = 5, double p_correct = 0.8,
                                        double p_incorrect = 0.2) {
    std::vector<std::vector<Vec>> per_episode(episodes);
    parallel_for(std::size_t(episodes), [&](std::size_t e) {
        RngStream ep_rng = rng.substream(e);
        RngStream task_rng = ep_rng.substream(0);
        tasks::BanditTask task = tasks::sample_bandit_task(contexts, actions, p_correct,
                                                           p_incorrect, true, task_rng);
        BanditInnerTrace trace =
            decoupled ? probe_inner_bandit_decoupled(nets_, task, t_steps, ep_rng)
                      : probe_inner_bandit(nets_[0], task, t_steps, ep_rng);
        std::vector<Vec> q(t_steps, Vec(contexts));
        for (int t = 0; t < t_steps; ++t)
            for (int c = 0; c < contexts; ++c)
                q[t][c] = trace.policies[t](c, task.correct_actions[c]);
        per_episode[e] = analysis::rank_order_contexts(q).reordered;
    });
    return analysis::mean_series(per_episode);
}

// ---------------------------------------------------------------------------
// Outer-dynamics sweep: probe every checkpoint and tabulate when each
// mode/frequency/context first clears the cutoff within an episode.

struct OuterDynamicsRow {
    long outer_step = 0;
    std::vector<std::optional<long>> inner_steps;  // per mode, inner step reaching cutoff
    Vec final_q;                                   // q at t = T per mode
};

struct OuterProbeSpec {
    Family family = Family::linear;
    int episodes = 100;
    double cutoff = 0.8;
    int t_steps = 20;
    int n_probe = 100;
    tasks::LinearTaskDistribution linear_dist =
        tasks::LinearTaskDistribution::fixed_spectrum(2, 2, {2.0, 1.0});
    tasks::FourierMode fourier_mode = tasks::FourierMode::unit_amplitudes;
    int fourier_modes = 5;
    double fourier_noise_std = 0.01;
    int bandit_contexts = 5, bandit_actions = 5;
    double p_correct = 0.8, p_incorrect = 0.2;
};

inline std::vector<OuterDynamicsRow> outer_dynamics_sweep(
    const std::vector<MetaCheckpoint>& checkpoints, const OuterProbeSpec& spec, RngStream rng) {
    std::vector<OuterDynamicsRow> rows;
    for (const auto& ck : checkpoints) {
        if ((spec.family == Family::bandit_decoupled) != (ck.params.size() > 1))
            throw InvalidInputError("outer_dynamics_sweep: probe family does not match checkpoint");
        std::vector<Vec> q;
        switch (spec.family) {
            case Family::linear:
                q = linear_q_series(ck.params[0], spec.linear_dist, spec.t_steps, spec.n_probe,
                                    spec.episodes, rng.substream(std::uint64_t(ck.outer_step)));
                break;
            case Family::fourier:
                q = fourier_q_series(ck.params[0], spec.fourier_mode, spec.fourier_modes,
                                     spec.fourier_noise_std, spec.t_steps, spec.episodes,
                                     rng.substream(std::uint64_t(ck.outer_step)));
                break;
            case Family::bandit_coupled:
            case Family::bandit_decoupled:
                q = bandit_q_series(ck.params, spec.family == Family::bandit_decoupled,
                                    spec.t_steps, spec.episodes,
                                    rng.substream(std::uint64_t(ck.outer_step)),
                                    spec.bandit_contexts, spec.bandit_actions, spec.p_correct,
                                    spec.p_incorrect);
                break;
        }
        OuterDynamicsRow row;
        row.outer_step = ck.outer_step;
        std::vector<long> inner_steps(q.size());
        for (std::size_t t = 0; t < q.size(); ++t) inner_steps[t] = long(t) + 1;
        const std::size_t K = q.front().size();
        for (std::size_t k = 0; k < K; ++k) {
            Vec series(q.size());
            for (std::size_t t = 0; t < q.size(); ++t) series[t] = q[t][k];
            row.inner_steps.push_back(analysis::steps_to_threshold(inner_steps, series, spec.cutoff));
        }
        row.final_q = q.back();
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace metadyn::meta
