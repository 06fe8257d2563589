#pragma once

// Procedural generation of the three task families (linear regression,
// Fourier-series regression, contextual bandits) and their episodes,
// including the out-of-distribution variants.

#include <numeric>

#include "metadyn/numerics.hpp"

#include "json.hpp"

namespace metadyn::tasks {

// ------------------------------- linear -----------------------------------

struct LinearTask {
    Matrix w;               // [Ny x Nx]
    double noise_std = 0.01;
};

struct LinearTaskDistribution {
    enum class Mode { matrix_normal, fixed_spectrum, uniform_spectrum, fixed_task };
    Mode mode = Mode::matrix_normal;
    int nx = 2;
    int ny = 2;
    double scale = 1.0;            // matrix_normal
    Vec spectrum;                  // fixed_spectrum
    double s_min = 0.0, s_max = 1.0;  // uniform_spectrum
    Matrix fixed_w;                // fixed_task
    double noise_std = 0.01;

    static LinearTaskDistribution matrix_normal(int nx, int ny, double scale = 1.0,
                                                double noise_std = 0.01) {
        LinearTaskDistribution d;
        d.mode = Mode::matrix_normal;
        d.nx = nx;
        d.ny = ny;
        d.scale = scale;
        d.noise_std = noise_std;
        return d;
    }
    static LinearTaskDistribution fixed_spectrum(int nx, int ny, Vec s, double noise_std = 0.01) {
        LinearTaskDistribution d;
        d.mode = Mode::fixed_spectrum;
        d.nx = nx;
        d.ny = ny;
        d.spectrum = std::move(s);
        d.noise_std = noise_std;
        return d;
    }
    static LinearTaskDistribution uniform_spectrum(int nx, int ny, double lo, double hi,
                                                   double noise_std = 0.01) {
        LinearTaskDistribution d;
        d.mode = Mode::uniform_spectrum;
        d.nx = nx;
        d.ny = ny;
        d.s_min = lo;
        d.s_max = hi;
        d.noise_std = noise_std;
        return d;
    }
    static LinearTaskDistribution fixed_task(Matrix w, double noise_std = 0.01) {
        LinearTaskDistribution d;
        d.mode = Mode::fixed_task;
        d.nx = w.cols;
        d.ny = w.rows;
        d.fixed_w = std::move(w);
        d.noise_std = noise_std;
        return d;
    }
};

// Replace the spectrum of a standard-normal sample with the prescribed one
// (sorted descending so mode k means the same thing across tasks).
inline LinearTask sample_linear_task(const LinearTaskDistribution& dist, RngStream& rng) {
    LinearTask task;
    task.noise_std = dist.noise_std;
    switch (dist.mode) {
        case LinearTaskDistribution::Mode::matrix_normal:
            task.w = sample_gaussian_matrix(dist.ny, dist.nx, dist.scale, rng);
            return task;
        case LinearTaskDistribution::Mode::fixed_task:
            task.w = dist.fixed_w;
            return task;
        case LinearTaskDistribution::Mode::fixed_spectrum:
        case LinearTaskDistribution::Mode::uniform_spectrum: {
            const int k = std::min(dist.nx, dist.ny);
            Vec s;
            if (dist.mode == LinearTaskDistribution::Mode::fixed_spectrum) {
                if (int(dist.spectrum.size()) != k)
                    throw InvalidInputError("sample_linear_task: spectrum length != min(Nx,Ny)");
                s = dist.spectrum;
            } else {
                s.resize(k);
                for (double& v : s) v = rng.uniform(dist.s_min, dist.s_max);
            }
            std::sort(s.begin(), s.end(), std::greater<>());
            Matrix g = sample_gaussian_matrix(dist.ny, dist.nx, 1.0, rng);
            SvdResult f = svd(g);
            task.w = svd_compose(f.u, s, f.v);
            return task;
        }
    }
    throw InvalidInputError("sample_linear_task: bad mode");
}

// One supervised step: input and target vectors.
struct Episode {
    std::vector<Vec> inputs;
    std::vector<Vec> targets;

    int length() const { return int(inputs.size()); }
};

// x_t ~ N(0, I); y_t = W x_t + noise
inline Episode sample_linear_episode(const LinearTask& task, int t_steps, RngStream& rng) {
    if (t_steps < 1) throw InvalidInputError("sample_linear_episode: T must be >= 1");
    Episode ep;
    ep.inputs.reserve(t_steps);
    ep.targets.reserve(t_steps);
    for (int t = 0; t < t_steps; ++t) {
        Vec x(task.w.cols);
        for (double& v : x) v = rng.gaussian();
        Vec y = matvec(task.w, x);
        for (double& v : y) v += task.noise_std * rng.gaussian();
        ep.inputs.push_back(std::move(x));
        ep.targets.push_back(std::move(y));
    }
    return ep;
}

// ------------------------------- fourier ----------------------------------

struct FourierTask {
    Vec amplitudes;  // index k-1 holds a_k
    Vec phases;      // [0, 2pi)
    double noise_std = 0.01;

    int mode_count() const { return int(amplitudes.size()); }
};

// g(x) = sum_k a_k sin(2 pi k x + phi_k)
inline double eval_fourier(const FourierTask& task, double x) {
    double s = 0.0;
    for (int k = 1; k <= task.mode_count(); ++k)
        s += task.amplitudes[k - 1] * std::sin(2.0 * M_PI * k * x + task.phases[k - 1]);
    return s;
}

enum class FourierMode { unit_amplitudes, uniform_amplitudes, bandpass };

// unit: a = (1,1,1,1,1); uniform: a_k ~ U[0,1]; bandpass: a = (0,0,1,1,1).
inline FourierTask sample_fourier_task(FourierMode mode, RngStream& rng, int k_modes = 5,
                                       double noise_std = 0.01) {
    FourierTask task;
    task.noise_std = noise_std;
    task.amplitudes.resize(k_modes);
    task.phases.resize(k_modes);
    for (int k = 0; k < k_modes; ++k) {
        switch (mode) {
            case FourierMode::unit_amplitudes: task.amplitudes[k] = 1.0; break;
            case FourierMode::uniform_amplitudes: task.amplitudes[k] = rng.uniform(); break;
            case FourierMode::bandpass: task.amplitudes[k] = (k + 1 >= 3) ? 1.0 : 0.0; break;
        }
        task.phases[k] = rng.uniform(0.0, 2.0 * M_PI);
    }
    return task;
}

// x_t ~ U[-0.5, 0.5); y_t = g(x_t) + noise
inline Episode sample_fourier_episode(const FourierTask& task, int t_steps, RngStream& rng) {
    if (t_steps < 1) throw InvalidInputError("sample_fourier_episode: T must be >= 1");
    Episode ep;
    for (int t = 0; t < t_steps; ++t) {
        double x = rng.uniform(-0.5, 0.5);
        double y = eval_fourier(task, x) + task.noise_std * rng.gaussian();
        ep.inputs.push_back({x});
        ep.targets.push_back({y});
    }
    return ep;
}

// ------------------------------- bandits ----------------------------------

struct BanditTask {
    int contexts = 5;
    int actions = 5;
    std::vector<int> correct_actions;  // a*(c)
    double p_correct = 0.8;
    double p_incorrect = 0.2;
};

// conflict: a*(.) is a uniform random injection (all correct actions
// distinct); independent: each a*(c) i.i.d. uniform.
inline BanditTask sample_bandit_task(int contexts, int actions, double p_correct,
                                     double p_incorrect, bool conflict, RngStream& rng) {
    if (!(0.0 <= p_incorrect && p_incorrect < p_correct && p_correct <= 1.0))
        throw InvalidInputError("sample_bandit_task: need 0 <= p_incorrect < p_correct <= 1");
    BanditTask task;
    task.contexts = contexts;
    task.actions = actions;
    task.p_correct = p_correct;
    task.p_incorrect = p_incorrect;
    task.correct_actions.resize(contexts);
    if (conflict) {
        if (actions < contexts)
            throw InvalidInputError("sample_bandit_task: conflict mode needs K_a >= K_c");
        std::vector<int> pool(actions);
        std::iota(pool.begin(), pool.end(), 0);
        // Fisher-Yates prefix
        for (int c = 0; c < contexts; ++c) {
            int j = c + int(rng.uniform_index(std::uint64_t(actions - c)));
            std::swap(pool[c], pool[j]);
            task.correct_actions[c] = pool[c];
        }
    } else {
        for (int c = 0; c < contexts; ++c)
            task.correct_actions[c] = int(rng.uniform_index(std::uint64_t(actions)));
    }
    return task;
}

inline BanditTask sample_bandit_task(bool conflict, RngStream& rng) {
    return sample_bandit_task(5, 5, 0.8, 0.2, conflict, rng);
}

inline int bandit_reward(const BanditTask& task, int context, int action, RngStream& rng) {
    if (context < 0 || context >= task.contexts || action < 0 || action >= task.actions)
        throw InvalidInputError("bandit_reward: index out of range");
    double p = (action == task.correct_actions[context]) ? task.p_correct : task.p_incorrect;
    return rng.bernoulli(p) ? 1 : 0;
}

// One behavioural bandit episode: contexts are fixed up front, action and
// reward slots are filled during the rollout.
struct BanditEpisode {
    std::vector<int> contexts;
    std::vector<int> actions;
    std::vector<int> rewards;

    int length() const { return int(contexts.size()); }
};

// contexts i.i.d. uniform over K_c
inline BanditEpisode sample_bandit_contexts(const BanditTask& task, int t_steps, RngStream& rng) {
    if (t_steps < 1) throw InvalidInputError("sample_bandit_contexts: T must be >= 1");
    BanditEpisode ep;
    ep.contexts.resize(t_steps);
    for (int& c : ep.contexts) c = int(rng.uniform_index(std::uint64_t(task.contexts)));
    ep.actions.assign(t_steps, -1);
    ep.rewards.assign(t_steps, 0);
    return ep;
}

// ------------------------------- JSON -------------------------------------

inline void to_json(nlohmann::json& j, const LinearTask& t) {
    std::vector<Vec> rows(t.w.rows);
    for (int i = 0; i < t.w.rows; ++i)
        rows[i] = Vec(t.w.data.begin() + std::ptrdiff_t(i) * t.w.cols,
                      t.w.data.begin() + std::ptrdiff_t(i + 1) * t.w.cols);
    j = {{"w", rows}, {"noise_std", t.noise_std}};
}

inline void from_json(const nlohmann::json& j, LinearTask& t) {
    auto rows = j.at("w").get<std::vector<Vec>>();
    t.w = Matrix(int(rows.size()), rows.empty() ? 0 : int(rows[0].size()));
    for (int i = 0; i < t.w.rows; ++i)
        for (int c = 0; c < t.w.cols; ++c) t.w(i, c) = rows[i][c];
    t.noise_std = j.at("noise_std").get<double>();
}

inline void to_json(nlohmann::json& j, const FourierTask& t) {
    j = {{"amplitudes", t.amplitudes}, {"phases", t.phases}, {"noise_std", t.noise_std}};
}

inline void from_json(const nlohmann::json& j, FourierTask& t) {
    t.amplitudes = j.at("amplitudes").get<Vec>();
    t.phases = j.at("phases").get<Vec>();
    t.noise_std = j.at("noise_std").get<double>();
}

inline void to_json(nlohmann::json& j, const BanditTask& t) {
    j = {{"correct_actions", t.correct_actions},
         {"p_correct", t.p_correct},
         {"p_incorrect", t.p_incorrect}};
}

inline void from_json(const nlohmann::json& j, BanditTask& t) {
    t.correct_actions = j.at("correct_actions").get<std::vector<int>>();
    t.contexts = int(t.correct_actions.size());
    t.p_correct = j.at("p_correct").get<double>();
    t.p_incorrect = j.at("p_incorrect").get<double>();
    t.actions = t.contexts;
    for (int a : t.correct_actions) t.actions = std::max(t.actions, a + 1);
}

}  // namespace metadyn::tasks
