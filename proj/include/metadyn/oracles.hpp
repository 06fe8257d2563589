#pragma once

// Exact Bayes-optimal baselines: the conjugate matrix-normal posterior for
// linear regression, a brute-force phase-grid posterior for the Fourier
// tasks, and the factorized discrete posterior for the contextual bandits.

#include "metadyn/analysis.hpp"
#include "metadyn/numerics.hpp"
#include "metadyn/tasks.hpp"
#include "metadyn/util.hpp"

namespace metadyn::oracles {

// Posterior mean after t observations. The payload layout depends on the
// family: [Ny x Nx] matrix for linear tasks, a 1 x 40 row of probe-grid
// values for Fourier tasks, and a [K_c x K_a] row-stochastic matrix for
// bandits.
struct PosteriorSummary {
    Matrix mean;
    long observation_count = 0;
};

// ------------------------------- linear -----------------------------------

// W_bar_t = ((X^T X + noise_var I)^{-1} X^T Y)^T, oriented so that y = W x
// for column vectors. x_obs rows are observations.
inline PosteriorSummary bayes_linear_posterior(const Matrix& x_obs, const Matrix& y_obs,
                                               double noise_var) {
    if (noise_var <= 0.0) throw InvalidInputError("bayes_linear_posterior: noise_var must be > 0");
    if (x_obs.rows != y_obs.rows) throw ShapeError("bayes_linear_posterior: row counts differ");
    PosteriorSummary out;
    out.observation_count = x_obs.rows;
    if (x_obs.rows == 0) {
        out.mean = Matrix(y_obs.cols, x_obs.cols);  // prior mean of MN(0, I, I)
        return out;
    }
    Matrix lambda = matmul(transpose(x_obs), x_obs);
    for (int i = 0; i < lambda.rows; ++i) lambda(i, i) += noise_var;
    Matrix xty = matmul(transpose(x_obs), y_obs);
    Matrix l = detail::cholesky(std::move(lambda));
    out.mean = transpose(detail::cholesky_solve(l, std::move(xty)));
    return out;
}

// ------------------------------- fourier ----------------------------------

// Brute-force posterior over the phase vector of a K-mode Fourier series,
// enumerated on a B^K grid of bin centres. Observations stream in one at a
// time; log-weights accumulate with max-subtraction so large t stays stable.
//
// The posterior mean function never requires storing per-hypothesis grids:
// g(x) is linear in (cos phi_k, sin phi_k), so the weighted moments
// E[cos phi_k], E[sin phi_k] determine the mean function exactly.
class FourierPosterior {
public:
    FourierPosterior(const Vec& amplitudes, int bins_per_axis, double noise_var)
        : amplitudes_(amplitudes), bins_(bins_per_axis), noise_var_(noise_var) {
        if (noise_var <= 0.0) throw InvalidInputError("FourierPosterior: noise_var must be > 0");
        if (bins_ < 2) throw InvalidInputError("FourierPosterior: need at least 2 bins");
        if (amplitudes_.size() > 16) throw InvalidInputError("FourierPosterior: K > 16 unsupported");
        const int k = int(amplitudes_.size());
        double count = std::pow(double(bins_), double(k));
        if (count > 1e7)
            throw InvalidInputError("FourierPosterior: hypothesis budget exceeded (B^K > 1e7)");
        n_hyp_ = std::size_t(count + 0.5);
        log_like_.assign(n_hyp_, 0.0);
        bin_cos_.resize(bins_);
        bin_sin_.resize(bins_);
        for (int b = 0; b < bins_; ++b) {
            double phi = (b + 0.5) * 2.0 * M_PI / bins_;
            bin_cos_[b] = std::cos(phi);
            bin_sin_[b] = std::sin(phi);
        }
    }

    int mode_count() const { return int(amplitudes_.size()); }
    long observation_count() const { return t_; }

    // phase bin of hypothesis h along mode k
    int bin_of(std::size_t h, int k) const {
        for (int i = 0; i < k; ++i) h /= std::size_t(bins_);
        return int(h % std::size_t(bins_));
    }

    double bin_center(int b) const { return (b + 0.5) * 2.0 * M_PI / bins_; }

    void add_observation(double x, double y) {
        const int K = mode_count();
        double sx[16], cx[16];
        for (int k = 0; k < K; ++k) {
            sx[k] = amplitudes_[k] * std::sin(2.0 * M_PI * (k + 1) * x);
            cx[k] = amplitudes_[k] * std::cos(2.0 * M_PI * (k + 1) * x);
        }
        const double inv2v = 1.0 / (2.0 * noise_var_);
        const std::size_t n = n_hyp_;
        const std::size_t n_blocks = std::min<std::size_t>(n, 64);
        parallel_for(n_blocks, [&](std::size_t blk) {
            std::size_t lo = blk * n / n_blocks, hi = (blk + 1) * n / n_blocks;
            for (std::size_t h = lo; h < hi; ++h) {
                // g_h(x) = sum_k a_k sin(2 pi k x + phi_k)
                //        = sum_k [a_k sin(2 pi k x)] cos(phi_k) + [a_k cos(2 pi k x)] sin(phi_k)
                double g = 0.0;
                std::size_t rem = h;
                for (int k = 0; k < K; ++k) {
                    int b = int(rem % std::size_t(bins_));
                    rem /= std::size_t(bins_);
                    g += sx[k] * bin_cos_[b] + cx[k] * bin_sin_[b];
                }
                double d = y - g;
                log_like_[h] -= d * d * inv2v;
            }
        });
        ++t_;
    }

    // Normalized posterior weights (sums to 1).
    Vec weights() const {
        double mx = log_like_[0];
        for (double v : log_like_) mx = std::max(mx, v);
        Vec w(n_hyp_);
        double z = 0.0;
        for (std::size_t h = 0; h < n_hyp_; ++h) {
            w[h] = std::exp(log_like_[h] - mx);
            z += w[h];
        }
        for (double& v : w) v /= z;
        return w;
    }

    // Posterior moments E[cos phi_k], E[sin phi_k]; fixed block-ordered
    // reduction keeps the result independent of the worker count.
    void phase_moments(Vec& cos_mom, Vec& sin_mom) const {
        const int K = mode_count();
        double mx = log_like_[0];
        for (double v : log_like_) mx = std::max(mx, v);
        const std::size_t n = n_hyp_;
        const std::size_t n_blocks = std::min<std::size_t>(n, 64);
        // per-block partial sums: z, then per (k, bin) weight mass
        std::vector<double> z_blk(n_blocks, 0.0);
        std::vector<std::vector<double>> mass_blk(n_blocks,
                                                  std::vector<double>(std::size_t(K) * bins_, 0.0));
        parallel_for(n_blocks, [&](std::size_t blk) {
            std::size_t lo = blk * n / n_blocks, hi = (blk + 1) * n / n_blocks;
            auto& mass = mass_blk[blk];
            for (std::size_t h = lo; h < hi; ++h) {
                double w = std::exp(log_like_[h] - mx);
                z_blk[blk] += w;
                std::size_t rem = h;
                for (int k = 0; k < K; ++k) {
                    int b = int(rem % std::size_t(bins_));
                    rem /= std::size_t(bins_);
                    mass[std::size_t(k) * bins_ + b] += w;
                }
            }
        });
        double z = 0.0;
        std::vector<double> mass(std::size_t(K) * bins_, 0.0);
        for (std::size_t blk = 0; blk < n_blocks; ++blk) {
            z += z_blk[blk];
            for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += mass_blk[blk][i];
        }
        cos_mom.assign(K, 0.0);
        sin_mom.assign(K, 0.0);
        for (int k = 0; k < K; ++k)
            for (int b = 0; b < bins_; ++b) {
                double m = mass[std::size_t(k) * bins_ + b] / z;
                cos_mom[k] += m * bin_cos_[b];
                sin_mom[k] += m * bin_sin_[b];
            }
    }

    // Posterior mean function evaluated at the given points.
    Vec mean_function(const Vec& xs) const {
        Vec cos_mom, sin_mom;
        phase_moments(cos_mom, sin_mom);
        const int K = mode_count();
        Vec out(xs.size(), 0.0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double acc = 0.0;
            for (int k = 0; k < K; ++k) {
                double ang = 2.0 * M_PI * (k + 1) * xs[i];
                acc += amplitudes_[k] * (std::sin(ang) * cos_mom[k] + std::cos(ang) * sin_mom[k]);
            }
            out[i] = acc;
        }
        return out;
    }

private:
    Vec amplitudes_;
    int bins_;
    double noise_var_;
    std::size_t n_hyp_ = 0;
    Vec log_like_;
    Vec bin_cos_, bin_sin_;
    long t_ = 0;
};

// Posterior mean function on the probe grid after conditioning on the given
// observations (pairs of x, y).
inline PosteriorSummary bayes_fourier_posterior_mean(const std::vector<std::pair<double, double>>& obs,
                                                     const Vec& amplitudes, int bins_per_axis,
                                                     double noise_var) {
    FourierPosterior post(amplitudes, bins_per_axis, noise_var);
    for (auto [x, y] : obs) post.add_observation(x, y);
    Vec grid = analysis::probe_grid();
    Vec values = post.mean_function(grid);
    PosteriorSummary out;
    out.observation_count = long(obs.size());
    out.mean = Matrix(1, int(values.size()));
    out.mean.data = values;
    return out;
}

// ------------------------------- bandits ----------------------------------

struct BanditObservation {
    int context;
    int action;
    int reward;  // 0 or 1
};

// Per context, a discrete posterior over which arm is correct; contexts
// factorize (the training distribution draws them independently). Returns a
// [K_c x K_a] matrix whose rows are the posteriors.
inline PosteriorSummary bayes_bandit_posterior(const std::vector<BanditObservation>& history,
                                               int contexts, int actions, double p_correct,
                                               double p_incorrect) {
    if (!(0.0 <= p_incorrect && p_incorrect < p_correct && p_correct <= 1.0))
        throw InvalidInputError("bayes_bandit_posterior: bad reward probabilities");
    Matrix post(contexts, actions, 1.0 / actions);
    for (const auto& ob : history) {
        if (ob.context < 0 || ob.context >= contexts || ob.action < 0 || ob.action >= actions)
            throw InvalidInputError("bayes_bandit_posterior: index out of range");
        double z = 0.0;
        for (int arm = 0; arm < actions; ++arm) {
            // likelihood of (action, reward) when `arm` is hypothesized correct
            double p = (ob.action == arm) ? p_correct : p_incorrect;
            double like = ob.reward ? p : 1.0 - p;
            post(ob.context, arm) *= like;
            z += post(ob.context, arm);
        }
        for (int arm = 0; arm < actions; ++arm) post(ob.context, arm) /= z;
    }
    PosteriorSummary out;
    out.mean = std::move(post);
    out.observation_count = long(history.size());
    return out;
}

}  // namespace metadyn::oracles
