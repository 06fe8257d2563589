#pragma once

// Turns raw traces into the reported measurements: effective spectra,
// Fourier projections, context rank-ordering, steps-to-threshold, and
// cross-replica aggregation. Also owns the trace CSV schemas and the
// figure-data CSV writer; the same code paths run on Meta-Learner probe
// traces and on Bayes-oracle traces.

#include <fstream>
#include <optional>
#include <sstream>

#include "metadyn/numerics.hpp"
#include "metadyn/util.hpp"

namespace metadyn::analysis {

// s_hat = diag(u^T w_hat v); off-diagonal residuals are discarded.
inline Vec effective_spectrum(const Matrix& w_hat, const Matrix& u, const Matrix& v) {
    if (u.rows != w_hat.rows || v.rows != w_hat.cols || u.cols != v.cols)
        throw ShapeError("effective_spectrum: factor shapes do not conform");
    const int k_modes = u.cols;
    Vec s(k_modes, 0.0);
    for (int k = 0; k < k_modes; ++k) {
        double acc = 0.0;
        for (int i = 0; i < w_hat.rows; ++i) {
            double ui = u(i, k);
            for (int j = 0; j < w_hat.cols; ++j) acc += ui * w_hat(i, j) * v(j, k);
        }
        s[k] = acc;
    }
    return s;
}

// 41 equispaced points on [-0.5, 0.5], final point dropped, centred to zero
// mean. Spacing is exactly 1/40.
inline Vec probe_grid() {
    constexpr int n = 40;
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = -0.5 + double(i) / n;
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= n;
    for (double& v : g) v -= mean;
    return g;
}

enum class ProjectionKind { phase_aware, energy_ratio };

// q_k = Re(g_hat_k * conj(g_k)) / |g_k|^2 for the requested modes
// (energy_ratio variant: |g_hat_k|^2 / |g_k|^2).
inline Vec fourier_projection(const ComplexSpectrum& g_hat, const ComplexSpectrum& g,
                              const std::vector<int>& modes,
                              ProjectionKind kind = ProjectionKind::phase_aware) {
    if (g_hat.coefficients.size() != g.coefficients.size())
        throw ShapeError("fourier_projection: spectra lengths differ");
    Vec q(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        int k = modes[i];
        if (k < 0 || k >= int(g.coefficients.size()))
            throw InvalidInputError("fourier_projection: mode index out of range");
        double denom = std::norm(g.coefficients[k]);
        if (denom <= 0.0)
            throw InvalidInputError("fourier_projection: mode " + std::to_string(k) +
                                    " has zero target amplitude");
        if (kind == ProjectionKind::phase_aware)
            q[i] = (g_hat.coefficients[k] * std::conj(g.coefficients[k])).real() / denom;
        else
            q[i] = std::norm(g_hat.coefficients[k]) / denom;
    }
    return q;
}

inline std::vector<int> active_modes(const ComplexSpectrum& g, double tol = 1e-9) {
    std::vector<int> out;
    for (int k = 1; k < int(g.coefficients.size()); ++k)
        if (std::abs(g.coefficients[k]) > tol) out.push_back(k);
    return out;
}

// First recorded step with q > cutoff; no interpolation between snapshots.
inline std::optional<long> steps_to_threshold(const std::vector<long>& steps, const Vec& q,
                                              double cutoff) {
    if (!(cutoff > 0.0 && cutoff < 1.0))
        throw InvalidInputError("steps_to_threshold: cutoff must lie in (0,1)");
    if (steps.size() != q.size()) throw ShapeError("steps_to_threshold: length mismatch");
    for (std::size_t i = 0; i < q.size(); ++i)
        if (q[i] > cutoff) return steps[i];
    return std::nullopt;
}

// Rows indexed by mode/frequency/context, columns by cutoff. std::nullopt
// marks "never reached"; it is never coerced to a number.
struct ThresholdTable {
    std::vector<double> cutoffs;
    std::vector<std::vector<std::optional<long>>> first_step;  // [mode][cutoff]
};

inline ThresholdTable threshold_table(const std::vector<long>& steps,
                                      const std::vector<Vec>& q_per_step,  // [T][K]
                                      const std::vector<double>& cutoffs) {
    ThresholdTable table;
    table.cutoffs = cutoffs;
    if (q_per_step.empty()) return table;
    const std::size_t k_modes = q_per_step.front().size();
    table.first_step.assign(k_modes, std::vector<std::optional<long>>(cutoffs.size()));
    for (std::size_t k = 0; k < k_modes; ++k) {
        Vec series(q_per_step.size());
        for (std::size_t t = 0; t < q_per_step.size(); ++t) series[t] = q_per_step[t][k];
        for (std::size_t c = 0; c < cutoffs.size(); ++c)
            table.first_step[k][c] = steps_to_threshold(steps, series, cutoffs[c]);
    }
    return table;
}

// q * p_correct + (1 - q) * p_incorrect
inline double bandit_expected_reward(double q, double p_correct, double p_incorrect) {
    if (q < 0.0 || q > 1.0) throw InvalidInputError("bandit_expected_reward: q outside [0,1]");
    return q * p_correct + (1.0 - q) * p_incorrect;
}

struct ContextRanking {
    std::vector<int> order;       // order[k] = nominal context learned k-th
    std::vector<Vec> reordered;   // [T][K], column k = q of k-th learned context
};

// Contexts sorted descending by time-averaged q_c(t); ties break on the
// nominal index so the ordering is stable under relabeling.
inline ContextRanking rank_order_contexts(const std::vector<Vec>& q_per_step) {
    if (q_per_step.empty()) throw InvalidInputError("rank_order_contexts: empty trace");
    const int k_ctx = int(q_per_step.front().size());
    Vec avg(k_ctx, 0.0);
    for (const Vec& row : q_per_step)
        for (int c = 0; c < k_ctx; ++c) avg[c] += row[c];
    for (double& v : avg) v /= double(q_per_step.size());
    ContextRanking r;
    r.order.resize(k_ctx);
    for (int c = 0; c < k_ctx; ++c) r.order[c] = c;
    std::stable_sort(r.order.begin(), r.order.end(),
                     [&](int a, int b) { return avg[a] > avg[b]; });
    r.reordered.reserve(q_per_step.size());
    for (const Vec& row : q_per_step) {
        Vec out(k_ctx);
        for (int k = 0; k < k_ctx; ++k) out[k] = row[r.order[k]];
        r.reordered.push_back(std::move(out));
    }
    return r;
}

// ------------------------------ aggregation --------------------------------

struct Aggregate {
    std::vector<Vec> mean;                  // [T][K]
    std::vector<Vec> stderr_;               // [T][K]; empty when n < 2
    std::size_t replicas = 0;
};

// Mean and standard error across replicas (sample std / sqrt(n)). Episodes
// must already be averaged within each replica.
inline Aggregate aggregate(const std::vector<std::vector<Vec>>& per_replica /* [R][T][K] */) {
    if (per_replica.empty()) throw InvalidInputError("aggregate: no replicas");
    const std::size_t T = per_replica.front().size();
    for (const auto& rep : per_replica)
        if (rep.size() != T) throw ShapeError("aggregate: replica lengths differ");
    Aggregate out;
    out.replicas = per_replica.size();
    const double n = double(per_replica.size());
    out.mean.assign(T, Vec());
    if (n >= 2) out.stderr_.assign(T, Vec());
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t K = per_replica.front()[t].size();
        for (const auto& rep : per_replica)
            if (rep[t].size() != K) throw ShapeError("aggregate: payload shapes differ");
        Vec mu(K, 0.0);
        for (const auto& rep : per_replica)
            for (std::size_t k = 0; k < K; ++k) mu[k] += rep[t][k];
        for (double& v : mu) v /= n;
        if (n >= 2) {
            Vec se(K, 0.0);
            for (const auto& rep : per_replica)
                for (std::size_t k = 0; k < K; ++k) {
                    double d = rep[t][k] - mu[k];
                    se[k] += d * d;
                }
            for (double& v : se) v = std::sqrt(v / (n - 1.0)) / std::sqrt(n);
            out.stderr_[t] = std::move(se);
        }
        out.mean[t] = std::move(mu);
    }
    return out;
}

// Elementwise mean of several [T][K] series (e.g. episodes within a replica).
inline std::vector<Vec> mean_series(const std::vector<std::vector<Vec>>& series) {
    if (series.empty()) throw InvalidInputError("mean_series: empty input");
    std::vector<Vec> acc = series.front();
    for (std::size_t s = 1; s < series.size(); ++s) {
        if (series[s].size() != acc.size()) throw ShapeError("mean_series: lengths differ");
        for (std::size_t t = 0; t < acc.size(); ++t)
            for (std::size_t k = 0; k < acc[t].size(); ++k) acc[t][k] += series[s][t][k];
    }
    for (auto& row : acc)
        for (double& v : row) v /= double(series.size());
    return acc;
}

// ------------------------------ trace CSVs ---------------------------------

// Learner trace: one row per snapshot.
// columns: run_id, step, loss_or_reward, <payload...>
struct LearnerTraceTable {
    std::string run_id;
    std::vector<std::string> payload_columns;
    std::vector<long> steps;
    Vec loss_or_reward;
    std::vector<Vec> payload;  // [snapshot][payload]
};

// Inner trace: one row per (episode, inner step).
// columns: meta_run_id, checkpoint_step, episode_id, t, <payload...>
struct InnerTraceRow {
    long checkpoint_step = 0;
    long episode_id = 0;
    long t = 0;
    Vec payload;
};
struct InnerTraceTable {
    std::string meta_run_id;
    std::vector<std::string> payload_columns;
    std::vector<InnerTraceRow> rows;
};

inline void write_learner_trace_csv(std::ostream& os, const LearnerTraceTable& table) {
    os << "run_id,step,loss_or_reward";
    for (const auto& c : table.payload_columns) os << "," << c;
    os << "\n";
    for (std::size_t i = 0; i < table.steps.size(); ++i) {
        os << table.run_id << "," << table.steps[i] << "," << format_double(table.loss_or_reward[i]);
        for (double v : table.payload[i]) os << "," << format_double(v);
        os << "\n";
    }
}

inline void write_inner_trace_csv(std::ostream& os, const InnerTraceTable& table) {
    os << "meta_run_id,checkpoint_step,episode_id,t";
    for (const auto& c : table.payload_columns) os << "," << c;
    os << "\n";
    for (const auto& row : table.rows) {
        os << table.meta_run_id << "," << row.checkpoint_step << "," << row.episode_id << ","
           << row.t;
        for (double v : row.payload) os << "," << format_double(v);
        os << "\n";
    }
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace detail

inline InnerTraceTable read_inner_trace_csv(std::istream& is) {
    InnerTraceTable table;
    std::string line;
    if (!std::getline(is, line)) throw InvalidInputError("read_inner_trace_csv: empty file");
    auto header = detail::split_csv_line(line);
    if (header.size() < 4 || header[0] != "meta_run_id")
        throw InvalidInputError("read_inner_trace_csv: unexpected header");
    table.payload_columns.assign(header.begin() + 4, header.end());
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != header.size()) throw InvalidInputError("read_inner_trace_csv: ragged row");
        table.meta_run_id = f[0];
        InnerTraceRow row;
        row.checkpoint_step = std::stol(f[1]);
        row.episode_id = std::stol(f[2]);
        row.t = std::stol(f[3]);
        row.payload.resize(f.size() - 4);
        for (std::size_t i = 4; i < f.size(); ++i) row.payload[i - 4] = std::stod(f[i]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline LearnerTraceTable read_learner_trace_csv(std::istream& is) {
    LearnerTraceTable table;
    std::string line;
    if (!std::getline(is, line)) throw InvalidInputError("read_learner_trace_csv: empty file");
    auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "run_id")
        throw InvalidInputError("read_learner_trace_csv: unexpected header");
    table.payload_columns.assign(header.begin() + 3, header.end());
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != header.size()) throw InvalidInputError("read_learner_trace_csv: ragged row");
        table.run_id = f[0];
        table.steps.push_back(std::stol(f[1]));
        table.loss_or_reward.push_back(std::stod(f[2]));
        Vec payload(f.size() - 3);
        for (std::size_t i = 3; i < f.size(); ++i) payload[i - 3] = std::stod(f[i]);
        table.payload.push_back(std::move(payload));
    }
    return table;
}

// ---------------------------- figure-data CSVs -----------------------------

struct FigureRow {
    double x;
    std::string series_id;
    double mean;
    std::optional<double> stderr_;
};

// columns: x, series_id, mean, stderr (stderr blank when absent)
inline void write_figure_csv(const std::string& path, const std::vector<FigureRow>& rows) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw Error("write_figure_csv: cannot open " + path);
    os << "x,series_id,mean,stderr\n";
    for (const auto& r : rows) {
        os << format_double(r.x) << "," << r.series_id << "," << format_double(r.mean) << ",";
        if (r.stderr_) os << format_double(*r.stderr_);
        os << "\n";
    }
}

}  // namespace metadyn::analysis
