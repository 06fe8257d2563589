#pragma once

// Low-level deterministic kernels: small dense matrices, one-sided Jacobi
// SVD, direct DFT for short real signals, least squares, and a counter-based
// RNG whose streams can be split hierarchically without coordination.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace metadyn {

using Vec = std::vector<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidInputError : Error {
    using Error::Error;
};
struct ShapeError : Error {
    using Error::Error;
};
struct SingularSystemError : Error {
    using Error::Error;
};

// Dense row-major matrix of doubles. Small (<= 32x32 for the SVD path);
// nothing here is tuned for large sizes.
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(std::size_t(r) * c, fill) {}

    double& operator()(int i, int j) { return data[std::size_t(i) * cols + j]; }
    double operator()(int i, int j) const { return data[std::size_t(i) * cols + j]; }

    double* row(int i) { return data.data() + std::size_t(i) * cols; }
    const double* row(int i) const { return data.data() + std::size_t(i) * cols; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    bool finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            double aik = a(i, k);
            for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Vec matvec(const Matrix& a, const Vec& x) {
    if (a.cols != int(x.size())) throw ShapeError("matvec: dimension mismatch");
    Vec y(a.rows, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

// c += a * b        (a: m x k, b: k x n)
inline void gemm_accum_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols)
        throw ShapeError("gemm_accum_nn: shape mismatch");
    for (int i = 0; i < a.rows; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int k = 0; k < a.cols; ++k) {
            double aik = ai[k];
            const double* bk = b.row(k);
            for (int j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
}

// c += a * b^T      (a: m x k, b: n x k)
inline void gemm_accum_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows)
        throw ShapeError("gemm_accum_nt: shape mismatch");
    for (int i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
            ci[j] += s;
        }
    }
}

// c += a^T * b      (a: k x m, b: k x n)
inline void gemm_accum_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
        throw ShapeError("gemm_accum_tn: shape mismatch");
    for (int k = 0; k < a.rows; ++k) {
        const double* ak = a.row(k);
        const double* bk = b.row(k);
        for (int i = 0; i < a.cols; ++i) {
            double aki = ak[i];
            double* ci = c.row(i);
            for (int j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
        }
    }
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw ShapeError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Counter-based RNG. Each (seed, stream) pair names an independent stream;
// draws hash the running counter, so replicas and episodes can derive their
// own streams and never contend or overlap.

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id), key_(mix2(mix1(seed + GOLDEN), stream_id)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    // Independent child stream; `tag` values name the children.
    RngStream substream(std::uint64_t tag) const { return RngStream(seed_, mix2(stream_, tag)); }

    std::uint64_t next_u64() { return mix1(key_ + GOLDEN * ++counter_); }

    // uniform on [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer uniform on [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // multiply-shift; bias is ~n/2^64, irrelevant at our scales
        return std::uint64_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // Box-Muller; u1 in (0,1] so the log is finite
        double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix1(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    static std::uint64_t mix2(std::uint64_t a, std::uint64_t b) {
        return mix1(a ^ mix1(b + GOLDEN));
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// i.i.d. entries ~ N(0, scale^2)
inline Matrix sample_gaussian_matrix(int rows, int cols, double scale, RngStream& rng) {
    if (scale <= 0.0) throw InvalidInputError("sample_gaussian_matrix: scale must be > 0");
    Matrix m(rows, cols);
    for (double& v : m.data) v = scale * rng.gaussian();
    return m;
}

// N(0, sigma^2) restricted to |x| <= bound by resampling.
inline double sample_truncated_normal(double sigma, double bound, RngStream& rng) {
    if (sigma <= 0.0) throw InvalidInputError("sample_truncated_normal: sigma must be > 0");
    for (;;) {
        double x = sigma * rng.gaussian();
        if (std::abs(x) <= bound) return x;
    }
}

inline double sample_truncated_normal(double sigma, RngStream& rng) {
    return sample_truncated_normal(sigma, 2.0 * sigma, rng);
}

// ---------------------------------------------------------------------------
// SVD via one-sided Jacobi. Intended for matrices up to 32x32; accuracy is
// near machine precision there. Returns thin factors: for an m x n input with
// m >= n, u is m x n, s has n entries (descending), v is n x n. Sign
// convention: the first nonvanishing entry of each left singular vector is
// positive.

struct SvdResult {
    Matrix u;
    Vec s;
    Matrix v;
};

namespace detail {

inline SvdResult svd_tall(const Matrix& a) {
    const int m = a.rows, n = a.cols;
    Matrix b = a;
    Matrix v = Matrix::identity(n);

    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int i = 0; i < m; ++i) {
                    app += b(i, p) * b(i, p);
                    aqq += b(i, q) * b(i, q);
                    apq += b(i, p) * b(i, q);
                }
                if (std::abs(apq) <= 1e-15 * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double cs = 1.0 / std::sqrt(1.0 + t * t);
                double sn = cs * t;
                for (int i = 0; i < m; ++i) {
                    double bp = b(i, p), bq = b(i, q);
                    b(i, p) = cs * bp - sn * bq;
                    b(i, q) = sn * bp + cs * bq;
                }
                for (int i = 0; i < n; ++i) {
                    double vp = v(i, p), vq = v(i, q);
                    v(i, p) = cs * vp - sn * vq;
                    v(i, q) = sn * vp + cs * vq;
                }
            }
        }
        if (!rotated) break;
    }

    Vec s(n);
    for (int j = 0; j < n; ++j) {
        double norm = 0.0;
        for (int i = 0; i < m; ++i) norm += b(i, j) * b(i, j);
        s[j] = std::sqrt(norm);
    }

    // sort modes descending by singular value (stable insertion, n is tiny)
    std::vector<int> order(n);
    for (int j = 0; j < n; ++j) order[j] = j;
    for (int j = 1; j < n; ++j) {
        int oj = order[j];
        int k = j;
        while (k > 0 && s[order[k - 1]] < s[oj]) {
            order[k] = order[k - 1];
            --k;
        }
        order[k] = oj;
    }

    SvdResult out;
    out.u = Matrix(m, n);
    out.v = Matrix(n, n);
    out.s.resize(n);
    double smax = 0.0;
    for (int j = 0; j < n; ++j) smax = std::max(smax, s[j]);
    const double tiny = std::max(smax, 1.0) * 1e-300;

    for (int jj = 0; jj < n; ++jj) {
        int j = order[jj];
        out.s[jj] = s[j];
        if (s[j] > tiny && smax > 0.0 && s[j] > smax * 1e-13) {
            for (int i = 0; i < m; ++i) out.u(i, jj) = b(i, j) / s[j];
        } else {
            out.s[jj] = s[j];  // keep the (near-)zero value as computed
            // u column undefined by the data; fill below by completion
            for (int i = 0; i < m; ++i) out.u(i, jj) = 0.0;
        }
        for (int i = 0; i < n; ++i) out.v(i, jj) = v(i, j);
    }

    // complete u columns lost to (near-)zero singular values so u stays
    // orthonormal; Gram-Schmidt over the standard basis
    for (int jj = 0; jj < n; ++jj) {
        double norm = 0.0;
        for (int i = 0; i < m; ++i) norm += out.u(i, jj) * out.u(i, jj);
        if (norm > 0.5) continue;
        for (int e = 0; e < m; ++e) {
            Vec cand(m, 0.0);
            cand[e] = 1.0;
            for (int k = 0; k < n; ++k) {
                if (k == jj) continue;
                double dot = 0.0;
                for (int i = 0; i < m; ++i) dot += out.u(i, k) * cand[i];
                for (int i = 0; i < m; ++i) cand[i] -= dot * out.u(i, k);
            }
            double cn = 0.0;
            for (int i = 0; i < m; ++i) cn += cand[i] * cand[i];
            if (cn > 1e-6) {
                cn = std::sqrt(cn);
                for (int i = 0; i < m; ++i) out.u(i, jj) = cand[i] / cn;
                break;
            }
        }
    }

    // sign convention: first entry of each u column with magnitude above a
    // relative cutoff is made positive; v flips with it
    for (int j = 0; j < n; ++j) {
        double colmax = 0.0;
        for (int i = 0; i < m; ++i) colmax = std::max(colmax, std::abs(out.u(i, j)));
        for (int i = 0; i < m; ++i) {
            if (std::abs(out.u(i, j)) > 1e-12 * colmax && colmax > 0.0) {
                if (out.u(i, j) < 0.0) {
                    for (int r = 0; r < m; ++r) out.u(r, j) = -out.u(r, j);
                    for (int r = 0; r < n; ++r) out.v(r, j) = -out.v(r, j);
                }
                break;
            }
        }
    }
    return out;
}

}  // namespace detail

inline SvdResult svd(const Matrix& a) {
    if (a.rows == 0 || a.cols == 0) throw InvalidInputError("svd: empty matrix");
    if (a.rows > 32 || a.cols > 32) throw InvalidInputError("svd: matrices above 32x32 unsupported");
    if (!a.finite()) throw InvalidInputError("svd: non-finite input");
    if (a.rows >= a.cols) return detail::svd_tall(a);
    SvdResult t = detail::svd_tall(transpose(a));
    return SvdResult{std::move(t.v), std::move(t.s), std::move(t.u)};
}

// u * diag(s) * v^T
inline Matrix svd_compose(const Matrix& u, const Vec& s, const Matrix& v) {
    if (u.cols != int(s.size()) || v.cols != int(s.size()))
        throw ShapeError("svd_compose: factor shapes inconsistent");
    Matrix out(u.rows, v.rows);
    for (int i = 0; i < u.rows; ++i)
        for (int j = 0; j < v.rows; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) acc += u(i, int(k)) * s[k] * v(j, int(k));
            out(i, j) = acc;
        }
    return out;
}

// ---------------------------------------------------------------------------
// DFT of a real signal of even length N. coefficient(k) for k = 0..N/2 is
// (1/N) * sum_n x[n] * exp(-2*pi*i*k*n/N). Direct O(N^2) evaluation; the
// signals here are 40 points long.

struct ComplexSpectrum {
    std::vector<std::complex<double>> coefficients;  // index k = 0..N/2
    int signal_length = 0;
};

inline ComplexSpectrum dft_real(const Vec& signal) {
    const int n = int(signal.size());
    if (n < 2 || n % 2 != 0) throw InvalidInputError("dft_real: need even length >= 2");
    for (double v : signal)
        if (!std::isfinite(v)) throw InvalidInputError("dft_real: non-finite sample");
    ComplexSpectrum out;
    out.signal_length = n;
    out.coefficients.resize(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (int t = 0; t < n; ++t) {
            double ang = -2.0 * M_PI * k * t / n;
            re += signal[t] * std::cos(ang);
            im += signal[t] * std::sin(ang);
        }
        out.coefficients[k] = {re / n, im / n};
    }
    return out;
}

// Inverse of dft_real for real signals of even length.
inline Vec idft_real(const ComplexSpectrum& spec) {
    const int n = spec.signal_length;
    if (n < 2 || int(spec.coefficients.size()) != n / 2 + 1)
        throw InvalidInputError("idft_real: inconsistent spectrum");
    Vec x(n, 0.0);
    for (int t = 0; t < n; ++t) {
        double acc = 0.0;
        for (int k = 0; k <= n / 2; ++k) {
            double w = (k == 0 || k == n / 2) ? 1.0 : 2.0;
            double ang = 2.0 * M_PI * k * t / n;
            acc += w * (spec.coefficients[k].real() * std::cos(ang) -
                        spec.coefficients[k].imag() * std::sin(ang));
        }
        x[t] = acc;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Least squares: given x (N x Nx) and y (N x Ny), the W (Ny x Nx) minimizing
// sum_n ||y_n - W x_n||^2, via the normal equations and a Cholesky solve.

namespace detail {

// Cholesky in place; throws SingularSystemError when a pivot collapses.
inline Matrix cholesky(Matrix a, double rel_tol = 1e-12) {
    const int n = a.rows;
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > rel_tol * max_diag))
            throw SingularSystemError("cholesky: matrix not positive definite");
        d = std::sqrt(d);
        a(j, j) = d;
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / d;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) a(i, j) = 0.0;
    return a;
}

// solve L L^T X = B for X, B is n x m
inline Matrix cholesky_solve(const Matrix& l, Matrix b) {
    const int n = l.rows, m = b.cols;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) {
            double s = b(i, j);
            for (int k = 0; k < i; ++k) s -= l(i, k) * b(k, j);
            b(i, j) = s / l(i, i);
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = b(i, j);
            for (int k = i + 1; k < n; ++k) s -= l(k, i) * b(k, j);
            b(i, j) = s / l(i, i);
        }
    }
    return b;
}

}  // namespace detail

inline Matrix least_squares(const Matrix& x, const Matrix& y) {
    if (x.rows != y.rows) throw ShapeError("least_squares: x and y row counts differ");
    if (x.rows < x.cols) throw InvalidInputError("least_squares: underdetermined system");
    Matrix xtx = matmul(transpose(x), x);
    Matrix xty = matmul(transpose(x), y);
    Matrix l = detail::cholesky(std::move(xtx));  // throws SingularSystemError if rank-deficient
    Matrix w_t = detail::cholesky_solve(l, std::move(xty));  // Nx x Ny
    return transpose(w_t);
}

}  // namespace metadyn
