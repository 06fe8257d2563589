#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "metadyn/numerics.hpp"

using namespace metadyn;

namespace {

Matrix random_matrix(int rows, int cols, RngStream& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.gaussian();
    return m;
}

double orthonormality_error(const Matrix& u) {
    Matrix g = matmul(transpose(u), u);
    Matrix id = Matrix::identity(u.cols);
    return max_abs_diff(g, id);
}

}  // namespace

TEST_CASE("svd identity and diagonal cases") {
    SvdResult f = svd(Matrix::identity(2));
    CHECK(max_abs_diff(f.u, Matrix::identity(2)) < 1e-14);
    CHECK(max_abs_diff(f.v, Matrix::identity(2)) < 1e-14);
    CHECK(f.s[0] == Catch::Approx(1.0));
    CHECK(f.s[1] == Catch::Approx(1.0));

    Matrix d(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 0.5;
    SvdResult fd = svd(d);
    CHECK(fd.s[0] == Catch::Approx(3.0).margin(1e-12));
    CHECK(fd.s[1] == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("svd reconstruction and orthonormality on random matrices") {
    RngStream rng(11, 0);
    for (int trial = 0; trial < 200; ++trial) {
        int rows = 1 + int(rng.uniform_index(5));
        int cols = 1 + int(rng.uniform_index(5));
        Matrix m = random_matrix(rows, cols, rng);
        SvdResult f = svd(m);
        CHECK(max_abs_diff(svd_compose(f.u, f.s, f.v), m) < 1e-10);
        CHECK(orthonormality_error(f.u) < 1e-10);
        CHECK(orthonormality_error(f.v) < 1e-10);
        for (std::size_t k = 0; k + 1 < f.s.size(); ++k) CHECK(f.s[k] >= f.s[k + 1]);
        for (double s : f.s) CHECK(s >= 0.0);
    }
}

TEST_CASE("svd spectrum substitution round trip") {
    RngStream rng(12, 0);
    Vec spectrum{3.0, 1.2, 0.06};
    Matrix g = random_matrix(3, 3, rng);
    SvdResult f = svd(g);
    Matrix w = svd_compose(f.u, spectrum, f.v);
    SvdResult f2 = svd(w);
    for (int k = 0; k < 3; ++k) CHECK(f2.s[k] == Catch::Approx(spectrum[k]).margin(1e-10));
}

TEST_CASE("svd rejects bad input") {
    Matrix m(2, 2);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(svd(m), InvalidInputError);
    CHECK_THROWS_AS(svd(Matrix(33, 2)), InvalidInputError);
}

TEST_CASE("svd rank deficient matrix keeps factors orthonormal") {
    Matrix m(3, 3);
    // rank one
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = (i + 1.0) * (j + 1.0);
    SvdResult f = svd(m);
    CHECK(orthonormality_error(f.u) < 1e-10);
    CHECK(orthonormality_error(f.v) < 1e-10);
    CHECK(max_abs_diff(svd_compose(f.u, f.s, f.v), m) < 1e-10);
    CHECK(f.s[1] < 1e-10);
}

TEST_CASE("dft of constant signal is DC only") {
    Vec x(40, 1.0);
    ComplexSpectrum spec = dft_real(x);
    CHECK(spec.coefficients[0].real() == Catch::Approx(1.0).margin(1e-14));
    CHECK(spec.coefficients[0].imag() == Catch::Approx(0.0).margin(1e-14));
    for (std::size_t k = 1; k < spec.coefficients.size(); ++k)
        CHECK(std::abs(spec.coefficients[k]) < 1e-13);
}

TEST_CASE("dft of a single tone lands on -0.5i") {
    const int n = 40;
    Vec x(n);
    for (int t = 0; t < n; ++t) x[t] = std::sin(2.0 * M_PI * t / n);
    ComplexSpectrum spec = dft_real(x);
    CHECK(spec.coefficients[1].real() == Catch::Approx(0.0).margin(1e-13));
    CHECK(spec.coefficients[1].imag() == Catch::Approx(-0.5).margin(1e-13));
    for (std::size_t k = 0; k < spec.coefficients.size(); ++k) {
        if (k == 1) continue;
        CHECK(std::abs(spec.coefficients[k]) < 1e-13);
    }
}

TEST_CASE("dft matches an independent direct summation") {
    RngStream rng(13, 0);
    Vec x(40);
    for (double& v : x) v = rng.gaussian();
    ComplexSpectrum spec = dft_real(x);
    for (int k = 0; k <= 20; ++k) {
        std::complex<double> acc = 0.0;
        for (int t = 0; t < 40; ++t)
            acc += x[t] * std::exp(std::complex<double>(0.0, -2.0 * M_PI * k * t / 40.0));
        acc /= 40.0;
        CHECK(std::abs(spec.coefficients[k] - acc) < 1e-12);
    }
}

TEST_CASE("dft round trips through the inverse") {
    RngStream rng(14, 0);
    Vec x(40);
    for (double& v : x) v = rng.gaussian();
    Vec back = idft_real(dft_real(x));
    for (int t = 0; t < 40; ++t) CHECK(back[t] == Catch::Approx(x[t]).margin(1e-10));
}

TEST_CASE("dft rejects odd or tiny lengths") {
    CHECK_THROWS_AS(dft_real(Vec{1.0}), InvalidInputError);
    CHECK_THROWS_AS(dft_real(Vec{1.0, 2.0, 3.0}), InvalidInputError);
}

TEST_CASE("gaussian matrix sampling moments") {
    RngStream rng(15, 0);
    const int draws = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < draws / 4; ++i) {
        Matrix m = sample_gaussian_matrix(2, 2, 1.0, rng);
        for (double v : m.data) {
            sum += v;
            sumsq += v * v;
        }
    }
    double mean = sum / draws;
    CHECK(mean > -0.02);
    CHECK(mean < 0.02);

    CHECK_THROWS_AS(sample_gaussian_matrix(2, 2, 0.0, rng), InvalidInputError);

    // larger-scale regime: entry variance tracks scale^2
    sum = sumsq = 0.0;
    for (int i = 0; i < draws / 4; ++i) {
        Matrix m = sample_gaussian_matrix(2, 2, 10.0, rng);
        for (double v : m.data) {
            sum += v;
            sumsq += v * v;
        }
    }
    double var = sumsq / draws - (sum / draws) * (sum / draws);
    CHECK(var == Catch::Approx(100.0).margin(2.0));
}

TEST_CASE("truncated normal respects its bound") {
    RngStream rng(16, 0);
    for (int i = 0; i < 10000; ++i) {
        CHECK(std::abs(sample_truncated_normal(0.1, rng)) <= 0.2);
        CHECK(std::abs(sample_truncated_normal(1.0 / std::sqrt(5.0), rng)) <=
              2.0 / std::sqrt(5.0));
    }
    CHECK_THROWS_AS(sample_truncated_normal(0.0, rng), InvalidInputError);
}

TEST_CASE("truncated normal empirical std matches the truncated density") {
    // std of N(0, sigma^2) truncated at 2 sigma is ~0.8796 sigma
    RngStream rng(17, 0);
    const int draws = 1000000;
    double sumsq = 0.0;
    for (int i = 0; i < draws; ++i) {
        double x = sample_truncated_normal(1.0, rng);
        sumsq += x * x;
    }
    CHECK(std::sqrt(sumsq / draws) == Catch::Approx(0.88).margin(0.01));
}

TEST_CASE("least squares recovers exact and closed-form solutions") {
    RngStream rng(18, 0);
    Matrix w0 = random_matrix(3, 4, rng);
    Matrix x = random_matrix(20, 4, rng);
    Matrix y = matmul(x, transpose(w0));
    Matrix w = least_squares(x, y);
    CHECK(max_abs_diff(w, w0) < 1e-10);

    Matrix zero_y(20, 3);
    CHECK(frobenius_norm(least_squares(x, zero_y)) < 1e-12);

    // noisy scalar case: w = sum(x y) / sum(x^2)
    Matrix xs(50, 1), ys(50, 1);
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 50; ++i) {
        xs(i, 0) = rng.gaussian();
        ys(i, 0) = 2.0 * xs(i, 0) + 0.1 * rng.gaussian();
        sxy += xs(i, 0) * ys(i, 0);
        sxx += xs(i, 0) * xs(i, 0);
    }
    Matrix ws = least_squares(xs, ys);
    CHECK(ws(0, 0) == Catch::Approx(sxy / sxx).margin(1e-12));
}

TEST_CASE("least squares flags rank deficiency") {
    Matrix x(10, 2);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = i + 1.0;
        x(i, 1) = 2.0 * (i + 1.0);  // duplicate direction
    }
    Matrix y(10, 1, 1.0);
    CHECK_THROWS_AS(least_squares(x, y), SingularSystemError);
    CHECK_THROWS_AS(least_squares(Matrix(1, 2, 1.0), Matrix(1, 1, 1.0)), InvalidInputError);
}

TEST_CASE("rng streams replay bit-identically") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
    RngStream c(42, 7), d(42, 8);
    int same = 0;
    for (int i = 0; i < 1000; ++i)
        if (c.next_u64() == d.next_u64()) ++same;
    CHECK(same == 0);
    // gaussian path replays too (spare-value caching included)
    RngStream e(42, 9), f(42, 9);
    for (int i = 0; i < 1001; ++i) REQUIRE(e.gaussian() == f.gaussian());
}

TEST_CASE("rng substreams look independent") {
    RngStream root(7, 0);
    RngStream s1 = root.substream(1);
    RngStream s2 = root.substream(2);
    double corr = 0.0, m1 = 0.0, m2 = 0.0, v1 = 0.0, v2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double x = s1.uniform(), y = s2.uniform();
        m1 += x;
        m2 += y;
        corr += x * y;
        v1 += x * x;
        v2 += y * y;
    }
    m1 /= n;
    m2 /= n;
    double cov = corr / n - m1 * m2;
    double sd1 = std::sqrt(v1 / n - m1 * m1), sd2 = std::sqrt(v2 / n - m2 * m2);
    CHECK(std::abs(cov / (sd1 * sd2)) < 0.02);
    CHECK(m1 == Catch::Approx(0.5).margin(0.005));
    CHECK(m2 == Catch::Approx(0.5).margin(0.005));
}
