#include "oracles.hpp"
#include "special_grid.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/numeric_stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace embedgeom;
using namespace embedgeom::stats;

TEST_CASE("quadrature oracle reproduces the frozen grid") {
    for (const auto& p : grid::kF) {
        CAPTURE(p.f);
        CHECK(std::abs(oracle::f_upper_tail(p.f, p.df_num, p.df_den) - p.expected) < 1e-9);
    }
    for (const auto& p : grid::kT) {
        CAPTURE(p.t);
        CHECK(std::abs(oracle::t_upper_tail(p.t, p.df) - p.expected) < 1e-9);
    }
}

TEST_CASE("F and t upper tails match the oracle to 1e-6") {
    for (const auto& p : grid::kF) {
        CAPTURE(p.f);
        CAPTURE(p.df_num);
        CAPTURE(p.df_den);
        CHECK(std::abs(f_upper_tail(p.f, p.df_num, p.df_den) - oracle::f_upper_tail(p.f, p.df_num, p.df_den)) < 1e-6);
    }
    for (const auto& p : grid::kT) {
        CAPTURE(p.t);
        CAPTURE(p.df);
        CHECK(std::abs(t_upper_tail(p.t, p.df) - oracle::t_upper_tail(p.t, p.df)) < 1e-6);
    }
}

TEST_CASE("textbook critical values") {
    CHECK(std::abs(f_upper_tail(4.08, 1, 40) - 0.050) < 2e-3);
    CHECK(std::abs(t_upper_tail(1.684, 40) - 0.050) < 2e-3);
    CHECK(f_upper_tail(0.0, 1, 10) == 1.0);
    CHECK(f_upper_tail(std::numeric_limits<double>::infinity(), 1, 10) == 0.0);
    CHECK(t_upper_tail(0.0, 7) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("incomplete beta edge values and symmetry") {
    CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1, 1) = x and I_x(a, b) = 1 - I_{1-x}(b, a).
    CHECK(incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-13));
    CHECK(incomplete_beta(2.5, 0.5, 0.3) == doctest::Approx(1.0 - incomplete_beta(0.5, 2.5, 0.7)).epsilon(1e-12));
}

TEST_CASE("F tail decreases in the statistic") {
    double prev = 1.0;
    for (double f = 0.0; f < 50.0; f += 0.25) {
        const double p = f_upper_tail(f, 1, 17);
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("polyfit on constant and exact data") {
    const std::vector<double> xs{0.5, 1.0, 2.0, 3.5, 4.0};
    SUBCASE("constant") {
        const std::vector<double> ys(xs.size(), 7.0);
        const auto f = polyfit(xs, ys, 1);
        REQUIRE(f.coefficients.size() == 2);
        CHECK(f.coefficients[0] == doctest::Approx(7.0).epsilon(1e-14));
        CHECK(std::abs(f.coefficients[1]) < 1e-13);
        CHECK(f.ss_res < 1e-24);
        CHECK(f.r_squared == 1.0);
    }
    SUBCASE("exact quadratic 2x^2 + 3x + 1") {
        std::vector<double> ys;
        for (double x : xs) ys.push_back(2 * x * x + 3 * x + 1);
        const auto f = polyfit(xs, ys, 2);
        CHECK(std::abs(f.coefficients[0] - 1.0) < 1e-8);
        CHECK(std::abs(f.coefficients[1] - 3.0) < 1e-8);
        CHECK(std::abs(f.coefficients[2] - 2.0) < 1e-8);
        CHECK(f.ss_res <= 1e-12);
        CHECK(f(1.5) == doctest::Approx(2 * 2.25 + 4.5 + 1));
    }
}

TEST_CASE("polyfit matches the normal-equations oracle on noisy data") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::normal_distribution<double> g(0.0, 2.0);
    std::vector<double> xs(50), ys(50);
    for (int i = 0; i < 50; ++i) {
        xs[i] = u(rng);
        ys[i] = 0.7 * xs[i] * xs[i] - 3 * xs[i] + 4 + g(rng);
    }
    for (int degree : {1, 2, 3}) {
        const auto fit = polyfit(xs, ys, degree);
        const auto ref = oracle::normal_equations_fit(xs, ys, degree);
        REQUIRE(fit.coefficients.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            CHECK(fit.coefficients[i] == doctest::Approx(ref[i]).epsilon(1e-8));
        }
        // Residuals are orthogonal to every design column.
        for (int e = 0; e <= degree; ++e) {
            double dot = 0.0, scale = 0.0;
            for (int i = 0; i < 50; ++i) {
                const double col = std::pow(xs[i], e);
                dot += (ys[i] - fit(xs[i])) * col;
                scale += col * col;
            }
            CHECK(std::abs(dot) / std::sqrt(scale) < 1e-6);
        }
        double ss = 0.0, mean = 0.0;
        for (double y : ys) mean += y / 50;
        for (int i = 0; i < 50; ++i) ss += (ys[i] - fit(xs[i])) * (ys[i] - fit(xs[i]));
        CHECK(fit.ss_res == doctest::Approx(ss).epsilon(1e-9));
        double sst = 0.0;
        for (double y : ys) sst += (y - mean) * (y - mean);
        CHECK(fit.r_squared == doctest::Approx(1.0 - ss / sst).epsilon(1e-9));
    }
    CHECK(polyfit(xs, ys, 2).ss_res <= polyfit(xs, ys, 1).ss_res);
}

TEST_CASE("polyfit stays accurate in a narrow abscissa band") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 40; ++i) {
        const double x = 1000.0 + 0.01 * i;
        xs.push_back(x);
        ys.push_back(-10 * (x - 1000.1) * (x - 1000.1) + 5);
    }
    const auto f = polyfit(xs, ys, 2);
    CHECK(f.coefficients[2] == doctest::Approx(-10.0).epsilon(1e-6));
}

TEST_CASE("polyfit errors") {
    const std::vector<double> same{2.0, 2.0, 2.0, 2.0, 2.0};
    const std::vector<double> ys{1, 2, 3, 4, 5};
    CHECK_THROWS_AS(polyfit(same, ys, 1), DegenerateInput);
    const std::vector<double> three{1, 2, 3};
    CHECK_THROWS_AS(polyfit(three, std::vector<double>{1, 2, 3}, 2), InsufficientData);
}

TEST_CASE("nested F-test") {
    SUBCASE("no improvement") {
        const auto r = nested_f_test(3.5, 3.5, 12);
        CHECK(r.f_stat == 0.0);
        CHECK(r.p_value == 1.0);
        CHECK(r.df_num == 1);
        CHECK(r.df_den == 9);
    }
    SUBCASE("formula") {
        const auto r = nested_f_test(10.0, 4.0, 23);
        CHECK(r.f_stat == doctest::Approx(6.0 / (4.0 / 20.0)));
        CHECK(r.p_value == doctest::Approx(f_upper_tail(30.0, 1, 20)).epsilon(1e-12));
    }
    SUBCASE("perfect quadratic") {
        const auto r = nested_f_test(5.0, 0.0, 10);
        CHECK(std::isinf(r.f_stat));
        CHECK(r.p_value == 0.0);
        CHECK(r.perfect_fit);
    }
    SUBCASE("tiny negative gain is clamped") {
        const auto r = nested_f_test(1.0, 1.0 + 1e-13, 10);
        CHECK(r.f_stat == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("too few bins") { CHECK_THROWS_AS(nested_f_test(2.0, 1.0, 3), InsufficientData); }
}

TEST_CASE("one-sided t-test") {
    const std::vector<double> sym{-1.0, 1.0};
    const auto r = t_test_one_sided(sym);
    CHECK(r.t_stat == 0.0);
    CHECK(r.p_value == doctest::Approx(0.5).epsilon(1e-14));

    const std::vector<double> v{0.2, 0.5, 0.1, 0.4, 0.3};
    const double mean = 0.3, sd = std::sqrt(0.1 / 4);
    const auto s = t_test_one_sided(v);
    CHECK(s.t_stat == doctest::Approx(mean / (sd / std::sqrt(5.0))).epsilon(1e-12));
    CHECK(s.p_value == doctest::Approx(oracle::t_upper_tail(s.t_stat, 4)).epsilon(1e-9));

    const std::vector<double> flat{0.4, 0.4, 0.4};
    CHECK_THROWS_AS(t_test_one_sided(flat), DegenerateInput);
    const std::vector<double> one{0.4};
    CHECK_THROWS_AS(t_test_one_sided(one), InsufficientData);
}

TEST_CASE("AIC") {
    CHECK(aic(10.0, 10, 2) == 4.0);
    CHECK(aic(3.7, 25, 4) - aic(3.7, 25, 3) == doctest::Approx(2.0).epsilon(1e-15));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.01, 100.0);
    for (int i = 0; i < 20; ++i) {
        const double ss = u(rng);
        const int n = 5 + i;
        CHECK(std::abs(aic(ss, n, 3) - (n * std::log(ss / n) + 6.0)) < 1e-12);
    }
    CHECK_THROWS_AS(aic(0.0, 10, 2), DegenerateInput);
}

TEST_CASE("PCA on rank-1 data") {
    const std::vector<double> dir{0.6, 0.0, -0.8};
    Matrix<double> m(30, 3);
    for (std::size_t i = 0; i < 30; ++i) {
        const double t = static_cast<double>(i) * 0.37 - 4.0;
        for (std::size_t j = 0; j < 3; ++j) m(i, j) = 1.0 + t * dir[j];
    }
    const auto r = pca_top(m.view(), 2);
    const double c = std::abs(oracle::cosine(&r.axes(0, 0), dir.data(), 3));
    CHECK(c > 1.0 - 1e-6);
    CHECK(r.explained_variance_ratio[0] >= 1.0 - 1e-9);
    // Sign convention: largest-magnitude entry positive.
    CHECK(r.axes(0, 2) > 0.0);
}

TEST_CASE("PCA on a 2-D anisotropic Gaussian matches the closed-form eigenvectors") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    const double angle = 0.6;
    Matrix<double> m(5000, 2);
    for (std::size_t i = 0; i < 5000; ++i) {
        const double a = 3.0 * g(rng), b = 1.0 * g(rng);
        m(i, 0) = std::cos(angle) * a - std::sin(angle) * b;
        m(i, 1) = std::sin(angle) * a + std::cos(angle) * b;
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < 5000; ++i) {
        mx += m(i, 0) / 5000;
        my += m(i, 1) / 5000;
    }
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < 5000; ++i) {
        sxx += (m(i, 0) - mx) * (m(i, 0) - mx) / 4999;
        syy += (m(i, 1) - my) * (m(i, 1) - my) / 4999;
        sxy += (m(i, 0) - mx) * (m(i, 1) - my) / 4999;
    }
    const double tr = sxx + syy, det = sxx * syy - sxy * sxy;
    const double l1 = tr / 2 + std::sqrt(tr * tr / 4 - det);
    const double l2 = tr / 2 - std::sqrt(tr * tr / 4 - det);
    const std::vector<double> v1{sxy, l1 - sxx};
    const std::vector<double> v2{sxy, l2 - sxx};
    const auto r = pca_top(m.view(), 2);
    CHECK(std::abs(oracle::cosine(&r.axes(0, 0), v1.data(), 2)) > 0.999);
    CHECK(std::abs(oracle::cosine(&r.axes(1, 0), v2.data(), 2)) > 0.999);
    CHECK(r.explained_variance_ratio[0] == doctest::Approx(l1 / tr).epsilon(1e-9));
    CHECK(r.explained_variance_ratio[0] + r.explained_variance_ratio[1] == doctest::Approx(1.0).epsilon(1e-12));
    double dot = 0.0, n0 = 0.0;
    for (int j = 0; j < 2; ++j) {
        dot += r.axes(0, j) * r.axes(1, j);
        n0 += r.axes(0, j) * r.axes(0, j);
    }
    CHECK(std::abs(dot) < 1e-6);
    CHECK(n0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("PCA ratios are sorted and bounded") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix<float> m(300, 6);
    for (std::size_t i = 0; i < 300; ++i) {
        for (std::size_t j = 0; j < 6; ++j) m(i, j) = static_cast<float>(g(rng) * (j + 1));
    }
    const auto r = pca_top(m.view(), 4);
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r.explained_variance_ratio[i] >= 0.0);
        CHECK(r.explained_variance_ratio[i] <= 1.0);
        if (i > 0) CHECK(r.explained_variance_ratio[i] <= r.explained_variance_ratio[i - 1]);
        sum += r.explained_variance_ratio[i];
    }
    CHECK(sum <= 1.0 + 1e-12);
    Matrix<double> one(1, 3, std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS(pca_top(one.view(), 1), InsufficientData);
}

TEST_CASE("percentile") {
    const std::vector<double> two{0.0, 10.0};
    CHECK(percentile(two, 50) == 5.0);
    std::vector<double> hundred;
    for (int i = 1; i <= 100; ++i) hundred.push_back(i);
    CHECK(percentile(hundred, 15) == doctest::Approx(15.85).epsilon(1e-14));
    CHECK(percentile(hundred, 0) == 1.0);
    CHECK(percentile(hundred, 100) == 100.0);
    const std::vector<double> deciles{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    CHECK(percentile(deciles, 15) == doctest::Approx(0.235).epsilon(1e-12));
    CHECK_THROWS_AS(percentile(std::vector<double>{}, 50), InsufficientData);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(101), w(101);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = g(rng);
        w[i] = 3.0 * v[i] - 2.0;
    }
    double prev = -1e300;
    for (double q = 0; q <= 100; q += 2.5) {
        const double p = percentile(v, q);
        CHECK(p >= prev);
        prev = p;
        CHECK(p == doctest::Approx(oracle::percentile(v, q)).epsilon(1e-14));
        CHECK(percentile(w, q) == doctest::Approx(3.0 * p - 2.0).epsilon(1e-12));
    }
}
