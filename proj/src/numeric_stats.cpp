#include "embedgeom/numeric_stats.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace embedgeom::stats {
namespace {

constexpr double kBetaEps = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kBetaMaxIter = 20000;

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kBetaMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kBetaEps) return h;
    }
    return h;
}

// Solves the small dense system in place by Gaussian elimination with
// partial pivoting. Returns false when a pivot vanishes relative to the
// largest diagonal entry.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t p) {
    double scale = 0.0;
    for (std::size_t i = 0; i < p; ++i) scale = std::max(scale, std::abs(a[i * p + i]));
    if (scale == 0.0) return false;
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(a[r * p + col]) > std::abs(a[piv * p + col])) piv = r;
        }
        if (std::abs(a[piv * p + col]) <= 1e-13 * scale) return false;
        if (piv != col) {
            for (std::size_t j = 0; j < p; ++j) std::swap(a[col * p + j], a[piv * p + j]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < p; ++r) {
            const double f = a[r * p + col] / a[col * p + col];
            for (std::size_t j = col; j < p; ++j) a[r * p + j] -= f * a[col * p + j];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = p; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < p; ++j) s -= a[i * p + j] * b[j];
        b[i] = s / a[i * p + i];
    }
    return true;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

template <typename T>
std::vector<std::pair<double, Eigen::VectorXd>> sorted_eigen(MatrixView<T> points, bool center) {
    const auto cov = kernels::omp::covariance(points, center);
    const auto d = static_cast<Eigen::Index>(points.cols);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
        cov.cov.values().data(), d, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
    if (solver.info() != Eigen::Success) {
        throw DegenerateInput("covariance eigendecomposition did not converge");
    }
    std::vector<std::pair<double, Eigen::VectorXd>> out;
    out.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index i = d; i-- > 0;) {
        out.emplace_back(std::max(0.0, solver.eigenvalues()(i)), solver.eigenvectors().col(i));
    }
    return out;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw DegenerateInput("incomplete_beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_upper_tail(double f, double df_num, double df_den) {
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    const double x = df_den / (df_den + df_num * f);
    return incomplete_beta(0.5 * df_den, 0.5 * df_num, x);
}

double t_upper_tail(double t, double df) {
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    if (t == 0.0) return 0.5;
    const double half = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    return t > 0.0 ? half : 1.0 - half;
}

double PolyFit::operator()(double x) const {
    double y = 0.0;
    for (std::size_t i = coefficients.size(); i-- > 0;) y = y * x + coefficients[i];
    return y;
}

PolyFit polyfit(std::span<const double> xs, std::span<const double> ys, int degree) {
    if (xs.size() != ys.size()) throw ConsistencyError("polyfit: xs and ys differ in length");
    if (degree < 0) throw DegenerateInput("polyfit: negative degree");
    const std::size_t n = xs.size();
    const auto p = static_cast<std::size_t>(degree) + 1;
    if (n < p + 1) {
        throw InsufficientData("polyfit: degree " + std::to_string(degree) + " needs at least " +
                               std::to_string(p + 1) + " points, got " + std::to_string(n));
    }

    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (!(sd > 0.0)) throw DegenerateInput("polyfit: all abscissae are identical");

    // Normal equations on the standardized abscissa z = (x - mean) / sd.
    std::vector<double> ata(p * p, 0.0);
    std::vector<double> aty(p, 0.0);
    std::vector<double> powers(2 * p - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (xs[i] - mean) / sd;
        powers[0] = 1.0;
        for (std::size_t k = 1; k < powers.size(); ++k) powers[k] = powers[k - 1] * z;
        for (std::size_t r = 0; r < p; ++r) {
            aty[r] += powers[r] * ys[i];
            for (std::size_t c = 0; c < p; ++c) ata[r * p + c] += powers[r + c];
        }
    }
    if (!solve_dense(ata, aty, p)) {
        throw DegenerateInput("polyfit: design matrix is rank deficient");
    }
    const std::vector<double>& scaled = aty;

    PolyFit fit;
    fit.degree = degree;
    fit.coefficients.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        const double bj = scaled[j] / std::pow(sd, static_cast<double>(j));
        for (std::size_t i = 0; i <= j; ++i) {
            fit.coefficients[i] += bj * binomial(static_cast<int>(j), static_cast<int>(i)) *
                                   std::pow(-mean, static_cast<double>(j - i));
        }
    }

    double ybar = 0.0;
    for (double y : ys) ybar += y;
    ybar /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = (xs[i] - mean) / sd;
        double pred = 0.0;
        for (std::size_t k = p; k-- > 0;) pred = pred * z + scaled[k];
        fit.ss_res += (ys[i] - pred) * (ys[i] - pred);
        fit.ss_total += (ys[i] - ybar) * (ys[i] - ybar);
    }
    fit.r_squared = fit.ss_total > 0.0 ? 1.0 - fit.ss_res / fit.ss_total : 1.0;
    return fit;
}

FTestResult nested_f_test(double ss_lin, double ss_quad, int n, double perfect_threshold) {
    if (n < 4) throw InsufficientData("nested F-test needs at least 4 points, got " + std::to_string(n));
    if (!(ss_lin >= 0.0) || !(ss_quad >= 0.0)) throw DegenerateInput("nested F-test: negative residual sum");

    FTestResult out;
    out.df_num = 1;
    out.df_den = n - 3;
    double gain = ss_lin - ss_quad;
    if (gain < 0.0) {
        const double eps = 1e-9 * std::max(ss_lin, 1e-300) + 1e-15;
        if (-gain > eps) throw DegenerateInput("nested F-test: quadratic fit worse than linear");
        gain = 0.0;
    }
    if (ss_quad <= perfect_threshold) {
        if (gain <= perfect_threshold) {
            out.f_stat = 0.0;
            out.p_value = 1.0;
        } else {
            out.f_stat = std::numeric_limits<double>::infinity();
            out.p_value = 0.0;
            out.perfect_fit = true;
        }
        return out;
    }
    out.f_stat = gain / (ss_quad / out.df_den);
    out.p_value = f_upper_tail(out.f_stat, out.df_num, out.df_den);
    return out;
}

TTestResult t_test_one_sided(std::span<const double> values) {
    const std::size_t m = values.size();
    if (m < 2) throw InsufficientData("t-test needs at least 2 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(m - 1));
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    // Rounding alone leaves a spread of a few ulps on identical values.
    if (!(sd > 1e-13 * scale)) throw DegenerateInput("t-test: zero sample variance");
    TTestResult out;
    out.t_stat = mean / (sd / std::sqrt(static_cast<double>(m)));
    out.p_value = t_upper_tail(out.t_stat, static_cast<double>(m - 1));
    return out;
}

double aic(double ss_res, int n, int n_params) {
    if (n <= 0) throw InsufficientData("aic: n must be positive");
    if (!(ss_res > 0.0)) throw DegenerateInput("aic: residual sum must be positive");
    return n * std::log(ss_res / n) + 2.0 * n_params;
}

template <typename T>
PcaResult pca_top(MatrixView<T> points, std::size_t n_components, bool center) {
    if (points.rows < 2) throw InsufficientData("PCA needs at least 2 rows");
    if (n_components > std::min(points.rows, points.cols)) {
        throw InsufficientData("PCA: more components requested than min(rows, cols)");
    }
    const auto eig = sorted_eigen(points, center);
    double total = 0.0;
    for (const auto& e : eig) total += e.first;
    if (!(total > 0.0)) throw DegenerateInput("PCA: zero total variance");

    PcaResult out{Matrix<double>(n_components, points.cols), {}};
    for (std::size_t c = 0; c < n_components; ++c) {
        const auto& vec = eig[c].second;
        std::size_t arg = 0;
        for (std::size_t j = 1; j < points.cols; ++j) {
            if (std::abs(vec(static_cast<Eigen::Index>(j))) > std::abs(vec(static_cast<Eigen::Index>(arg)))) arg = j;
        }
        const double sign = vec(static_cast<Eigen::Index>(arg)) < 0.0 ? -1.0 : 1.0;
        const double norm = vec.norm();
        for (std::size_t j = 0; j < points.cols; ++j) {
            out.axes(c, j) = sign * vec(static_cast<Eigen::Index>(j)) / norm;
        }
        out.explained_variance_ratio.push_back(eig[c].first / total);
    }
    return out;
}

template <typename T>
std::vector<double> pca_spectrum(MatrixView<T> points, bool center) {
    if (points.rows < 2) throw InsufficientData("PCA needs at least 2 rows");
    const auto eig = sorted_eigen(points, center);
    std::vector<double> out;
    out.reserve(eig.size());
    for (const auto& e : eig) out.push_back(e.first);
    return out;
}

template PcaResult pca_top<float>(MatrixView<float>, std::size_t, bool);
template PcaResult pca_top<double>(MatrixView<double>, std::size_t, bool);
template std::vector<double> pca_spectrum<float>(MatrixView<float>, bool);
template std::vector<double> pca_spectrum<double>(MatrixView<double>, bool);

double percentile(std::span<const double> values, double q) {
    if (values.empty()) throw InsufficientData("percentile of an empty sample");
    if (!(q >= 0.0 && q <= 100.0)) throw DegenerateInput("percentile: q outside [0, 100]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace embedgeom::stats
