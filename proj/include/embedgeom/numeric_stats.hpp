#pragma once

#include "embedgeom/matrix.hpp"

#include <span>
#include <vector>

namespace embedgeom::stats {

// ---- special functions ----------------------------------------------------

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// P(X > f) for X ~ F(df_num, df_den).
double f_upper_tail(double f, double df_num, double df_den);

/// P(T > t) for T ~ Student-t(df).
double t_upper_tail(double t, double df);

// ---- regression -------------------------------------------------------------

/// Least-squares polynomial. Coefficients are in ascending order (a0, a1, ...).
struct PolyFit {
    int degree = 0;
    std::vector<double> coefficients;
    double ss_res = 0.0;
    double ss_total = 0.0;
    double r_squared = 0.0;

    double operator()(double x) const;
};

/// Throws InsufficientData when n < degree + 2 and DegenerateInput when the
/// abscissae cannot determine a degree-`degree` polynomial.
PolyFit polyfit(std::span<const double> xs, std::span<const double> ys, int degree);

struct FTestResult {
    double f_stat = 0.0;
    double p_value = 1.0;
    int df_num = 1;
    int df_den = 0;
    /// ss_quad was at or below the perfect-fit threshold while ss_lin was not.
    bool perfect_fit = false;
};

/// Nested linear-vs-quadratic F-test with (1, n - 3) degrees of freedom.
/// `perfect_threshold` is the ss_quad value at or below which the quadratic
/// counts as exact (F = +inf, p = 0).
FTestResult nested_f_test(double ss_lin, double ss_quad, int n, double perfect_threshold = 0.0);

struct TTestResult {
    double t_stat = 0.0;
    double p_value = 1.0;
};

/// One-sided one-sample t-test of H0: mean <= 0. Throws InsufficientData
/// for fewer than two values and DegenerateInput for zero variance.
TTestResult t_test_one_sided(std::span<const double> values);

/// Gaussian-likelihood AIC: n ln(ss_res / n) + 2 n_params.
double aic(double ss_res, int n, int n_params);

// ---- PCA ----------------------------------------------------------------------

struct PcaResult {
    Matrix<double> axes;  // n_components x d, orthonormal rows
    std::vector<double> explained_variance_ratio;
};

/// Leading principal axes from the covariance eigendecomposition. Each axis
/// has its largest-magnitude entry made positive.
template <typename T>
PcaResult pca_top(MatrixView<T> points, std::size_t n_components, bool center = true);

/// All covariance eigenvalues, descending, clamped at zero.
template <typename T>
std::vector<double> pca_spectrum(MatrixView<T> points, bool center = true);

// ---- percentiles --------------------------------------------------------------

/// Linear-interpolation percentile, q in [0, 100].
double percentile(std::span<const double> values, double q);

}  // namespace embedgeom::stats
