#include "embedgeom/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <omp.h>

namespace embedgeom::kernels {
namespace {

template <typename A, typename B>
inline double dot(const A* a, const B* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += static_cast<double>(a[j]) * static_cast<double>(b[j]);
    return s;
}

template <typename A, typename B>
inline double sq_distance(const A* a, const B* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        s += diff * diff;
    }
    return s;
}

template <typename T>
inline void nearest_one(MatrixView<T> points, MatrixView<double> centroids, std::size_t i,
                        NearestResult& out) {
    const T* p = points.data + i * points.cols;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t label = 0;
    for (std::size_t c = 0; c < centroids.rows; ++c) {
        const double d = sq_distance(p, centroids.data + c * centroids.cols, points.cols);
        if (d < best) {
            best = d;
            label = static_cast<std::uint32_t>(c);
        }
    }
    out.labels[i] = label;
    out.sq_dist[i] = best;
}

template <typename T>
inline void cosine_row(MatrixView<T> points, MatrixView<double> targets,
                       std::span<const double> target_norms, std::size_t i, Matrix<double>& out) {
    const T* p = points.data + i * points.cols;
    const double pn = std::sqrt(dot(p, p, points.cols));
    for (std::size_t c = 0; c < targets.rows; ++c) {
        const double denom = pn * target_norms[c];
        out(i, c) = denom > 0.0 ? dot(p, targets.data + c * targets.cols, points.cols) / denom : 0.0;
    }
}

template <typename T>
inline double knn_one(MatrixView<T> queries, MatrixView<T> reference, std::size_t k, std::size_t skip,
                      std::size_t i, std::vector<double>& scratch) {
    scratch.clear();
    const T* q = queries.data + i * queries.cols;
    for (std::size_t r = 0; r < reference.rows; ++r) {
        if (r == skip) continue;
        scratch.push_back(sq_distance(q, reference.data + r * reference.cols, queries.cols));
    }
    if (scratch.size() < k || k == 0) return std::numeric_limits<double>::quiet_NaN();
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
    std::sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k));
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::sqrt(scratch[j]);
    return s / static_cast<double>(k);
}

template <typename T>
std::vector<double> column_mean(MatrixView<T> points) {
    std::vector<double> mean(points.cols, 0.0);
    for (std::size_t r = 0; r < points.rows; ++r) {
        const T* p = points.data + r * points.cols;
        for (std::size_t j = 0; j < points.cols; ++j) mean[j] += static_cast<double>(p[j]);
    }
    if (points.rows > 0) {
        for (double& m : mean) m /= static_cast<double>(points.rows);
    }
    return mean;
}

constexpr std::size_t kCovBlock = 64;

// Rank-1 updates of the upper triangle, one block of rows at a time. Each
// entry accumulates rows in ascending order regardless of how `i` is split
// across threads.
template <typename T, bool Parallel>
Covariance covariance_impl(MatrixView<T> points, bool center) {
    const std::size_t d = points.cols;
    Covariance out{Matrix<double>(d, d, 0.0), center ? column_mean(points) : std::vector<double>(d, 0.0)};
    std::vector<double> block(kCovBlock * d);
    double* cov = out.cov.values().data();
    for (std::size_t start = 0; start < points.rows; start += kCovBlock) {
        const std::size_t nb = std::min(kCovBlock, points.rows - start);
        for (std::size_t r = 0; r < nb; ++r) {
            const T* p = points.data + (start + r) * d;
            for (std::size_t j = 0; j < d; ++j) block[r * d + j] = static_cast<double>(p[j]) - out.mean[j];
        }
        const auto n = static_cast<std::ptrdiff_t>(d);
#pragma omp parallel for schedule(dynamic, 4) if (Parallel)
        for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            double* crow = cov + i * d;
            for (std::size_t r = 0; r < nb; ++r) {
                const double* x = block.data() + r * d;
                const double xi = x[i];
                for (std::size_t j = i; j < d; ++j) crow[j] += xi * x[j];
            }
        }
    }
    const double denom = points.rows > 1 ? static_cast<double>(points.rows - 1) : 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            cov[i * d + j] /= denom;
            cov[j * d + i] = cov[i * d + j];
        }
    }
    return out;
}

template <typename T>
std::vector<double> target_norms(MatrixView<T> targets) {
    std::vector<double> n(targets.rows);
    for (std::size_t c = 0; c < targets.rows; ++c) {
        const T* t = targets.data + c * targets.cols;
        n[c] = std::sqrt(dot(t, t, targets.cols));
    }
    return n;
}

template <typename T>
inline double pair_cosine(MatrixView<T> points, const IndexPair& pr) {
    const T* a = points.data + pr.first * points.cols;
    const T* b = points.data + pr.second * points.cols;
    const double denom = std::sqrt(dot(a, a, points.cols)) * std::sqrt(dot(b, b, points.cols));
    return denom > 0.0 ? dot(a, b, points.cols) / denom : 0.0;
}

inline std::size_t skip_for(std::span<const std::size_t> exclude, std::size_t i) {
    return exclude.empty() ? std::numeric_limits<std::size_t>::max() : exclude[i];
}

}  // namespace

// ---------------------------------------------------------------------------
// serial reference

namespace serial {

template <typename T>
std::vector<double> row_norms(MatrixView<T> points) {
    std::vector<double> out(points.rows);
    for (std::size_t i = 0; i < points.rows; ++i) {
        const T* p = points.data + i * points.cols;
        out[i] = std::sqrt(dot(p, p, points.cols));
    }
    return out;
}

template <typename T>
NearestResult nearest_centroid(MatrixView<T> points, MatrixView<double> centroids) {
    NearestResult out{std::vector<std::uint32_t>(points.rows), std::vector<double>(points.rows)};
    for (std::size_t i = 0; i < points.rows; ++i) nearest_one(points, centroids, i, out);
    return out;
}

template <typename T>
Matrix<double> cosine_matrix(MatrixView<T> points, MatrixView<double> targets) {
    Matrix<double> out(points.rows, targets.rows);
    const auto tn = target_norms(targets);
    for (std::size_t i = 0; i < points.rows; ++i) cosine_row(points, targets, tn, i, out);
    return out;
}

template <typename T>
std::vector<double> knn_mean_distance(MatrixView<T> queries, MatrixView<T> reference, std::size_t k,
                                      std::span<const std::size_t> exclude) {
    std::vector<double> out(queries.rows);
    std::vector<double> scratch;
    for (std::size_t i = 0; i < queries.rows; ++i) {
        out[i] = knn_one(queries, reference, k, skip_for(exclude, i), i, scratch);
    }
    return out;
}

template <typename T>
Covariance covariance(MatrixView<T> points, bool center) {
    return covariance_impl<T, false>(points, center);
}

template <typename T>
std::vector<double> pair_cosines(MatrixView<T> points, std::span<const IndexPair> pairs) {
    std::vector<double> out(pairs.size());
    for (std::size_t t = 0; t < pairs.size(); ++t) out[t] = pair_cosine(points, pairs[t]);
    return out;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP

namespace omp {

template <typename T>
std::vector<double> row_norms(MatrixView<T> points) {
    std::vector<double> out(points.rows);
    const auto n = static_cast<std::ptrdiff_t>(points.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const T* p = points.data + static_cast<std::size_t>(i) * points.cols;
        out[static_cast<std::size_t>(i)] = std::sqrt(dot(p, p, points.cols));
    }
    return out;
}

template <typename T>
NearestResult nearest_centroid(MatrixView<T> points, MatrixView<double> centroids) {
    NearestResult out{std::vector<std::uint32_t>(points.rows), std::vector<double>(points.rows)};
    const auto n = static_cast<std::ptrdiff_t>(points.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) nearest_one(points, centroids, static_cast<std::size_t>(i), out);
    return out;
}

template <typename T>
Matrix<double> cosine_matrix(MatrixView<T> points, MatrixView<double> targets) {
    Matrix<double> out(points.rows, targets.rows);
    const auto tn = target_norms(targets);
    const auto n = static_cast<std::ptrdiff_t>(points.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) cosine_row(points, targets, tn, static_cast<std::size_t>(i), out);
    return out;
}

template <typename T>
std::vector<double> knn_mean_distance(MatrixView<T> queries, MatrixView<T> reference, std::size_t k,
                                      std::span<const std::size_t> exclude) {
    std::vector<double> out(queries.rows);
    const auto n = static_cast<std::ptrdiff_t>(queries.rows);
#pragma omp parallel
    {
        std::vector<double> scratch;
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            out[i] = knn_one(queries, reference, k, skip_for(exclude, i), i, scratch);
        }
    }
    return out;
}

template <typename T>
Covariance covariance(MatrixView<T> points, bool center) {
    return covariance_impl<T, true>(points, center);
}

template <typename T>
std::vector<double> pair_cosines(MatrixView<T> points, std::span<const IndexPair> pairs) {
    std::vector<double> out(pairs.size());
    const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        out[static_cast<std::size_t>(t)] = pair_cosine(points, pairs[static_cast<std::size_t>(t)]);
    }
    return out;
}

}  // namespace omp

int max_threads() { return omp_get_max_threads(); }

void set_max_threads(int n) {
    if (n > 0) omp_set_num_threads(n);
}

#define EMBEDGEOM_INSTANTIATE(NS, T)                                                              \
    template std::vector<double> NS::row_norms<T>(MatrixView<T>);                                 \
    template NearestResult NS::nearest_centroid<T>(MatrixView<T>, MatrixView<double>);            \
    template Matrix<double> NS::cosine_matrix<T>(MatrixView<T>, MatrixView<double>);              \
    template std::vector<double> NS::knn_mean_distance<T>(MatrixView<T>, MatrixView<T>,           \
                                                          std::size_t, std::span<const std::size_t>); \
    template Covariance NS::covariance<T>(MatrixView<T>, bool);                                   \
    template std::vector<double> NS::pair_cosines<T>(MatrixView<T>, std::span<const IndexPair>);

EMBEDGEOM_INSTANTIATE(serial, float)
EMBEDGEOM_INSTANTIATE(serial, double)
EMBEDGEOM_INSTANTIATE(omp, float)
EMBEDGEOM_INSTANTIATE(omp, double)

}  // namespace embedgeom::kernels
