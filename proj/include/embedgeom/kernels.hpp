#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial` is the
// reference implementation and `omp` the OpenMP one used by the library.
// Each output element is produced by exactly one iteration with a fixed
// accumulation order, so the two variants agree bit-for-bit for any
// thread count.

#include "embedgeom/matrix.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace embedgeom::kernels {

struct NearestResult {
    std::vector<std::uint32_t> labels;
    std::vector<double> sq_dist;
};

/// Covariance (or uncentered second moment) with divisor n - 1.
struct Covariance {
    Matrix<double> cov;
    std::vector<double> mean;
};

using IndexPair = std::pair<std::size_t, std::size_t>;

namespace serial {

template <typename T>
std::vector<double> row_norms(MatrixView<T> points);

// Ties resolve to the lower centroid index.
template <typename T>
NearestResult nearest_centroid(MatrixView<T> points, MatrixView<double> centroids);

// points.rows x targets.rows cosines; a zero-norm row yields 0.
template <typename T>
Matrix<double> cosine_matrix(MatrixView<T> points, MatrixView<double> targets);

// Mean Euclidean distance to the k nearest reference rows. When `exclude`
// is non-empty, exclude[i] names a reference row skipped for query i
// (leave-one-out); SIZE_MAX skips nothing.
template <typename T>
std::vector<double> knn_mean_distance(MatrixView<T> queries, MatrixView<T> reference,
                                      std::size_t k, std::span<const std::size_t> exclude);

template <typename T>
Covariance covariance(MatrixView<T> points, bool center);

template <typename T>
std::vector<double> pair_cosines(MatrixView<T> points, std::span<const IndexPair> pairs);

}  // namespace serial

namespace omp {

template <typename T>
std::vector<double> row_norms(MatrixView<T> points);

// Ties resolve to the lower centroid index.
template <typename T>
NearestResult nearest_centroid(MatrixView<T> points, MatrixView<double> centroids);

// points.rows x targets.rows cosines; a zero-norm row yields 0.
template <typename T>
Matrix<double> cosine_matrix(MatrixView<T> points, MatrixView<double> targets);

// Mean Euclidean distance to the k nearest reference rows. When `exclude`
// is non-empty, exclude[i] names a reference row skipped for query i
// (leave-one-out); SIZE_MAX skips nothing.
template <typename T>
std::vector<double> knn_mean_distance(MatrixView<T> queries, MatrixView<T> reference,
                                      std::size_t k, std::span<const std::size_t> exclude);

template <typename T>
Covariance covariance(MatrixView<T> points, bool center);

template <typename T>
std::vector<double> pair_cosines(MatrixView<T> points, std::span<const IndexPair> pairs);

}  // namespace omp

/// Worker count used by the omp kernels.
int max_threads();
void set_max_threads(int n);

}  // namespace embedgeom::kernels
