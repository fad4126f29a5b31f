#include "embedgeom/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace embedgeom;

namespace {

Matrix<float> random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g(0.0f, 1.0f);
    Matrix<float> m(n, d);
    for (auto& v : m.values()) v = g(rng);
    return m;
}

Matrix<double> random_centroids(std::size_t k, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix<double> m(k, d);
    for (auto& v : m.values()) v = g(rng);
    return m;
}

const Matrix<float>& points() {
    static const Matrix<float> p = random_points(20000, 256, 1);
    return p;
}

const Matrix<double>& centroids() {
    static const Matrix<double> c = random_centroids(40, 256, 2);
    return c;
}

template <bool Parallel>
void BM_RowNorms(benchmark::State& state) {
    for (auto _ : state) {
        auto r = Parallel ? kernels::omp::row_norms(points().view()) : kernels::serial::row_norms(points().view());
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points().rows()));
}

template <bool Parallel>
void BM_NearestCentroid(benchmark::State& state) {
    for (auto _ : state) {
        auto r = Parallel ? kernels::omp::nearest_centroid(points().view(), centroids().view())
                          : kernels::serial::nearest_centroid(points().view(), centroids().view());
        benchmark::DoNotOptimize(r.labels.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points().rows()));
}

template <bool Parallel>
void BM_CosineMatrix(benchmark::State& state) {
    for (auto _ : state) {
        auto r = Parallel ? kernels::omp::cosine_matrix(points().view(), centroids().view())
                          : kernels::serial::cosine_matrix(points().view(), centroids().view());
        benchmark::DoNotOptimize(r.values().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points().rows()));
}

template <bool Parallel>
void BM_Covariance(benchmark::State& state) {
    for (auto _ : state) {
        auto r = Parallel ? kernels::omp::covariance(points().view(), true)
                          : kernels::serial::covariance(points().view(), true);
        benchmark::DoNotOptimize(r.cov.values().data());
    }
}

template <bool Parallel>
void BM_KnnDensity(benchmark::State& state) {
    const MatrixView<float> ref{points().view().data, 5000, points().cols()};
    const MatrixView<float> queries{points().view().data, 500, points().cols()};
    for (auto _ : state) {
        auto r = Parallel ? kernels::omp::knn_mean_distance(queries, ref, 10, {})
                          : kernels::serial::knn_mean_distance(queries, ref, 10, {});
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * 500);
}

template <bool Parallel>
void BM_PairCosines(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, points().rows() - 1);
    std::vector<kernels::IndexPair> pairs(100000);
    for (auto& p : pairs) p = {pick(rng), pick(rng)};
    for (auto _ : state) {
        auto r = Parallel ? kernels::omp::pair_cosines(points().view(), std::span<const kernels::IndexPair>(pairs))
                          : kernels::serial::pair_cosines(points().view(), std::span<const kernels::IndexPair>(pairs));
        benchmark::DoNotOptimize(r.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs.size()));
}

}  // namespace

BENCHMARK(BM_RowNorms<false>)->Name("row_norms/serial");
BENCHMARK(BM_RowNorms<true>)->Name("row_norms/omp");
BENCHMARK(BM_NearestCentroid<false>)->Name("nearest_centroid/serial");
BENCHMARK(BM_NearestCentroid<true>)->Name("nearest_centroid/omp");
BENCHMARK(BM_CosineMatrix<false>)->Name("cosine_matrix/serial");
BENCHMARK(BM_CosineMatrix<true>)->Name("cosine_matrix/omp");
BENCHMARK(BM_Covariance<false>)->Name("covariance/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Covariance<true>)->Name("covariance/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnDensity<false>)->Name("knn_density/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnDensity<true>)->Name("knn_density/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairCosines<false>)->Name("pair_cosines/serial");
BENCHMARK(BM_PairCosines<true>)->Name("pair_cosines/omp");

int main(int argc, char** argv) {
    // Build the shared fixtures outside the timed loops.
    points();
    centroids();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
