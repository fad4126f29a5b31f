#pragma once

#include "embedgeom/embedding_store.hpp"
#include "embedgeom/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace embedgeom {

struct KMeansConfig {
    std::size_t k = 40;
    std::size_t batch_size = 1024;
    std::size_t n_init = 5;
    std::uint64_t seed = 42;
    std::size_t max_epochs = 100;
    double tolerance = 1e-4;  // relative full-data inertia improvement
};

/// Fitted k-means structure: centroids (stored at f32 precision, matching
/// the on-disk format) and per-token nearest-centroid assignments.
struct ClusterModel {
    std::size_t k = 0;
    Matrix<double> centroids;
    std::vector<std::uint32_t> assignments;
    double inertia = 0.0;
    std::uint64_t seed = 0;
    /// Full-data inertia at each accepted epoch boundary of the winning run.
    std::vector<double> inertia_history;

    std::size_t dim() const { return centroids.cols(); }
    /// Token indices per cluster, ascending.
    std::vector<std::vector<std::size_t>> members() const;
};

/// Mini-batch k-means with k-means++ initialization, best of `n_init` runs by
/// final full-data inertia. Throws InsufficientData when V < k or k < 2.
ClusterModel fit_minibatch_kmeans(const EmbeddingStore& store, const KMeansConfig& config = {});
ClusterModel fit_minibatch_kmeans(MatrixView<float> points, const KMeansConfig& config = {});

/// Model whose centroids are the member means of the given labels.
ClusterModel model_from_assignments(MatrixView<float> points, std::span<const std::uint32_t> labels, std::size_t k);

/// Nearest-centroid labels for arbitrary rows.
std::vector<std::uint32_t> assign(MatrixView<float> points, const ClusterModel& model);

struct MembershipScore {
    double h = 0.0;        // mean of the top-m centroid cosines
    double max_sim = 0.0;
    std::size_t argmax_cluster = 0;
};

/// Throws DegenerateInput for a zero vector, InsufficientData when top_m is
/// outside [1, k].
MembershipScore soft_membership(std::span<const float> v, const ClusterModel& model, std::size_t top_m = 5);

/// Same as soft_membership applied to a precomputed row of centroid cosines.
MembershipScore membership_from_cosines(std::span<const double> cosines, std::size_t top_m);

/// k x k pairwise centroid cosines with unit diagonal.
Matrix<double> centroid_cosine_matrix(const ClusterModel& model);

/// `<prefix>.clusters.json`, `<prefix>.centroids.bin` (f32le), `<prefix>.assign.bin` (u32le).
void save_cluster_model(const ClusterModel& model, const std::filesystem::path& prefix);
ClusterModel load_cluster_model(const std::filesystem::path& prefix);

}  // namespace embedgeom
