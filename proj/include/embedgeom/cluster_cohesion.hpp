#pragma once

#include "embedgeom/clustering.hpp"
#include "embedgeom/embedding_store.hpp"

#include <cstdint>
#include <vector>

namespace embedgeom {

enum class BetaVariant { centroid_diff, pairwise };

const char* to_string(BetaVariant v);

struct CohesionConfig {
    std::size_t sample_cap = 300;
    std::uint64_t seed = 42;
    /// Cross-cluster pairs drawn for the pairwise variant's background.
    std::size_t background_pairs = 10000;
};

struct BetaResult {
    BetaVariant variant = BetaVariant::centroid_diff;
    /// One entry per cluster that contributed; `clusters[i]` names its id.
    std::vector<double> per_cluster;
    std::vector<std::size_t> clusters;
    double mean_beta = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    std::size_t sample_cap = 0;
    std::uint64_t seed = 0;
    /// centroid_diff: mean own / other centroid cosine over clusters.
    /// pairwise: mean within-cluster pair cosine / background cosine.
    double mean_own_sim = 0.0;
    double mean_other_sim = 0.0;
};

/// Per-cluster mean of (cosine to own centroid - mean cosine to the other
/// k - 1 centroids) over up to `sample_cap` seeded members, with a one-sided
/// t-test across clusters. Throws ConsistencyError if a cluster is empty.
BetaResult compute_beta_centroid(const EmbeddingStore& store, const ClusterModel& model,
                                 const CohesionConfig& config = {});
BetaResult compute_beta_centroid(MatrixView<float> points, const ClusterModel& model,
                                 const CohesionConfig& config = {});

/// Per-cluster mean pairwise cosine among sampled members minus the mean
/// cosine of seeded random cross-cluster pairs. Clusters with fewer than two
/// sampled members are skipped; InsufficientData if fewer than two remain.
BetaResult compute_beta_pairwise(const EmbeddingStore& store, const ClusterModel& model,
                                 const CohesionConfig& config = {});
BetaResult compute_beta_pairwise(MatrixView<float> points, const ClusterModel& model,
                                 const CohesionConfig& config = {});

}  // namespace embedgeom
