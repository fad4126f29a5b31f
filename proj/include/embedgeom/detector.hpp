#pragma once

#include "embedgeom/clustering.hpp"
#include "embedgeom/embedding_store.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace embedgeom {

/// Percentiles and sizes used to calibrate the three-tier detector.
struct DetectorConfig {
    std::size_t top_m = 5;
    double q_h = 15.0;
    double q_norm = 40.0;
    double q_maxsim = 10.0;
    double q_jump = 25.0;
    double q_density = 90.0;
    double q_confidence = 50.0;
    std::size_t k_neighbors = 10;
    std::size_t density_sample = 10000;
    std::uint64_t seed = 42;
};

struct DetectionThresholds {
    double theta_h = 0.0;
    double theta_norm = 0.0;
    double theta_maxsim = 0.0;
    double theta_jump = 0.0;
    double theta_density = 0.0;
    /// Max-sim level above which a position counts as high confidence (Tier 2).
    double theta_confidence = 0.0;
    DetectorConfig config;
};

/// Flat seeded subsample of store rows scanned exhaustively for kNN density.
class DensityIndex {
public:
    DensityIndex() = default;
    DensityIndex(Matrix<float> reference, std::vector<std::size_t> rows, std::size_t k_neighbors);
    DensityIndex(DensityIndex&& other) noexcept;
    DensityIndex& operator=(DensityIndex&& other) noexcept;

    const Matrix<float>& reference() const { return reference_; }
    const std::vector<std::size_t>& rows() const { return rows_; }
    std::size_t k_neighbors() const { return k_; }

    double density(std::span<const float> v) const;
    std::vector<double> density(MatrixView<float> queries) const;

    /// Number of query vectors whose density has been evaluated.
    std::size_t evaluations() const { return evaluations_.load(); }

private:
    Matrix<float> reference_;
    std::vector<std::size_t> rows_;
    std::size_t k_ = 10;
    mutable std::atomic<std::size_t> evaluations_{0};
};

/// Draws the seeded density sample from a store.
DensityIndex build_density_index(MatrixView<float> points, const DetectorConfig& config);

/// Mean Euclidean distance from v to its k nearest reference rows (larger
/// is sparser). Throws InsufficientData when the reference is too small.
double knn_density(std::span<const float> v, MatrixView<float> reference, std::size_t k_neighbors);

struct Calibration {
    DetectionThresholds thresholds;
    DensityIndex index;
};

/// Model-specific thresholds from percentiles of the store's own
/// membership, norm, max-sim, centroid-cosine and kNN-density distributions.
Calibration calibrate(const EmbeddingStore& store, const ClusterModel& model, const DetectorConfig& config = {});
Calibration calibrate(MatrixView<float> points, const ClusterModel& model, const DetectorConfig& config = {});

enum VerdictFlag : unsigned { kType1 = 1u, kType2 = 2u, kType3 = 4u };

struct TokenVerdict {
    double h = 0.0;
    double norm = 0.0;
    double max_sim = 0.0;
    /// NaN unless the Tier-3 screen (max_sim < theta_maxsim) triggered.
    double density = 0.0;
    std::size_t argmax_cluster = 0;
    unsigned flags = 0;
    std::size_t position = 0;

    bool type1() const { return flags & kType1; }
    bool type2() const { return flags & kType2; }
    bool type3() const { return flags & kType3; }
};

/// Tier 1 (membership + norm) and, for low max-sim tokens only, Tier 3
/// (kNN density). Throws DegenerateInput for a zero vector.
TokenVerdict classify_token(std::span<const float> v, const ClusterModel& model,
                            const DetectionThresholds& thresholds, const DensityIndex& index);

/// classify_token over every row; positions are row indices.
std::vector<TokenVerdict> classify_tokens(MatrixView<float> queries, const ClusterModel& model,
                                          const DetectionThresholds& thresholds, const DensityIndex& index);

/// Tier 2 over a generation sequence: position t > 0 gets type2 when both t-1
/// and t exceed theta_confidence and their assigned centroids have cosine
/// below theta_jump. Tier 3 runs only when `index` is given.
/// Throws InsufficientData for an empty sequence.
std::vector<TokenVerdict> analyze_trajectory(MatrixView<float> sequence, const ClusterModel& model,
                                             const DetectionThresholds& thresholds,
                                             const DensityIndex* index = nullptr);

void save_thresholds(const DetectionThresholds& t, const std::filesystem::path& path);
DetectionThresholds load_thresholds(const std::filesystem::path& path);

}  // namespace embedgeom
