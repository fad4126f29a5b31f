#pragma once

#include "embedgeom/embedding_store.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace embedgeom {

struct DiagnosticsConfig {
    std::size_t pair_sample = 100000;
    std::uint64_t seed = 42;
    bool center = true;
};

struct SpaceDiagnostics {
    std::size_t nominal_dim = 0;
    std::size_t effective_dim_95 = 0;
    double utilization = 0.0;
    double norm_cov = 0.0;
    double mean_pairwise_cos = 0.0;
    /// Cumulative explained variance by component, length nominal_dim.
    std::vector<double> pca_cumulative;
};

SpaceDiagnostics diagnose_space(const EmbeddingStore& store, const DiagnosticsConfig& config = {});
SpaceDiagnostics diagnose_space(MatrixView<float> points, const DiagnosticsConfig& config = {});

/// Smallest m whose cumulative explained variance reaches `level`.
std::size_t effective_dimension(const std::vector<double>& cumulative, double level = 0.95);

/// CSV: component, cumulative_variance (components numbered from 1).
void emit_pca_plotdata(const SpaceDiagnostics& diag, const std::filesystem::path& path);

}  // namespace embedgeom
