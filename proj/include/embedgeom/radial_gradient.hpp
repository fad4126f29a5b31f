#pragma once

#include "embedgeom/embedding_store.hpp"
#include "embedgeom/numeric_stats.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace embedgeom {

struct RadialConfig {
    std::size_t n_bins = 40;
    std::size_t min_count = 10;
    /// ss_quad at or below this counts as an exact quadratic.
    double perfect_fit_threshold = 1e-12;
};

struct RadialBin {
    double lower = 0.0;
    double upper = 0.0;
    double mean_norm = 0.0;
    double mean_info = 0.0;
    std::size_t count = 0;
};

/// Binned norm/self-information profile with competing polynomial fits.
struct RadialResult {
    std::vector<RadialBin> bins;
    stats::PolyFit fit_lin;
    stats::PolyFit fit_quad;
    /// Diagnostic only; absent when too few bins survive for a cubic.
    std::optional<stats::PolyFit> fit_cubic;
    double lambda_r = 0.0;
    stats::FTestResult f_test;
    /// -inf when the corresponding fit is exact.
    double aic_lin = 0.0;
    double aic_quad = 0.0;
    bool significant = false;
};

/// Equal-width bins over [min(norms), max(norms)]; the maximum lands in the
/// last bin. Bins with fewer than `min_count` members are dropped.
/// Throws InsufficientData when fewer than 4 bins survive.
std::vector<RadialBin> bin_profile(std::span<const double> norms, std::span<const double> infos,
                                   std::size_t n_bins, std::size_t min_count);

/// Degree 1/2/3 fits of mean information against mean norm over the
/// surviving bins, nested F-test with n = bin count, and AIC for both models.
RadialResult compute_lambda_r(std::span<const double> norms, std::span<const double> infos,
                              const RadialConfig& config = {});
RadialResult compute_lambda_r(const EmbeddingStore& store, const RadialConfig& config = {});

/// Per-bin CSV at `path`: bin_mean_norm, bin_mean_info, count, fit_lin,
/// fit_quad, fit_cubic, resid_lin, resid_quad. A sibling `<stem>_curves.csv`
/// holds the three fits sampled at 200 points across the bin range.
void emit_radial_plotdata(const RadialResult& result, const std::filesystem::path& path);

}  // namespace embedgeom
