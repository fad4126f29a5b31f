#include "embedgeom/space_diagnostics.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/io_util.hpp"
#include "embedgeom/kernels.hpp"
#include "embedgeom/numeric_stats.hpp"
#include "embedgeom/random.hpp"

#include <cmath>

namespace embedgeom {

std::size_t effective_dimension(const std::vector<double>& cumulative, double level) {
    for (std::size_t m = 0; m < cumulative.size(); ++m) {
        if (cumulative[m] >= level - 1e-12) return m + 1;
    }
    return cumulative.size();
}

SpaceDiagnostics diagnose_space(const EmbeddingStore& store, const DiagnosticsConfig& config) {
    return diagnose_space(store.view(), config);
}

SpaceDiagnostics diagnose_space(MatrixView<float> points, const DiagnosticsConfig& config) {
    if (points.rows < 2) throw InsufficientData("space diagnostics need at least 2 tokens");
    SpaceDiagnostics out;
    out.nominal_dim = points.cols;

    const auto spectrum = stats::pca_spectrum(points, config.center);
    double total = 0.0;
    for (double v : spectrum) total += v;
    double acc = 0.0;
    for (double v : spectrum) {
        acc += v;
        out.pca_cumulative.push_back(total > 0.0 ? acc / total : 1.0);
    }
    out.effective_dim_95 = effective_dimension(out.pca_cumulative, 0.95);
    out.utilization = static_cast<double>(out.effective_dim_95) / static_cast<double>(out.nominal_dim);

    const auto r = kernels::omp::row_norms(points);
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= static_cast<double>(r.size());
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    var /= static_cast<double>(r.size());
    out.norm_cov = std::sqrt(var) / mean;

    // Unordered pairs i != j drawn from the counter-based stream.
    const std::uint64_t n = points.rows;
    std::vector<kernels::IndexPair> pairs(config.pair_sample);
    for (std::uint64_t t = 0; t < config.pair_sample; ++t) {
        const auto i = counter_draw(config.seed, 2 * t, n);
        auto j = counter_draw(config.seed, 2 * t + 1, n - 1);
        if (j >= i) ++j;
        pairs[t] = {i, j};
    }
    const auto cos = kernels::omp::pair_cosines(points, pairs);
    double s = 0.0;
    for (double c : cos) s += c;
    out.mean_pairwise_cos = pairs.empty() ? 0.0 : s / static_cast<double>(pairs.size());
    return out;
}

void emit_pca_plotdata(const SpaceDiagnostics& diag, const std::filesystem::path& path) {
    std::string csv = "component,cumulative_variance\n";
    for (std::size_t m = 0; m < diag.pca_cumulative.size(); ++m) {
        csv += std::to_string(m + 1) + ',' + format_double(diag.pca_cumulative[m]) + '\n';
    }
    write_file_atomic(path, csv);
}

}  // namespace embedgeom
