#include "embedgeom/radial_gradient.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace embedgeom {
namespace {

constexpr std::size_t kCurveSamples = 200;

double aic_or_sentinel(const stats::PolyFit& fit, int n, double threshold) {
    if (fit.ss_res <= threshold) return -std::numeric_limits<double>::infinity();
    return stats::aic(fit.ss_res, n, fit.degree + 1);
}

}  // namespace

std::vector<RadialBin> bin_profile(std::span<const double> norms, std::span<const double> infos,
                                   std::size_t n_bins, std::size_t min_count) {
    if (norms.size() != infos.size()) throw ConsistencyError("norms and infos differ in length");
    if (n_bins == 0) throw InsufficientData("bin_profile needs at least one bin");
    if (norms.size() < n_bins) throw InsufficientData("fewer tokens than bins");
    for (double r : norms) {
        if (!std::isfinite(r) || r < 0.0) throw DataError("norms must be finite and non-negative");
    }
    const auto [lo_it, hi_it] = std::minmax_element(norms.begin(), norms.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = (hi - lo) / static_cast<double>(n_bins);

    std::vector<double> sum_norm(n_bins, 0.0), sum_info(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);
    for (std::size_t i = 0; i < norms.size(); ++i) {
        std::size_t b = 0;
        if (width > 0.0) {
            b = static_cast<std::size_t>(std::floor((norms[i] - lo) / width));
            b = std::min(b, n_bins - 1);
        }
        sum_norm[b] += norms[i];
        sum_info[b] += infos[i];
        ++count[b];
    }

    std::vector<RadialBin> bins;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (count[b] < std::max<std::size_t>(min_count, 1)) continue;
        RadialBin bin;
        bin.lower = lo + width * static_cast<double>(b);
        bin.upper = b + 1 == n_bins ? hi : lo + width * static_cast<double>(b + 1);
        bin.count = count[b];
        bin.mean_norm = std::clamp(sum_norm[b] / static_cast<double>(count[b]), bin.lower, bin.upper);
        bin.mean_info = sum_info[b] / static_cast<double>(count[b]);
        bins.push_back(bin);
    }
    if (bins.size() < 4) {
        throw InsufficientData("only " + std::to_string(bins.size()) + " bins survive; the F-test needs 4");
    }
    return bins;
}

RadialResult compute_lambda_r(std::span<const double> norms, std::span<const double> infos,
                              const RadialConfig& config) {
    RadialResult out;
    out.bins = bin_profile(norms, infos, config.n_bins, config.min_count);
    std::vector<double> xs, ys;
    for (const auto& b : out.bins) {
        xs.push_back(b.mean_norm);
        ys.push_back(b.mean_info);
    }
    const int n = static_cast<int>(xs.size());
    out.fit_lin = stats::polyfit(xs, ys, 1);
    out.fit_quad = stats::polyfit(xs, ys, 2);
    if (xs.size() >= 5) out.fit_cubic = stats::polyfit(xs, ys, 3);
    out.lambda_r = out.fit_quad.coefficients[2];
    out.f_test = stats::nested_f_test(out.fit_lin.ss_res, out.fit_quad.ss_res, n, config.perfect_fit_threshold);
    out.aic_lin = aic_or_sentinel(out.fit_lin, n, config.perfect_fit_threshold);
    out.aic_quad = aic_or_sentinel(out.fit_quad, n, config.perfect_fit_threshold);
    out.significant = out.f_test.p_value < 0.05;
    return out;
}

RadialResult compute_lambda_r(const EmbeddingStore& store, const RadialConfig& config) {
    const auto r = norms(store);
    const auto info = store.self_information();
    return compute_lambda_r(r, info, config);
}

void emit_radial_plotdata(const RadialResult& result, const std::filesystem::path& path) {
    const auto cubic = [&](double x) {
        return result.fit_cubic ? (*result.fit_cubic)(x) : std::numeric_limits<double>::quiet_NaN();
    };
    std::string csv = "bin_mean_norm,bin_mean_info,count,fit_lin,fit_quad,fit_cubic,resid_lin,resid_quad\n";
    for (const auto& b : result.bins) {
        const double lin = result.fit_lin(b.mean_norm);
        const double quad = result.fit_quad(b.mean_norm);
        csv += format_double(b.mean_norm) + ',' + format_double(b.mean_info) + ',' + std::to_string(b.count) +
               ',' + format_double(lin) + ',' + format_double(quad) + ',' + format_double(cubic(b.mean_norm)) +
               ',' + format_double(b.mean_info - lin) + ',' + format_double(b.mean_info - quad) + '\n';
    }
    write_file_atomic(path, csv);

    std::string curves = "norm,fit_lin,fit_quad,fit_cubic\n";
    const double x0 = result.bins.front().mean_norm;
    const double x1 = result.bins.back().mean_norm;
    for (std::size_t s = 0; s < kCurveSamples; ++s) {
        const double x = s + 1 == kCurveSamples
                             ? x1
                             : x0 + (x1 - x0) * static_cast<double>(s) / static_cast<double>(kCurveSamples - 1);
        curves += format_double(x) + ',' + format_double(result.fit_lin(x)) + ',' +
                  format_double(result.fit_quad(x)) + ',' + format_double(cubic(x)) + '\n';
    }
    auto curve_path = path;
    curve_path.replace_filename(path.stem().string() + "_curves.csv");
    write_file_atomic(curve_path, curves);
}

}  // namespace embedgeom
