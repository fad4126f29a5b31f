#include "embedgeom/cluster_cohesion.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/kernels.hpp"
#include "embedgeom/numeric_stats.hpp"
#include "embedgeom/random.hpp"

#include <cmath>
#include <limits>

namespace embedgeom {
namespace {

// The background pair stream is kept apart from per-cluster sampling streams.
constexpr std::uint64_t kBackgroundStream = 0xBAC6'0000'0000'0001ULL;

std::vector<std::size_t> sample_members(const std::vector<std::size_t>& members, std::size_t cap,
                                        std::uint64_t seed, std::size_t cluster) {
    const auto picks = sample_without_replacement(members.size(), cap, derive_seed(seed, cluster));
    std::vector<std::size_t> out;
    out.reserve(picks.size());
    for (auto p : picks) out.push_back(members[p]);
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

// t-test over per-cluster values. Identical values have no sampling
// variance: the sign of the common value decides the outcome.
void attach_t_test(BetaResult& r) {
    try {
        const auto t = stats::t_test_one_sided(r.per_cluster);
        r.t_stat = t.t_stat;
        r.p_value = t.p_value;
    } catch (const DegenerateInput&) {
        if (r.mean_beta > 0.0) {
            r.t_stat = std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        } else if (r.mean_beta < 0.0) {
            r.t_stat = -std::numeric_limits<double>::infinity();
            r.p_value = 1.0;
        } else {
            r.t_stat = 0.0;
            r.p_value = 0.5;
        }
    }
}

}  // namespace

const char* to_string(BetaVariant v) {
    return v == BetaVariant::centroid_diff ? "centroid_diff" : "pairwise";
}

BetaResult compute_beta_centroid(const EmbeddingStore& store, const ClusterModel& model,
                                 const CohesionConfig& config) {
    return compute_beta_centroid(store.view(), model, config);
}

BetaResult compute_beta_centroid(MatrixView<float> points, const ClusterModel& model, const CohesionConfig& config) {
    if (model.assignments.size() != points.rows) throw ConsistencyError("model was not fitted on this store");
    if (model.k < 2) throw InsufficientData("cohesion needs k >= 2");
    const auto members = model.members();

    BetaResult r;
    r.variant = BetaVariant::centroid_diff;
    r.sample_cap = config.sample_cap;
    r.seed = config.seed;
    std::vector<double> own_means, other_means;
    const double others = static_cast<double>(model.k - 1);
    for (std::size_t c = 0; c < model.k; ++c) {
        if (members[c].empty()) {
            throw ConsistencyError("cluster " + std::to_string(c) + " has no members");
        }
        const auto sample = sample_members(members[c], config.sample_cap, config.seed, c);
        const Matrix<float> rows = gather_rows(points, std::span<const std::size_t>(sample));
        const auto cos = kernels::omp::cosine_matrix(rows.view(), model.centroids.view());
        double own = 0.0, other = 0.0;
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            double rest = 0.0;
            for (std::size_t j = 0; j < model.k; ++j) {
                if (j != c) rest += cos(i, j);
            }
            own += cos(i, c);
            other += rest / others;
        }
        const double m = static_cast<double>(rows.rows());
        own_means.push_back(own / m);
        other_means.push_back(other / m);
        r.per_cluster.push_back(own / m - other / m);
        r.clusters.push_back(c);
    }
    r.mean_beta = mean_of(r.per_cluster);
    r.mean_own_sim = mean_of(own_means);
    r.mean_other_sim = mean_of(other_means);
    attach_t_test(r);
    return r;
}

BetaResult compute_beta_pairwise(const EmbeddingStore& store, const ClusterModel& model,
                                 const CohesionConfig& config) {
    return compute_beta_pairwise(store.view(), model, config);
}

BetaResult compute_beta_pairwise(MatrixView<float> points, const ClusterModel& model, const CohesionConfig& config) {
    if (model.assignments.size() != points.rows) throw ConsistencyError("model was not fitted on this store");
    const auto members = model.members();

    std::size_t populated = 0;
    for (const auto& m : members) populated += m.empty() ? 0 : 1;
    if (populated < 2) throw InsufficientData("pairwise cohesion needs two populated clusters");

    // Background: seeded uniform pairs, rejecting same-cluster draws.
    std::vector<kernels::IndexPair> background;
    background.reserve(config.background_pairs);
    const std::uint64_t bg_seed = derive_seed(config.seed, kBackgroundStream);
    const std::uint64_t n = points.rows;
    for (std::uint64_t counter = 0; background.size() < config.background_pairs; counter += 2) {
        if (counter > 200 * (config.background_pairs + 1)) {
            throw InsufficientData("could not draw cross-cluster pairs");
        }
        const auto a = counter_draw(bg_seed, counter, n);
        const auto b = counter_draw(bg_seed, counter + 1, n);
        if (model.assignments[a] == model.assignments[b]) continue;
        background.emplace_back(a, b);
    }
    const double bg = mean_of(kernels::omp::pair_cosines(points, background));

    BetaResult r;
    r.variant = BetaVariant::pairwise;
    r.sample_cap = config.sample_cap;
    r.seed = config.seed;
    std::vector<double> within_means;
    for (std::size_t c = 0; c < model.k; ++c) {
        const auto sample = sample_members(members[c], config.sample_cap, config.seed, c);
        if (sample.size() < 2) continue;
        std::vector<kernels::IndexPair> pairs;
        pairs.reserve(sample.size() * (sample.size() - 1) / 2);
        for (std::size_t i = 0; i < sample.size(); ++i) {
            for (std::size_t j = i + 1; j < sample.size(); ++j) pairs.emplace_back(sample[i], sample[j]);
        }
        const double within = mean_of(kernels::omp::pair_cosines(points, pairs));
        within_means.push_back(within);
        r.per_cluster.push_back(within - bg);
        r.clusters.push_back(c);
    }
    if (r.per_cluster.size() < 2) {
        throw InsufficientData("fewer than two clusters have two or more members");
    }
    r.mean_beta = mean_of(r.per_cluster);
    r.mean_own_sim = mean_of(within_means);
    r.mean_other_sim = bg;
    attach_t_test(r);
    return r;
}

}  // namespace embedgeom
