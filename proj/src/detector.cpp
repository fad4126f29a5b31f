#include "embedgeom/detector.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/io_util.hpp"
#include "embedgeom/kernels.hpp"
#include "embedgeom/numeric_stats.hpp"
#include "embedgeom/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace embedgeom {
namespace {

constexpr std::uint64_t kDensityStream = 0xDE45'0000'0000'0003ULL;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_zero(std::span<const float> v) {
    return std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; });
}

// Tier-1 fields and flag; density left NaN.
TokenVerdict tier1(std::span<const double> cosines, double norm, const DetectionThresholds& t) {
    const auto m = membership_from_cosines(cosines, t.config.top_m);
    TokenVerdict v;
    v.h = m.h;
    v.max_sim = m.max_sim;
    v.argmax_cluster = m.argmax_cluster;
    v.norm = norm;
    v.density = kNaN;
    if (v.h < t.theta_h && v.norm < t.theta_norm) v.flags |= kType1;
    return v;
}

void tier3(std::vector<TokenVerdict>& verdicts, MatrixView<float> queries, const DetectionThresholds& t,
           const DensityIndex& index) {
    std::vector<std::size_t> screened;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (verdicts[i].max_sim < t.theta_maxsim) screened.push_back(i);
    }
    if (screened.empty()) return;
    const Matrix<float> rows = gather_rows(queries, std::span<const std::size_t>(screened));
    const auto dens = index.density(rows.view());
    for (std::size_t s = 0; s < screened.size(); ++s) {
        auto& v = verdicts[screened[s]];
        v.density = dens[s];
        if (v.density > t.theta_density) v.flags |= kType3;
    }
}

std::vector<TokenVerdict> tier1_all(MatrixView<float> queries, const ClusterModel& model,
                                    const DetectionThresholds& t) {
    if (queries.cols != model.dim()) throw ConsistencyError("query dimension differs from centroids");
    for (std::size_t i = 0; i < queries.rows; ++i) {
        if (is_zero(queries.row(i))) throw DegenerateInput("zero query vector at position " + std::to_string(i));
    }
    const auto cos = kernels::omp::cosine_matrix(queries, model.centroids.view());
    const auto r = kernels::omp::row_norms(queries);
    std::vector<TokenVerdict> out(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i) {
        out[i] = tier1(cos.row(i), r[i], t);
        out[i].position = i;
    }
    return out;
}

}  // namespace

DensityIndex::DensityIndex(Matrix<float> reference, std::vector<std::size_t> rows, std::size_t k_neighbors)
    : reference_(std::move(reference)), rows_(std::move(rows)), k_(k_neighbors) {}

DensityIndex::DensityIndex(DensityIndex&& other) noexcept
    : reference_(std::move(other.reference_)),
      rows_(std::move(other.rows_)),
      k_(other.k_),
      evaluations_(other.evaluations_.load()) {}

DensityIndex& DensityIndex::operator=(DensityIndex&& other) noexcept {
    reference_ = std::move(other.reference_);
    rows_ = std::move(other.rows_);
    k_ = other.k_;
    evaluations_.store(other.evaluations_.load());
    return *this;
}

double DensityIndex::density(std::span<const float> v) const {
    evaluations_.fetch_add(1);
    return knn_density(v, reference_.view(), k_);
}

std::vector<double> DensityIndex::density(MatrixView<float> queries) const {
    if (k_ == 0 || reference_.rows() < k_) throw InsufficientData("density index smaller than k_neighbors");
    evaluations_.fetch_add(queries.rows);
    return kernels::omp::knn_mean_distance(queries, reference_.view(), k_, {});
}

DensityIndex build_density_index(MatrixView<float> points, const DetectorConfig& config) {
    auto rows = sample_without_replacement(points.rows, config.density_sample, derive_seed(config.seed, kDensityStream));
    Matrix<float> ref = gather_rows(points, std::span<const std::size_t>(rows));
    return DensityIndex(std::move(ref), std::move(rows), config.k_neighbors);
}

double knn_density(std::span<const float> v, MatrixView<float> reference, std::size_t k_neighbors) {
    if (k_neighbors == 0) throw InsufficientData("k_neighbors must be positive");
    if (reference.rows < k_neighbors) {
        throw InsufficientData("reference has " + std::to_string(reference.rows) + " rows, need " +
                               std::to_string(k_neighbors));
    }
    if (v.size() != reference.cols) throw ConsistencyError("query dimension differs from reference");
    return kernels::serial::knn_mean_distance(MatrixView<float>{v.data(), 1, v.size()}, reference, k_neighbors, {})[0];
}

Calibration calibrate(const EmbeddingStore& store, const ClusterModel& model, const DetectorConfig& config) {
    return calibrate(store.view(), model, config);
}

Calibration calibrate(MatrixView<float> points, const ClusterModel& model, const DetectorConfig& config) {
    DetectionThresholds t;
    t.config = config;

    const auto cos = kernels::omp::cosine_matrix(points, model.centroids.view());
    std::vector<double> hs(points.rows), maxs(points.rows);
    for (std::size_t i = 0; i < points.rows; ++i) {
        const auto m = membership_from_cosines(cos.row(i), config.top_m);
        hs[i] = m.h;
        maxs[i] = m.max_sim;
    }
    t.theta_h = stats::percentile(hs, config.q_h);
    t.theta_norm = stats::percentile(kernels::omp::row_norms(points), config.q_norm);
    t.theta_maxsim = stats::percentile(maxs, config.q_maxsim);
    t.theta_confidence = stats::percentile(maxs, config.q_confidence);

    const auto cc = centroid_cosine_matrix(model);
    std::vector<double> off;
    for (std::size_t a = 0; a < model.k; ++a) {
        for (std::size_t b = a + 1; b < model.k; ++b) off.push_back(cc(a, b));
    }
    t.theta_jump = stats::percentile(off, config.q_jump);

    DensityIndex index = build_density_index(points, config);
    if (index.reference().rows() <= config.k_neighbors) {
        throw InsufficientData("density sample must exceed k_neighbors");
    }
    // Leave-one-out: a sampled token is not its own neighbour.
    std::vector<std::size_t> self(index.reference().rows());
    for (std::size_t i = 0; i < self.size(); ++i) self[i] = i;
    const auto dens = kernels::omp::knn_mean_distance(index.reference().view(), index.reference().view(),
                                                      config.k_neighbors, self);
    t.theta_density = stats::percentile(dens, config.q_density);
    return {t, std::move(index)};
}

TokenVerdict classify_token(std::span<const float> v, const ClusterModel& model, const DetectionThresholds& thresholds,
                            const DensityIndex& index) {
    if (is_zero(v)) throw DegenerateInput("classify_token of a zero vector");
    const MatrixView<float> one{v.data(), 1, v.size()};
    auto verdicts = tier1_all(one, model, thresholds);
    tier3(verdicts, one, thresholds, index);
    return verdicts[0];
}

std::vector<TokenVerdict> classify_tokens(MatrixView<float> queries, const ClusterModel& model,
                                          const DetectionThresholds& thresholds, const DensityIndex& index) {
    auto verdicts = tier1_all(queries, model, thresholds);
    tier3(verdicts, queries, thresholds, index);
    return verdicts;
}

std::vector<TokenVerdict> analyze_trajectory(MatrixView<float> sequence, const ClusterModel& model,
                                             const DetectionThresholds& thresholds, const DensityIndex* index) {
    if (sequence.rows == 0) throw InsufficientData("empty sequence");
    auto verdicts = tier1_all(sequence, model, thresholds);
    if (index) tier3(verdicts, sequence, thresholds, *index);
    const auto cc = centroid_cosine_matrix(model);
    for (std::size_t t = 1; t < verdicts.size(); ++t) {
        const auto& prev = verdicts[t - 1];
        auto& cur = verdicts[t];
        const bool confident = prev.max_sim > thresholds.theta_confidence && cur.max_sim > thresholds.theta_confidence;
        if (confident && cc(prev.argmax_cluster, cur.argmax_cluster) < thresholds.theta_jump) {
            cur.flags |= kType2;
        }
    }
    return verdicts;
}

void save_thresholds(const DetectionThresholds& t, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["theta_h"] = t.theta_h;
    j["theta_norm"] = t.theta_norm;
    j["theta_maxsim"] = t.theta_maxsim;
    j["theta_jump"] = t.theta_jump;
    j["theta_density"] = t.theta_density;
    j["theta_confidence"] = t.theta_confidence;
    auto& c = j["calibration"];
    c["top_m"] = t.config.top_m;
    c["q_h"] = t.config.q_h;
    c["q_norm"] = t.config.q_norm;
    c["q_maxsim"] = t.config.q_maxsim;
    c["q_jump"] = t.config.q_jump;
    c["q_density"] = t.config.q_density;
    c["q_confidence"] = t.config.q_confidence;
    c["k_neighbors"] = t.config.k_neighbors;
    c["density_sample"] = t.config.density_sample;
    c["seed"] = t.config.seed;
    write_file_atomic(path, j.dump(2) + "\n");
}

DetectionThresholds load_thresholds(const std::filesystem::path& path) {
    try {
        const auto j = nlohmann::json::parse(read_file(path));
        DetectionThresholds t;
        t.theta_h = j.at("theta_h").get<double>();
        t.theta_norm = j.at("theta_norm").get<double>();
        t.theta_maxsim = j.at("theta_maxsim").get<double>();
        t.theta_jump = j.at("theta_jump").get<double>();
        t.theta_density = j.at("theta_density").get<double>();
        t.theta_confidence = j.at("theta_confidence").get<double>();
        const auto& c = j.at("calibration");
        t.config.top_m = c.at("top_m").get<std::size_t>();
        t.config.q_h = c.at("q_h").get<double>();
        t.config.q_norm = c.at("q_norm").get<double>();
        t.config.q_maxsim = c.at("q_maxsim").get<double>();
        t.config.q_jump = c.at("q_jump").get<double>();
        t.config.q_density = c.at("q_density").get<double>();
        t.config.q_confidence = c.at("q_confidence").get<double>();
        t.config.k_neighbors = c.at("k_neighbors").get<std::size_t>();
        t.config.density_sample = c.at("density_sample").get<std::size_t>();
        t.config.seed = c.at("seed").get<std::uint64_t>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed thresholds file: ") + e.what());
    }
}

}  // namespace embedgeom
