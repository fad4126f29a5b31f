#include "embedgeom/clustering.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/io_util.hpp"
#include "embedgeom/kernels.hpp"
#include "embedgeom/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace embedgeom {
namespace {

double total(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

Matrix<double> kmeans_plus_plus(MatrixView<float> points, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = points.rows;
    const std::size_t d = points.cols;
    Matrix<double> centers(k, d);
    auto set_center = [&](std::size_t c, std::size_t idx) {
        auto src = points.row(idx);
        std::copy(src.begin(), src.end(), centers.row(c).begin());
    };

    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    set_center(0, first(rng));
    std::vector<double> min_d2 =
        kernels::omp::nearest_centroid(points, MatrixView<double>{centers.row(0).data(), 1, d}).sq_dist;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 1; c < k; ++c) {
        const double mass = total(min_d2);
        std::size_t pick = 0;
        if (mass > 0.0) {
            const double target = unit(rng) * mass;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (acc > target && min_d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = first(rng);
        }
        set_center(c, pick);
        const auto d2 =
            kernels::omp::nearest_centroid(points, MatrixView<double>{centers.row(c).data(), 1, d}).sq_dist;
        for (std::size_t i = 0; i < n; ++i) min_d2[i] = std::min(min_d2[i], d2[i]);
    }
    return centers;
}

// Moves every empty cluster onto the point currently farthest from its
// centroid. Returns true when anything moved.
bool reseed_empty(MatrixView<float> points, const kernels::NearestResult& nearest, Matrix<double>& centers) {
    const std::size_t k = centers.rows();
    std::vector<std::size_t> sizes(k, 0);
    for (auto l : nearest.labels) ++sizes[l];
    std::vector<std::size_t> empty;
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) empty.push_back(c);
    }
    if (empty.empty()) return false;

    std::vector<std::size_t> order(points.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return nearest.sq_dist[a] > nearest.sq_dist[b]; });
    for (std::size_t e = 0; e < empty.size() && e < order.size(); ++e) {
        auto src = points.row(order[e]);
        std::copy(src.begin(), src.end(), centers.row(empty[e]).begin());
    }
    return true;
}

void round_to_f32(Matrix<double>& m) {
    for (double& x : m.values()) x = static_cast<double>(static_cast<float>(x));
}

ClusterModel fit_once(MatrixView<float> points, const KMeansConfig& cfg, std::uint64_t run_seed) {
    const std::size_t n = points.rows;
    const std::size_t d = points.cols;
    const std::size_t k = cfg.k;
    std::mt19937_64 rng(run_seed);

    Matrix<double> centers = kmeans_plus_plus(points, k, rng);
    std::vector<double> counts(k, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    auto full = kernels::omp::nearest_centroid(points, centers.view());
    double inertia = total(full.sq_dist);
    std::vector<double> history{inertia};

    const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, n));
    Matrix<double> sums(k, d);
    std::vector<std::size_t> batch_counts(k);
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const Matrix<double> previous = centers;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t nb = std::min(batch, n - start);
            const auto idx = std::span<const std::size_t>(order).subspan(start, nb);
            const Matrix<float> rows = gather_rows(points, idx);
            const auto near = kernels::omp::nearest_centroid(rows.view(), centers.view());

            std::fill(sums.values().begin(), sums.values().end(), 0.0);
            std::fill(batch_counts.begin(), batch_counts.end(), 0);
            for (std::size_t r = 0; r < nb; ++r) {
                const auto c = near.labels[r];
                ++batch_counts[c];
                auto src = rows.row(r);
                auto dst = sums.row(c);
                for (std::size_t j = 0; j < d; ++j) dst[j] += static_cast<double>(src[j]);
            }
            // Per-center running mean: each center is the average of every
            // point ever assigned to it, weighting old points by their count.
            for (std::size_t c = 0; c < k; ++c) {
                if (batch_counts[c] == 0) continue;
                const double old = counts[c];
                const double updated = old + static_cast<double>(batch_counts[c]);
                auto ctr = centers.row(c);
                auto s = sums.row(c);
                for (std::size_t j = 0; j < d; ++j) ctr[j] = (ctr[j] * old + s[j]) / updated;
                counts[c] = updated;
            }
        }

        full = kernels::omp::nearest_centroid(points, centers.view());
        if (reseed_empty(points, full, centers)) {
            full = kernels::omp::nearest_centroid(points, centers.view());
        }
        const double next = total(full.sq_dist);
        if (next > inertia) {
            centers = previous;
            break;
        }
        const bool converged = inertia == 0.0 || (inertia - next) / inertia < cfg.tolerance;
        inertia = next;
        history.push_back(inertia);
        if (converged) break;
    }

    round_to_f32(centers);
    full = kernels::omp::nearest_centroid(points, centers.view());
    for (std::size_t guard = 0; guard < k && reseed_empty(points, full, centers); ++guard) {
        full = kernels::omp::nearest_centroid(points, centers.view());
    }

    ClusterModel model;
    model.k = k;
    model.centroids = std::move(centers);
    model.assignments = std::move(full.labels);
    model.inertia = total(full.sq_dist);
    model.seed = cfg.seed;
    model.inertia_history = std::move(history);
    return model;
}

}  // namespace

std::vector<std::vector<std::size_t>> ClusterModel::members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignments.size(); ++i) out[assignments[i]].push_back(i);
    return out;
}

ClusterModel fit_minibatch_kmeans(const EmbeddingStore& store, const KMeansConfig& config) {
    return fit_minibatch_kmeans(store.view(), config);
}

ClusterModel fit_minibatch_kmeans(MatrixView<float> points, const KMeansConfig& config) {
    if (config.k < 2) throw InsufficientData("k-means needs k >= 2");
    if (points.rows < config.k) {
        throw InsufficientData("k-means: " + std::to_string(points.rows) + " points for k = " +
                               std::to_string(config.k));
    }
    const std::size_t runs = std::max<std::size_t>(1, config.n_init);
    ClusterModel best;
    bool have = false;
    for (std::size_t run = 0; run < runs; ++run) {
        ClusterModel m = fit_once(points, config, derive_seed(config.seed, run));
        if (!have || m.inertia < best.inertia) {
            best = std::move(m);
            have = true;
        }
    }
    return best;
}

ClusterModel model_from_assignments(MatrixView<float> points, std::span<const std::uint32_t> labels, std::size_t k) {
    if (labels.size() != points.rows) throw ConsistencyError("label count differs from row count");
    ClusterModel m;
    m.k = k;
    m.centroids = Matrix<double>(k, points.cols, 0.0);
    m.assignments.assign(labels.begin(), labels.end());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < points.rows; ++i) {
        const auto c = labels[i];
        if (c >= k) throw ConsistencyError("label out of range");
        ++sizes[c];
        auto src = points.row(i);
        auto dst = m.centroids.row(c);
        for (std::size_t j = 0; j < points.cols; ++j) dst[j] += static_cast<double>(src[j]);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) continue;
        for (double& x : m.centroids.row(c)) x /= static_cast<double>(sizes[c]);
    }
    for (std::size_t i = 0; i < points.rows; ++i) {
        auto src = points.row(i);
        auto ctr = m.centroids.row(labels[i]);
        double d2 = 0.0;
        for (std::size_t j = 0; j < points.cols; ++j) {
            const double diff = static_cast<double>(src[j]) - ctr[j];
            d2 += diff * diff;
        }
        m.inertia += d2;
    }
    return m;
}

std::vector<std::uint32_t> assign(MatrixView<float> points, const ClusterModel& model) {
    if (points.cols != model.dim()) throw ConsistencyError("dimension mismatch between points and centroids");
    return kernels::omp::nearest_centroid(points, model.centroids.view()).labels;
}

MembershipScore membership_from_cosines(std::span<const double> cosines, std::size_t top_m) {
    if (top_m < 1 || top_m > cosines.size()) {
        throw InsufficientData("top_m must lie in [1, k]");
    }
    MembershipScore out;
    out.max_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cosines.size(); ++c) {
        if (cosines[c] > out.max_sim) {
            out.max_sim = cosines[c];
            out.argmax_cluster = c;
        }
    }
    std::vector<double> sorted(cosines.begin(), cosines.end());
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top_m), sorted.end(),
                      std::greater<>());
    double s = 0.0;
    for (std::size_t i = 0; i < top_m; ++i) s += sorted[i];
    out.h = s / static_cast<double>(top_m);
    return out;
}

MembershipScore soft_membership(std::span<const float> v, const ClusterModel& model, std::size_t top_m) {
    if (v.size() != model.dim()) throw ConsistencyError("vector dimension differs from centroids");
    if (std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; })) {
        throw DegenerateInput("soft membership of a zero vector");
    }
    const auto cos = kernels::serial::cosine_matrix(MatrixView<float>{v.data(), 1, v.size()}, model.centroids.view());
    return membership_from_cosines(cos.row(0), top_m);
}

Matrix<double> centroid_cosine_matrix(const ClusterModel& model) {
    auto m = kernels::omp::cosine_matrix(model.centroids.view(), model.centroids.view());
    for (std::size_t c = 0; c < model.k; ++c) m(c, c) = 1.0;
    return m;
}

void save_cluster_model(const ClusterModel& model, const std::filesystem::path& prefix) {
    nlohmann::ordered_json j;
    j["k"] = model.k;
    j["dim"] = model.dim();
    j["vocab_size"] = model.assignments.size();
    j["seed"] = model.seed;
    j["inertia"] = model.inertia;
    j["inertia_history"] = model.inertia_history;

    std::vector<float> cents(model.centroids.values().size());
    for (std::size_t i = 0; i < cents.size(); ++i) cents[i] = static_cast<float>(model.centroids.values()[i]);

    const std::string base = prefix.string();
    write_file_atomic(base + ".centroids.bin", encode_f32le(cents));
    write_file_atomic(base + ".assign.bin", encode_u32le(model.assignments));
    write_file_atomic(base + ".clusters.json", j.dump(2) + "\n");
}

ClusterModel load_cluster_model(const std::filesystem::path& prefix) {
    const std::string base = prefix.string();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(base + ".clusters.json"));
    } catch (const nlohmann::json::exception&) {
        throw FormatError("cluster header is not valid JSON: " + base + ".clusters.json");
    }
    ClusterModel m;
    std::size_t dim = 0;
    std::size_t vocab = 0;
    try {
        m.k = j.at("k").get<std::size_t>();
        dim = j.at("dim").get<std::size_t>();
        vocab = j.at("vocab_size").get<std::size_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.inertia = j.at("inertia").get<double>();
        if (j.contains("inertia_history")) m.inertia_history = j.at("inertia_history").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed cluster header: ") + e.what());
    }
    const std::string cbytes = read_file(base + ".centroids.bin");
    if (cbytes.size() != m.k * dim * 4) throw ConsistencyError("centroid payload size disagrees with k x dim");
    const auto cents = decode_f32le(cbytes);
    m.centroids = Matrix<double>(m.k, dim, std::vector<double>(cents.begin(), cents.end()));
    const std::string abytes = read_file(base + ".assign.bin");
    if (abytes.size() != vocab * 4) throw ConsistencyError("assignment payload size disagrees with vocab_size");
    m.assignments = decode_u32le(abytes);
    for (auto a : m.assignments) {
        if (a >= m.k) throw DataError("assignment outside [0, k)");
    }
    return m;
}

}  // namespace embedgeom
