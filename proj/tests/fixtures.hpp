#pragma once

#include "embedgeom/clustering.hpp"
#include "embedgeom/embedding_store.hpp"
#include "embedgeom/matrix.hpp"
#include "embedgeom/polarity_coupling.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using embedgeom::EmbeddingStore;
using embedgeom::Matrix;

inline std::vector<std::string> token_names(std::size_t n, const std::string& prefix = "t") {
    std::vector<std::string> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = prefix + std::to_string(i);
    return out;
}

/// Store whose self-information column is `infos` (bits, all >= 0).
inline EmbeddingStore store_with_infos(const std::string& name, Matrix<float> m, const std::vector<double>& infos) {
    std::vector<double> freq(infos.size());
    for (std::size_t i = 0; i < infos.size(); ++i) freq[i] = std::exp2(-infos[i]);
    return EmbeddingStore::from_frequencies(name, std::move(m), token_names(freq.size()), freq);
}

/// Store with a flat 1e-4 frequency for every token.
inline EmbeddingStore plain_store(const std::string& name, Matrix<float> m) {
    std::vector<double> freq(m.rows(), 1e-4);
    const auto n = m.rows();
    return EmbeddingStore::from_frequencies(name, std::move(m), token_names(n), freq);
}

struct Blobs {
    Matrix<float> points;
    std::vector<std::uint32_t> labels;
    Matrix<double> centers;
};

/// `k` isotropic Gaussian blobs of `n_per` points with standard deviation
/// `sigma`, centred at `separation * sigma` along distinct coordinate axes
/// (k <= d), so every pair of centres is at least `separation * sigma` apart.
inline Blobs axis_blobs(std::size_t k, std::size_t n_per, std::size_t d, double separation, double sigma,
                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    Blobs b;
    b.points = Matrix<float>(k * n_per, d);
    b.labels.resize(k * n_per);
    b.centers = Matrix<double>(k, d);
    for (std::size_t c = 0; c < k; ++c) b.centers(c, c % d) = separation * sigma;
    // Interleave blobs so row order carries no label information.
    for (std::size_t i = 0; i < k * n_per; ++i) {
        const std::size_t c = i % k;
        b.labels[i] = static_cast<std::uint32_t>(c);
        for (std::size_t j = 0; j < d; ++j) b.points(i, j) = static_cast<float>(b.centers(c, j) + g(rng));
    }
    return b;
}

/// Uniformly random unit direction in d dimensions.
inline std::vector<double> random_direction(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(d);
    double nn = 0.0;
    do {
        nn = 0.0;
        for (auto& x : v) {
            x = g(rng);
            nn += x * x;
        }
    } while (nn == 0.0);
    const double s = 1.0 / std::sqrt(nn);
    for (auto& x : v) x *= s;
    return v;
}

/// Rows with prescribed norms along random directions.
inline Matrix<float> rows_with_norms(const std::vector<double>& norms, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Matrix<float> m(norms.size(), d);
    for (std::size_t i = 0; i < norms.size(); ++i) {
        const auto u = random_direction(d, rng);
        for (std::size_t j = 0; j < d; ++j) m(i, j) = static_cast<float>(norms[i] * u[j]);
    }
    return m;
}

/// Norms actually stored (after f32 rounding), in double.
inline std::vector<double> stored_norms(const Matrix<float>& m) {
    std::vector<double> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (float v : m.row(i)) s += static_cast<double>(v) * v;
        out[i] = std::sqrt(s);
    }
    return out;
}

/// Population of well-formed tokens for detector tests: `families`
/// orthogonal family directions scaled by 10, `per_family` clusters per
/// family offset by 3 along random directions in the remaining coordinates,
/// and Gaussian members (sd 0.3 per coordinate) around each cluster centre.
struct DetectorPopulation {
    Matrix<float> points;
    std::vector<std::uint32_t> labels;
    Matrix<double> centers;
};

inline DetectorPopulation detector_population(std::size_t d, std::size_t families, std::size_t per_family,
                                              std::size_t members, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t k = families * per_family;
    DetectorPopulation p;
    p.centers = Matrix<double>(k, d);
    for (std::size_t f = 0; f < families; ++f) {
        for (std::size_t c = 0; c < per_family; ++c) {
            const std::size_t id = f * per_family + c;
            p.centers(id, f) = 10.0;
            std::vector<double> off(d - families);
            double n = 0.0;
            for (auto& v : off) {
                v = g(rng);
                n += v * v;
            }
            for (std::size_t j = 0; j < off.size(); ++j) p.centers(id, families + j) = 3.0 * off[j] / std::sqrt(n);
        }
    }
    p.points = Matrix<float>(k * members, d);
    p.labels.resize(k * members);
    for (std::size_t i = 0; i < k * members; ++i) {
        const std::size_t c = i % k;
        p.labels[i] = static_cast<std::uint32_t>(c);
        for (std::size_t j = 0; j < d; ++j) p.points(i, j) = static_cast<float>(p.centers(c, j) + 0.3 * g(rng));
    }
    return p;
}

/// Center-drift tokens: the global mean direction, slightly perturbed, with
/// norms drawn below `norm_ceiling`.
inline Matrix<float> planted_center_drift(const Matrix<float>& base, std::size_t n, double norm_ceiling,
                                          std::uint64_t seed) {
    const std::size_t d = base.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < base.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += base(i, j);
    }
    double mn = 0.0;
    for (double v : mean) mn += v * v;
    mn = std::sqrt(mn);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.05);
    std::uniform_real_distribution<double> scale(0.2, 0.9);
    Matrix<float> out(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(d);
        double vn = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            v[j] = mean[j] / mn + g(rng);
            vn += v[j] * v[j];
        }
        const double target = scale(rng) * norm_ceiling;
        for (std::size_t j = 0; j < d; ++j) out(i, j) = static_cast<float>(v[j] / std::sqrt(vn) * target);
    }
    return out;
}

/// Coverage-gap tokens: random vectors in the orthogonal complement of the
/// given centroids, scaled to `norm`.
inline Matrix<float> planted_coverage_gap(const Matrix<double>& centroids, std::size_t n, double norm,
                                          std::uint64_t seed) {
    const std::size_t d = centroids.cols();
    // Orthonormal basis of the centroid span.
    std::vector<std::vector<double>> basis;
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        std::vector<double> v(centroids.row(c).begin(), centroids.row(c).end());
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += v[j] * b[j];
                for (std::size_t j = 0; j < d; ++j) v[j] -= dot * b[j];
            }
        }
        double vn = 0.0;
        for (double x : v) vn += x * x;
        if (vn < 1e-18) continue;
        for (auto& x : v) x /= std::sqrt(vn);
        basis.push_back(v);
    }
    std::mt19937_64 rng(seed);
    Matrix<float> out(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto v = random_direction(d, rng);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += v[j] * b[j];
                for (std::size_t j = 0; j < d; ++j) v[j] -= dot * b[j];
            }
        }
        double vn = 0.0;
        for (double x : v) vn += x * x;
        for (std::size_t j = 0; j < d; ++j) out(i, j) = static_cast<float>(v[j] / std::sqrt(vn) * norm);
    }
    return out;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("embedgeom_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

struct PlantedPolarity {
    EmbeddingStore store;
    embedgeom::ClusterModel model;
    std::vector<embedgeom::AntonymPair> pairs;
    std::vector<double> axis;
};

// Cluster 0: points on the unit sphere around mu, in antipodal pairs, with
// antonym pairs lying close to a planted axis and two members exactly at
// mu +/- axis. Cluster 1 sits far away and carries no pairs.
inline PlantedPolarity planted_polarity_sphere(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const auto axis = random_direction(d, rng);
    std::vector<double> mu(d);
    for (auto& v : mu) v = 3.0 * g(rng);

    std::vector<std::vector<double>> offsets;
    offsets.push_back(axis);
    for (int p = 0; p < 6; ++p) {
        std::vector<double> w(d);
        double n = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            w[j] = axis[j] + 0.05 * g(rng);
            n += w[j] * w[j];
        }
        for (auto& v : w) v /= std::sqrt(n);
        offsets.push_back(w);
    }
    const std::size_t n_pairs = offsets.size();
    for (int extra = 0; extra < 60; ++extra) {
        auto w = random_direction(d, rng);
        // Skip directions that would rival the planted axis.
        double proj = 0.0;
        for (std::size_t j = 0; j < d; ++j) proj += w[j] * axis[j];
        if (std::abs(proj) > 0.9) continue;
        offsets.push_back(w);
    }

    const std::size_t n0 = 2 * offsets.size();
    const std::size_t n1 = 20;
    Matrix<float> m(n0 + n1, d);
    std::vector<std::string> names;
    std::vector<std::uint32_t> labels;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        for (int s : {1, -1}) {
            const std::size_t row = names.size();
            for (std::size_t j = 0; j < d; ++j) m(row, j) = static_cast<float>(mu[j] + s * offsets[i][j]);
            names.push_back((s > 0 ? "pos" : "neg") + std::to_string(i));
            labels.push_back(0);
        }
    }
    for (std::size_t i = 0; i < n1; ++i) {
        const std::size_t row = names.size();
        for (std::size_t j = 0; j < d; ++j) m(row, j) = static_cast<float>(-mu[j] + 0.5 * g(rng));
        names.push_back("far" + std::to_string(i));
        labels.push_back(1);
    }
    auto model = embedgeom::model_from_assignments(m.view(), labels, 2);
    std::vector<embedgeom::AntonymPair> pairs;
    for (std::size_t i = 0; i < n_pairs; ++i) pairs.push_back({"pos" + std::to_string(i), "neg" + std::to_string(i)});
    std::vector<double> freq(names.size(), 1e-3);
    auto store = EmbeddingStore::from_frequencies("p", std::move(m), names, freq);
    return {std::move(store), std::move(model), pairs, axis};
}

/// Four directional blobs in 8-D with norms spread over [5, 15] and a
/// concave information profile in the norm.
inline EmbeddingStore analysis_store(const std::string& name, std::uint64_t seed) {
    auto blobs = axis_blobs(4, 250, 8, 10.0, 1.0, seed);
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(5.0, 15.0);
    std::normal_distribution<double> noise(0.0, 0.2);
    std::vector<double> infos(blobs.points.rows());
    for (std::size_t i = 0; i < blobs.points.rows(); ++i) {
        double n2 = 0.0;
        for (float x : blobs.points.row(i)) n2 += double(x) * x;
        const double r = u(rng);
        const double s = r / std::sqrt(n2);
        for (auto& x : blobs.points.row(i)) x = static_cast<float>(x * s);
        infos[i] = 40.0 - 0.1 * (r - 10.0) * (r - 10.0) + noise(rng);
    }
    return store_with_infos(name, std::move(blobs.points), infos);
}

/// Pairs (t_i, t_{i+4}) share a blob label, so they co-cluster.
inline std::filesystem::path write_antonyms(const std::filesystem::path& dir) {
    const auto path = dir / "antonyms.tsv";
    std::ofstream out(path);
    out << "# toy antonym pairs\n";
    for (int i = 0; i < 40; ++i) out << 't' << i << '\t' << 't' << i + 4 << '\n';
    return path;
}

}  // namespace fixtures
