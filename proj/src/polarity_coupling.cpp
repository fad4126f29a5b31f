#include "embedgeom/polarity_coupling.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/io_util.hpp"
#include "embedgeom/kernels.hpp"
#include "embedgeom/numeric_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace embedgeom {
namespace {

double mean_or_nan(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::vector<double> pair_cos(const std::vector<TokenPair>& pairs, MatrixView<float> points) {
    std::vector<kernels::IndexPair> idx;
    idx.reserve(pairs.size());
    for (const auto& p : pairs) idx.emplace_back(p.a, p.b);
    return kernels::omp::pair_cosines(points, idx);
}

}  // namespace

const char* to_string(SpanScope s) { return s == SpanScope::members ? "members" : "pair"; }

SpanScope parse_span_scope(const std::string& s) {
    if (s == "members") return SpanScope::members;
    if (s == "pair") return SpanScope::pair;
    throw FormatError("span scope must be 'members' or 'pair', got '" + s + "'");
}

std::vector<AntonymPair> dedupe_pairs(const std::vector<AntonymPair>& pairs) {
    std::set<std::pair<std::string, std::string>> seen;
    std::vector<AntonymPair> out;
    for (const auto& p : pairs) {
        if (p.word_a == p.word_b) continue;
        auto key = std::minmax(p.word_a, p.word_b);
        if (seen.emplace(key.first, key.second).second) out.push_back(p);
    }
    return out;
}

std::vector<AntonymPair> load_antonyms(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<AntonymPair> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw FormatError("antonym line " + std::to_string(lineno) + " is not word_a<TAB>word_b");
        }
        AntonymPair p{line.substr(0, tab), line.substr(tab + 1)};
        if (p.word_a.empty() || p.word_b.empty()) {
            throw FormatError("antonym line " + std::to_string(lineno) + " has an empty word");
        }
        pairs.push_back(std::move(p));
    }
    return dedupe_pairs(pairs);
}

CoClusteredPairs co_clustered_pairs(const std::vector<AntonymPair>& pairs, const EmbeddingStore& store,
                                    const ClusterModel& model) {
    if (model.assignments.size() != store.vocab_size()) throw ConsistencyError("model was not fitted on this store");
    CoClusteredPairs out;
    for (const auto& p : pairs) {
        ++out.coverage.total;
        const auto a = store.find(p.word_a);
        const auto b = store.find(p.word_b);
        if (!a || !b) {
            ++out.coverage.missing_word;
            continue;
        }
        const auto ca = model.assignments[*a];
        if (ca == model.assignments[*b]) {
            out.by_cluster[ca].push_back({*a, *b});
            ++out.coverage.co_clustered;
        } else {
            out.cross_cluster.push_back({*a, *b});
            ++out.coverage.cross_cluster;
        }
    }
    return out;
}

std::vector<double> polarity_axis(const std::vector<TokenPair>& pairs, MatrixView<float> points) {
    if (pairs.size() < 2) throw InsufficientData("polarity axis needs at least 2 pairs");
    const std::size_t d = points.cols;
    Matrix<double> diffs(2 * pairs.size(), d);
    bool any = false;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto a = points.row(pairs[i].a);
        auto b = points.row(pairs[i].b);
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
            diffs(2 * i, j) = diff;
            diffs(2 * i + 1, j) = -diff;
            any = any || diff != 0.0;
        }
    }
    if (!any) throw DegenerateInput("all antonym difference vectors are zero");
    const auto pca = stats::pca_top(diffs.view(), 1, true);
    auto row = pca.axes.row(0);
    return {row.begin(), row.end()};
}

PolarityResult compute_alpha(const EmbeddingStore& store, const ClusterModel& model,
                             const std::vector<AntonymPair>& pairs, const PolarityConfig& config) {
    const auto points = store.view();
    const auto grouped = co_clustered_pairs(pairs, store, model);
    const auto members = model.members();
    const std::size_t d = store.dim();

    PolarityResult out;
    out.coverage = grouped.coverage;
    out.span_scope = config.span_scope;

    std::vector<TokenPair> same;
    for (const auto& [cluster, cps] : grouped.by_cluster) {
        same.insert(same.end(), cps.begin(), cps.end());
        if (cps.size() < std::max<std::size_t>(config.min_pairs, 2)) continue;

        ClusterPolarity cp;
        cp.cluster_id = cluster;
        cp.n_pairs = cps.size();
        cp.axis = polarity_axis(cps, points);
        auto centroid = model.centroids.row(cluster);

        std::vector<std::size_t> span_rows;
        if (config.span_scope == SpanScope::members) {
            span_rows = members[cluster];
        } else {
            for (const auto& p : cps) {
                span_rows.push_back(p.a);
                span_rows.push_back(p.b);
            }
        }
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (auto i : span_rows) {
            auto x = points.row(i);
            double proj = 0.0;
            for (std::size_t j = 0; j < d; ++j) proj += (static_cast<double>(x[j]) - centroid[j]) * cp.axis[j];
            lo = std::min(lo, proj);
            hi = std::max(hi, proj);
        }
        double dist_sum = 0.0;
        for (auto i : members[cluster]) {
            auto x = points.row(i);
            double d2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = static_cast<double>(x[j]) - centroid[j];
                d2 += diff * diff;
            }
            dist_sum += std::sqrt(d2);
        }
        cp.span = hi - lo;
        cp.radius = dist_sum / static_cast<double>(members[cluster].size());
        if (!(cp.radius > 0.0)) continue;
        cp.alpha = cp.span / cp.radius;
        out.per_cluster.push_back(std::move(cp));
    }
    if (out.per_cluster.empty()) {
        throw InsufficientData("no cluster holds " + std::to_string(config.min_pairs) + " co-clustered antonym pairs");
    }
    out.n_alpha = out.per_cluster.size();
    double s = 0.0;
    for (const auto& cp : out.per_cluster) s += cp.alpha;
    out.mean_alpha = s / static_cast<double>(out.n_alpha);
    out.same_cluster_pair_cos = mean_or_nan(pair_cos(same, points));
    out.cross_cluster_pair_cos = mean_or_nan(pair_cos(grouped.cross_cluster, points));
    return out;
}

}  // namespace embedgeom
