#pragma once

#include "embedgeom/clustering.hpp"
#include "embedgeom/embedding_store.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace embedgeom {

struct AntonymPair {
    std::string word_a;
    std::string word_b;

    friend bool operator==(const AntonymPair&, const AntonymPair&) = default;
};

/// Reads a two-column TSV (`#` starts a comment line). Pairs are
/// deduplicated with (a, b) == (b, a); self-pairs are dropped.
/// Throws IoError when unreadable, FormatError on a malformed line.
std::vector<AntonymPair> load_antonyms(const std::filesystem::path& path);

/// Deduplicates in first-seen order.
std::vector<AntonymPair> dedupe_pairs(const std::vector<AntonymPair>& pairs);

/// A pair resolved to store rows.
struct TokenPair {
    std::size_t a = 0;
    std::size_t b = 0;
};

struct PairCoverage {
    std::size_t total = 0;
    std::size_t missing_word = 0;
    std::size_t cross_cluster = 0;
    std::size_t co_clustered = 0;
};

struct CoClusteredPairs {
    std::map<std::size_t, std::vector<TokenPair>> by_cluster;
    std::vector<TokenPair> cross_cluster;
    PairCoverage coverage;
};

/// Keeps pairs whose words are both stored tokens (exact string match) and
/// share a cluster.
CoClusteredPairs co_clustered_pairs(const std::vector<AntonymPair>& pairs, const EmbeddingStore& store,
                                    const ClusterModel& model);

/// First principal axis of {+(v(a) - v(b)), -(v(a) - v(b))}, unit length.
/// Throws InsufficientData for fewer than 2 pairs, DegenerateInput if every
/// difference vector is zero.
std::vector<double> polarity_axis(const std::vector<TokenPair>& pairs, MatrixView<float> points);

enum class SpanScope { members, pair };

struct ClusterPolarity {
    std::size_t cluster_id = 0;
    std::size_t n_pairs = 0;
    std::vector<double> axis;
    double span = 0.0;
    double radius = 0.0;
    double alpha = 0.0;
};

struct PolarityResult {
    std::vector<ClusterPolarity> per_cluster;
    double mean_alpha = 0.0;
    std::size_t n_alpha = 0;
    /// NaN when no pair of that kind exists.
    double same_cluster_pair_cos = 0.0;
    double cross_cluster_pair_cos = 0.0;
    PairCoverage coverage;
    SpanScope span_scope = SpanScope::members;
};

struct PolarityConfig {
    std::size_t min_pairs = 2;
    SpanScope span_scope = SpanScope::members;
};

/// alpha = span / radius for every cluster with at least `min_pairs`
/// co-clustered pairs. Span is the range of centroid-centered projections
/// onto the polarity axis (all members, or pair members only); radius is the
/// mean member distance from the centroid. Throws InsufficientData when no
/// cluster qualifies.
PolarityResult compute_alpha(const EmbeddingStore& store, const ClusterModel& model,
                             const std::vector<AntonymPair>& pairs, const PolarityConfig& config = {});

const char* to_string(SpanScope s);
SpanScope parse_span_scope(const std::string& s);

}  // namespace embedgeom
