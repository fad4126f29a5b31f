#pragma once

#include "embedgeom/cluster_cohesion.hpp"
#include "embedgeom/clustering.hpp"
#include "embedgeom/detector.hpp"
#include "embedgeom/embedding_store.hpp"
#include "embedgeom/polarity_coupling.hpp"
#include "embedgeom/radial_gradient.hpp"
#include "embedgeom/space_diagnostics.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace embedgeom {

/// Every knob of a full analysis run. Defaults: k 40, batch 1024, n_init 5,
/// seed 42, 40 bins with at least 10 tokens, 300-member cohesion samples,
/// top-5 membership.
struct RunConfig {
    std::size_t k = 40;
    std::size_t batch_size = 1024;
    std::size_t n_init = 5;
    std::uint64_t seed = 42;
    std::size_t n_bins = 40;
    std::size_t min_bin_count = 10;
    std::size_t sample_cap = 300;
    std::size_t top_m = 5;
    DetectorConfig percentiles;
    std::optional<std::filesystem::path> antonym_list_path;
    SpanScope span_scope = SpanScope::members;
    std::size_t pair_sample = 100000;
    bool center = true;

    KMeansConfig kmeans() const;
    RadialConfig radial() const;
    CohesionConfig cohesion() const;
    PolarityConfig polarity() const;
    DiagnosticsConfig diagnostics() const;
    DetectorConfig detector() const;
};

struct StageError {
    std::string stage;
    std::string error_name;
    std::string message;
};

/// One model's results. Scalar fields are NaN when their stage failed; the
/// failure is recorded in `errors`.
struct ModelReport {
    std::string model_name;
    std::size_t dim = 0;
    std::size_t token_count = 0;
    double lambda_r;
    double p_lambda;
    double r2_lin;
    double r2_quad;
    double f_stat;
    double aic_lin;
    double aic_quad;
    double beta_diff;
    double beta_p;
    double alpha_mean;
    std::size_t n_alpha = 0;
    bool significant = false;

    std::optional<RadialResult> radial;
    std::optional<BetaResult> beta_centroid;
    std::optional<BetaResult> beta_pairwise;
    std::optional<PolarityResult> polarity;
    std::optional<SpaceDiagnostics> diagnostics;
    std::vector<StageError> errors;

    ModelReport();
    bool ok() const { return errors.empty(); }
};

// ---- serialization ------------------------------------------------------------

nlohmann::ordered_json to_json(const RadialResult& r);
nlohmann::ordered_json to_json(const BetaResult& r);
nlohmann::ordered_json to_json(const PolarityResult& r);
nlohmann::ordered_json to_json(const SpaceDiagnostics& d);
nlohmann::ordered_json to_json(const ModelReport& r);
nlohmann::ordered_json to_json(const TokenVerdict& v);

/// Column names of the per-model results table, in order.
const std::vector<std::string>& table_columns();
std::string table_header();
std::string table_row(const ModelReport& r);
/// Row for a model whose analysis could not run at all.
std::string failed_table_row(const std::string& model_name);

/// p-values below 1e-3 render as "<0.001"; stored values keep full precision.
std::string format_p(double p);

/// File-system-safe stem for a model name.
std::string output_stem(const std::string& model_name);

// ---- pipeline --------------------------------------------------------------

/// Cluster model from `<out_dir>/<stem>.clusters.*` when it matches the
/// store and config, otherwise a fresh fit that is then cached there.
ClusterModel cached_or_fit(const EmbeddingStore& store, const RunConfig& config, const std::filesystem::path& out_dir);

/// Cluster -> radial -> cohesion -> polarity -> diagnostics on one store,
/// writing report JSON/CSV, the cluster model and all plot data into
/// `out_dir`. Stage failures are isolated and recorded.
ModelReport analyze_store(const EmbeddingStore& store, const RunConfig& config, const std::filesystem::path& out_dir);

struct AnalyzeOutcome {
    std::optional<ModelReport> report;
    std::vector<StageError> errors;
    int exit_code = 0;
};

/// Loads the store and runs analyze_store. Exit code 0 on success, 2 when
/// any stage failed, 1 when the store cannot be loaded.
AnalyzeOutcome run_analyze(const std::filesystem::path& store_path, const RunConfig& config,
                           const std::filesystem::path& out_dir);

struct SurveyRow {
    std::filesystem::path store_path;
    std::string model_name;
    std::optional<ModelReport> report;
    std::vector<StageError> errors;
    bool failed() const { return !report || !report->ok(); }
};

struct SurveyOutcome {
    std::vector<SurveyRow> rows;
    int exit_code = 0;
};

/// Analyzes every store (in parallel across models) into
/// `<out_dir>/<stem>/`, then writes `survey.csv` (one row per store in input
/// order) and `survey_lambda.csv`. A failing store does not stop the others;
/// the exit code is 2 if any row failed.
SurveyOutcome run_survey(std::span<const std::filesystem::path> store_paths, const RunConfig& config,
                         const std::filesystem::path& out_dir);

// ---- detection ------------------------------------------------------------

/// Flag counts plus the mean self-information of Type-1 tokens against all
/// tokens, a corroborating signal that is reported but never flags. Means
/// are NaN when no finite self-information is available.
struct DetectionSummary {
    std::size_t tokens = 0;
    std::size_t type1 = 0;
    std::size_t type2 = 0;
    std::size_t type3 = 0;
    double mean_info_all;
    double mean_info_type1;
};

DetectionSummary summarize_detection(const std::vector<TokenVerdict>& verdicts,
                                     std::span<const double> self_information);
nlohmann::ordered_json to_json(const DetectionSummary& s);

// ---- plot data ----------------------------------------------------------------

void emit_cohesion_plotdata(const BetaResult& centroid, const std::optional<BetaResult>& pairwise,
                            const std::filesystem::path& path);
void emit_polarity_plotdata(const PolarityResult& r, const std::filesystem::path& path);
/// Per-token zone scatter: position, h, norm, max_sim, self_information, flags.
void emit_zone_plotdata(const std::vector<TokenVerdict>& verdicts, std::span<const double> self_information,
                        const std::filesystem::path& path);
void write_verdicts_jsonl(const std::vector<TokenVerdict>& verdicts, const std::filesystem::path& path);

/// One plot-data producer per figure.
struct PlotEmitter {
    int figure;
    const char* content;
    std::vector<std::string> file_suffixes;  // appended to the model stem, or a fixed name for the survey
    const char* subcommand;
};

const std::vector<PlotEmitter>& plot_emitters();

}  // namespace embedgeom
