#include "embedgeom/report.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/io_util.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace embedgeom {
namespace {

using json = nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// nlohmann writes non-finite numbers as null; keep that explicit.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json fit_json(const stats::PolyFit& f) {
    json j;
    j["degree"] = f.degree;
    j["coefficients"] = json::array();
    for (double c : f.coefficients) j["coefficients"].push_back(num(c));
    j["ss_res"] = num(f.ss_res);
    j["r_squared"] = num(f.r_squared);
    return j;
}

std::string csv_num(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

template <typename Fn>
void run_stage(const char* stage, std::vector<StageError>& errors, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        errors.push_back({stage, e.name(), e.what()});
    } catch (const std::exception& e) {
        errors.push_back({stage, "Error", e.what()});
    }
}

}  // namespace

KMeansConfig RunConfig::kmeans() const {
    KMeansConfig c;
    c.k = k;
    c.batch_size = batch_size;
    c.n_init = n_init;
    c.seed = seed;
    return c;
}

RadialConfig RunConfig::radial() const {
    RadialConfig c;
    c.n_bins = n_bins;
    c.min_count = min_bin_count;
    return c;
}

CohesionConfig RunConfig::cohesion() const {
    CohesionConfig c;
    c.sample_cap = sample_cap;
    c.seed = seed;
    return c;
}

PolarityConfig RunConfig::polarity() const {
    PolarityConfig c;
    c.span_scope = span_scope;
    return c;
}

DiagnosticsConfig RunConfig::diagnostics() const {
    DiagnosticsConfig c;
    c.pair_sample = pair_sample;
    c.seed = seed;
    c.center = center;
    return c;
}

DetectorConfig RunConfig::detector() const {
    DetectorConfig c = percentiles;
    c.top_m = top_m;
    c.seed = seed;
    return c;
}

ModelReport::ModelReport()
    : lambda_r(kNaN),
      p_lambda(kNaN),
      r2_lin(kNaN),
      r2_quad(kNaN),
      f_stat(kNaN),
      aic_lin(kNaN),
      aic_quad(kNaN),
      beta_diff(kNaN),
      beta_p(kNaN),
      alpha_mean(kNaN) {}

json to_json(const RadialResult& r) {
    json j;
    j["lambda_r"] = num(r.lambda_r);
    j["significant"] = r.significant;
    j["f_test"] = {{"f_stat", num(r.f_test.f_stat)},
                   {"p_value", num(r.f_test.p_value)},
                   {"df_num", r.f_test.df_num},
                   {"df_den", r.f_test.df_den},
                   {"perfect_fit", r.f_test.perfect_fit}};
    j["aic_lin"] = num(r.aic_lin);
    j["aic_quad"] = num(r.aic_quad);
    j["fit_lin"] = fit_json(r.fit_lin);
    j["fit_quad"] = fit_json(r.fit_quad);
    j["fit_cubic"] = r.fit_cubic ? fit_json(*r.fit_cubic) : json(nullptr);
    j["bins"] = json::array();
    for (const auto& b : r.bins) {
        j["bins"].push_back({{"lower", num(b.lower)},
                             {"upper", num(b.upper)},
                             {"mean_norm", num(b.mean_norm)},
                             {"mean_info", num(b.mean_info)},
                             {"count", b.count}});
    }
    return j;
}

json to_json(const BetaResult& r) {
    json j;
    j["variant"] = to_string(r.variant);
    j["mean_beta"] = num(r.mean_beta);
    j["t_stat"] = num(r.t_stat);
    j["p_value"] = num(r.p_value);
    j["mean_own_sim"] = num(r.mean_own_sim);
    j["mean_other_sim"] = num(r.mean_other_sim);
    j["sample_cap"] = r.sample_cap;
    j["seed"] = r.seed;
    j["clusters"] = r.clusters;
    j["per_cluster"] = json::array();
    for (double b : r.per_cluster) j["per_cluster"].push_back(num(b));
    return j;
}

json to_json(const PolarityResult& r) {
    json j;
    j["mean_alpha"] = num(r.mean_alpha);
    j["n_alpha"] = r.n_alpha;
    j["span_scope"] = to_string(r.span_scope);
    j["same_cluster_pair_cos"] = num(r.same_cluster_pair_cos);
    j["cross_cluster_pair_cos"] = num(r.cross_cluster_pair_cos);
    j["coverage"] = {{"total", r.coverage.total},
                     {"missing_word", r.coverage.missing_word},
                     {"cross_cluster", r.coverage.cross_cluster},
                     {"co_clustered", r.coverage.co_clustered}};
    j["per_cluster"] = json::array();
    for (const auto& c : r.per_cluster) {
        json e;
        e["cluster_id"] = c.cluster_id;
        e["n_pairs"] = c.n_pairs;
        e["span"] = num(c.span);
        e["radius"] = num(c.radius);
        e["alpha"] = num(c.alpha);
        e["axis"] = json::array();
        for (double a : c.axis) e["axis"].push_back(num(a));
        j["per_cluster"].push_back(std::move(e));
    }
    return j;
}

json to_json(const SpaceDiagnostics& d) {
    json j;
    j["nominal_dim"] = d.nominal_dim;
    j["effective_dim_95"] = d.effective_dim_95;
    j["utilization"] = num(d.utilization);
    j["norm_cov"] = num(d.norm_cov);
    j["mean_pairwise_cos"] = num(d.mean_pairwise_cos);
    j["pca_cumulative"] = json::array();
    for (double c : d.pca_cumulative) j["pca_cumulative"].push_back(num(c));
    return j;
}

json to_json(const ModelReport& r) {
    json j;
    j["model_name"] = r.model_name;
    j["dim"] = r.dim;
    j["token_count"] = r.token_count;
    j["lambda_r"] = num(r.lambda_r);
    j["p_lambda"] = num(r.p_lambda);
    j["r2_lin"] = num(r.r2_lin);
    j["r2_quad"] = num(r.r2_quad);
    j["f_stat"] = num(r.f_stat);
    j["aic_lin"] = num(r.aic_lin);
    j["aic_quad"] = num(r.aic_quad);
    j["beta_diff"] = num(r.beta_diff);
    j["beta_p"] = num(r.beta_p);
    j["alpha_mean"] = num(r.alpha_mean);
    j["n_alpha"] = r.n_alpha;
    j["significant"] = r.significant;
    j["diagnostics"] = r.diagnostics ? to_json(*r.diagnostics) : json(nullptr);
    j["radial"] = r.radial ? to_json(*r.radial) : json(nullptr);
    j["beta_centroid"] = r.beta_centroid ? to_json(*r.beta_centroid) : json(nullptr);
    j["beta_pairwise"] = r.beta_pairwise ? to_json(*r.beta_pairwise) : json(nullptr);
    j["polarity"] = r.polarity ? to_json(*r.polarity) : json(nullptr);
    j["errors"] = json::array();
    for (const auto& e : r.errors) {
        j["errors"].push_back({{"stage", e.stage}, {"error", e.error_name}, {"message", e.message}});
    }
    return j;
}

json to_json(const TokenVerdict& v) {
    json j;
    j["position"] = v.position;
    j["h"] = num(v.h);
    j["norm"] = num(v.norm);
    j["max_sim"] = num(v.max_sim);
    j["density"] = num(v.density);
    j["cluster"] = v.argmax_cluster;
    j["flags"] = json::array();
    if (v.type1()) j["flags"].push_back("type1");
    if (v.type2()) j["flags"].push_back("type2");
    if (v.type3()) j["flags"].push_back("type3");
    return j;
}

const std::vector<std::string>& table_columns() {
    static const std::vector<std::string> cols{"Model",   "Dim",     "Tokens", "λ_r", "p-value", "R²_lin",
                                               "R²_quad", "β_diff",  "α",      "n_α", "Sig."};
    return cols;
}

std::string table_header() {
    std::string out;
    for (const auto& c : table_columns()) {
        if (!out.empty()) out += ',';
        out += c;
    }
    return out + '\n';
}

std::string format_p(double p) {
    if (!std::isfinite(p)) return {};
    if (p < 1e-3) return "<0.001";
    return format_double(p);
}

std::string table_row(const ModelReport& r) {
    std::string row = r.model_name;
    row += ',' + std::to_string(r.dim);
    row += ',' + std::to_string(r.token_count);
    row += ',' + csv_num(r.lambda_r);
    row += ',' + format_p(r.p_lambda);
    row += ',' + csv_num(r.r2_lin);
    row += ',' + csv_num(r.r2_quad);
    row += ',' + csv_num(r.beta_diff);
    row += ',' + csv_num(r.alpha_mean);
    row += ',' + (r.polarity ? std::to_string(r.n_alpha) : std::string());
    row += ',';
    row += r.radial ? (r.significant ? "yes" : "no") : "";
    return row + '\n';
}

std::string failed_table_row(const std::string& model_name) {
    return model_name + ",,,,,,,,,,FAILED\n";
}

std::string output_stem(const std::string& model_name) {
    std::string s;
    for (char c : model_name) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        s += keep ? c : '_';
    }
    return s.empty() ? std::string("model") : s;
}

ClusterModel cached_or_fit(const EmbeddingStore& store, const RunConfig& config, const std::filesystem::path& out_dir) {
    const auto prefix = out_dir / output_stem(store.model_name());
    if (std::filesystem::exists(prefix.string() + ".clusters.json")) {
        try {
            auto m = load_cluster_model(prefix);
            if (m.k == config.k && m.seed == config.seed && m.dim() == store.dim() &&
                m.assignments.size() == store.vocab_size()) {
                return m;
            }
        } catch (const Error&) {
            // stale or corrupt cache: refit below
        }
    }
    auto m = fit_minibatch_kmeans(store, config.kmeans());
    std::filesystem::create_directories(out_dir);
    save_cluster_model(m, prefix);
    return m;
}

ModelReport analyze_store(const EmbeddingStore& store, const RunConfig& config, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string stem = (out_dir / output_stem(store.model_name())).string();

    ModelReport rep;
    rep.model_name = store.model_name();
    rep.dim = store.dim();
    rep.token_count = store.vocab_size();

    std::optional<ClusterModel> model;
    run_stage("cluster", rep.errors, [&] {
        model = cached_or_fit(store, config, out_dir);
    });

    run_stage("radial", rep.errors, [&] {
        rep.radial = compute_lambda_r(store, config.radial());
        const auto& r = *rep.radial;
        rep.lambda_r = r.lambda_r;
        rep.p_lambda = r.f_test.p_value;
        rep.r2_lin = r.fit_lin.r_squared;
        rep.r2_quad = r.fit_quad.r_squared;
        rep.f_stat = r.f_test.f_stat;
        rep.aic_lin = r.aic_lin;
        rep.aic_quad = r.aic_quad;
        rep.significant = r.significant;
        emit_radial_plotdata(r, stem + ".radial.csv");
    });

    if (model) {
        run_stage("cohesion", rep.errors, [&] {
            rep.beta_centroid = compute_beta_centroid(store, *model, config.cohesion());
            rep.beta_diff = rep.beta_centroid->mean_beta;
            rep.beta_p = rep.beta_centroid->p_value;
        });
        run_stage("cohesion_pairwise", rep.errors,
                  [&] { rep.beta_pairwise = compute_beta_pairwise(store, *model, config.cohesion()); });
        if (rep.beta_centroid) {
            run_stage("cohesion", rep.errors,
                      [&] { emit_cohesion_plotdata(*rep.beta_centroid, rep.beta_pairwise, stem + ".cohesion.csv"); });
        }
        run_stage("polarity", rep.errors, [&] {
            std::vector<AntonymPair> pairs;
            if (config.antonym_list_path) {
                try {
                    pairs = load_antonyms(*config.antonym_list_path);
                } catch (const IoError& e) {
                    throw InsufficientData(std::string("antonym list unavailable: ") + e.what());
                }
            }
            if (pairs.empty()) throw InsufficientData("no antonym pairs supplied");
            rep.polarity = compute_alpha(store, *model, pairs, config.polarity());
            rep.alpha_mean = rep.polarity->mean_alpha;
            rep.n_alpha = rep.polarity->n_alpha;
            emit_polarity_plotdata(*rep.polarity, stem + ".polarity.csv");
        });
    }

    run_stage("diagnostics", rep.errors, [&] {
        rep.diagnostics = diagnose_space(store, config.diagnostics());
        emit_pca_plotdata(*rep.diagnostics, stem + ".pca.csv");
    });

    write_file_atomic(stem + ".report.json", to_json(rep).dump(2) + "\n");
    write_file_atomic(stem + ".report.csv", table_header() + table_row(rep));
    return rep;
}

AnalyzeOutcome run_analyze(const std::filesystem::path& store_path, const RunConfig& config,
                           const std::filesystem::path& out_dir) {
    AnalyzeOutcome out;
    std::optional<EmbeddingStore> store;
    run_stage("load", out.errors, [&] { store.emplace(load_store(store_path)); });
    if (!store) {
        out.exit_code = 1;
        return out;
    }
    out.report = analyze_store(*store, config, out_dir);
    out.errors = out.report->errors;
    out.exit_code = out.errors.empty() ? 0 : 2;
    return out;
}

SurveyOutcome run_survey(std::span<const std::filesystem::path> store_paths, const RunConfig& config,
                         const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    SurveyOutcome out;
    out.rows.resize(store_paths.size());
    const auto n = static_cast<std::ptrdiff_t>(store_paths.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
        auto& row = out.rows[static_cast<std::size_t>(ii)];
        row.store_path = store_paths[static_cast<std::size_t>(ii)];
        row.model_name = row.store_path.filename().string();
        try {
            const EmbeddingStore store = load_store(row.store_path);
            row.model_name = store.model_name();
            row.report = analyze_store(store, config, out_dir / output_stem(store.model_name()));
            row.errors = row.report->errors;
        } catch (const Error& e) {
            row.errors.push_back({"load", e.name(), e.what()});
        } catch (const std::exception& e) {
            row.errors.push_back({"load", "Error", e.what()});
        }
    }

    std::string csv = table_header();
    std::string lambda = "model,lambda_r,p_value,significant,color,r2_lin,r2_quad\n";
    for (const auto& row : out.rows) {
        if (row.failed()) out.exit_code = 2;
        if (!row.report || !row.report->radial) {
            csv += row.report ? table_row(*row.report) : failed_table_row(row.model_name);
            continue;
        }
        const auto& r = *row.report;
        csv += table_row(r);
        lambda += r.model_name + ',' + csv_num(r.lambda_r) + ',' + csv_num(r.p_lambda) + ',' +
                  (r.significant ? "true" : "false") + ',' + (r.significant ? "green" : "red") + ',' +
                  csv_num(r.r2_lin) + ',' + csv_num(r.r2_quad) + '\n';
    }
    write_file_atomic(out_dir / "survey.csv", csv);
    write_file_atomic(out_dir / "survey_lambda.csv", lambda);
    return out;
}

DetectionSummary summarize_detection(const std::vector<TokenVerdict>& verdicts,
                                     std::span<const double> self_information) {
    DetectionSummary s;
    s.tokens = verdicts.size();
    double sum_all = 0.0, sum_t1 = 0.0;
    std::size_t n_all = 0, n_t1 = 0;
    for (const auto& v : verdicts) {
        s.type1 += v.type1() ? 1 : 0;
        s.type2 += v.type2() ? 1 : 0;
        s.type3 += v.type3() ? 1 : 0;
        if (v.position >= self_information.size() || !std::isfinite(self_information[v.position])) continue;
        const double info = self_information[v.position];
        sum_all += info;
        ++n_all;
        if (v.type1()) {
            sum_t1 += info;
            ++n_t1;
        }
    }
    s.mean_info_all = n_all ? sum_all / static_cast<double>(n_all) : kNaN;
    s.mean_info_type1 = n_t1 ? sum_t1 / static_cast<double>(n_t1) : kNaN;
    return s;
}

json to_json(const DetectionSummary& s) {
    json j;
    j["tokens"] = s.tokens;
    j["type1"] = s.type1;
    j["type2"] = s.type2;
    j["type3"] = s.type3;
    j["mean_info_all"] = num(s.mean_info_all);
    j["mean_info_type1"] = num(s.mean_info_type1);
    return j;
}

void emit_cohesion_plotdata(const BetaResult& centroid, const std::optional<BetaResult>& pairwise,
                            const std::filesystem::path& path) {
    std::string csv = "cluster,beta_centroid,beta_pairwise\n";
    for (std::size_t i = 0; i < centroid.clusters.size(); ++i) {
        const auto c = centroid.clusters[i];
        double pw = kNaN;
        if (pairwise) {
            for (std::size_t j = 0; j < pairwise->clusters.size(); ++j) {
                if (pairwise->clusters[j] == c) pw = pairwise->per_cluster[j];
            }
        }
        csv += std::to_string(c) + ',' + csv_num(centroid.per_cluster[i]) + ',' + csv_num(pw) + '\n';
    }
    write_file_atomic(path, csv);
}

void emit_polarity_plotdata(const PolarityResult& r, const std::filesystem::path& path) {
    std::string csv = "cluster,n_pairs,span,radius,alpha\n";
    for (const auto& c : r.per_cluster) {
        csv += std::to_string(c.cluster_id) + ',' + std::to_string(c.n_pairs) + ',' + csv_num(c.span) + ',' +
               csv_num(c.radius) + ',' + csv_num(c.alpha) + '\n';
    }
    write_file_atomic(path, csv);
}

void emit_zone_plotdata(const std::vector<TokenVerdict>& verdicts, std::span<const double> self_information,
                        const std::filesystem::path& path) {
    std::string csv = "position,h,norm,max_sim,self_information,type1,type2,type3\n";
    for (const auto& v : verdicts) {
        const double info = v.position < self_information.size() ? self_information[v.position] : kNaN;
        csv += std::to_string(v.position) + ',' + csv_num(v.h) + ',' + csv_num(v.norm) + ',' + csv_num(v.max_sim) +
               ',' + csv_num(info) + ',' + (v.type1() ? '1' : '0') + ',' + (v.type2() ? '1' : '0') + ',' +
               (v.type3() ? '1' : '0') + '\n';
    }
    write_file_atomic(path, csv);
}

void write_verdicts_jsonl(const std::vector<TokenVerdict>& verdicts, const std::filesystem::path& path) {
    std::string out;
    for (const auto& v : verdicts) out += to_json(v).dump() + '\n';
    write_file_atomic(path, out);
}

const std::vector<PlotEmitter>& plot_emitters() {
    static const std::vector<PlotEmitter> emitters{
        {1, "per-token zone scatter (h, norm, max_sim, self-information, flags)", {".zones.csv"}, "detect"},
        {2, "radial profile with linear/quadratic fits and residuals", {".radial.csv", ".radial_curves.csv"},
         "analyze"},
        {3, "degree 1-3 radial fits and cumulative PCA variance", {".radial.csv", ".pca.csv"}, "analyze"},
        {4, "per-cluster alpha and beta (both variants) distributions", {".polarity.csv", ".cohesion.csv"},
         "analyze"},
        {5, "lambda_r and R^2 across models with significance colour", {"survey_lambda.csv"}, "survey"},
    };
    return emitters;
}

}  // namespace embedgeom
