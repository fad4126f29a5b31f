#include "embedgeom/errors.hpp"
#include "embedgeom/io_util.hpp"
#include "embedgeom/kernels.hpp"
#include "embedgeom/report.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace embedgeom;

namespace {

struct Options {
    RunConfig config;
    fs::path out_dir = "out";
    std::string span_scope = "members";
    bool no_center = false;
    fs::path store;
    std::vector<fs::path> stores;
    std::optional<fs::path> queries;
    std::optional<fs::path> thresholds;
};

void add_common(CLI::App* app, Options& o) {
    app->add_option("--k", o.config.k, "number of clusters")->check(CLI::PositiveNumber);
    app->add_option("--batch-size", o.config.batch_size, "mini-batch size")->check(CLI::PositiveNumber);
    app->add_option("--n-init", o.config.n_init, "k-means restarts")->check(CLI::PositiveNumber);
    app->add_option("--seed", o.config.seed, "master seed");
    app->add_option("--out-dir", o.out_dir, "output directory");
}

void add_radial(CLI::App* app, Options& o) {
    app->add_option("--n-bins", o.config.n_bins, "equal-width norm bins")->check(CLI::PositiveNumber);
    app->add_option("--min-bin-count", o.config.min_bin_count, "minimum tokens per retained bin");
}

void add_cohesion(CLI::App* app, Options& o) {
    app->add_option("--sample-cap", o.config.sample_cap, "members sampled per cluster")->check(CLI::PositiveNumber);
}

void add_polarity(CLI::App* app, Options& o) {
    app->add_option("--antonyms", o.config.antonym_list_path, "antonym pair TSV");
    app->add_option("--span-scope", o.span_scope, "members or pair")->check(CLI::IsMember({"members", "pair"}));
}

void add_diagnostics(CLI::App* app, Options& o) {
    app->add_option("--pair-sample", o.config.pair_sample, "random pairs for mean cosine");
    app->add_flag("--no-center", o.no_center, "PCA on uncentered vectors");
}

void add_detector(CLI::App* app, Options& o) {
    auto& p = o.config.percentiles;
    app->add_option("--top-m", o.config.top_m, "centroids averaged in membership")->check(CLI::PositiveNumber);
    app->add_option("--q-h", p.q_h, "membership percentile")->check(CLI::Range(0.0, 100.0));
    app->add_option("--q-norm", p.q_norm, "norm percentile")->check(CLI::Range(0.0, 100.0));
    app->add_option("--q-maxsim", p.q_maxsim, "max-sim percentile")->check(CLI::Range(0.0, 100.0));
    app->add_option("--q-jump", p.q_jump, "centroid-cosine percentile")->check(CLI::Range(0.0, 100.0));
    app->add_option("--q-density", p.q_density, "kNN density percentile")->check(CLI::Range(0.0, 100.0));
    app->add_option("--q-confidence", p.q_confidence, "confidence percentile")->check(CLI::Range(0.0, 100.0));
    app->add_option("--k-neighbors", p.k_neighbors, "neighbours in kNN density")->check(CLI::PositiveNumber);
    app->add_option("--density-sample", p.density_sample, "reference rows for kNN density")
        ->check(CLI::PositiveNumber);
}

void print_errors(const std::vector<StageError>& errors, const std::string& prefix = {}) {
    for (const auto& e : errors) {
        std::cerr << prefix << e.stage << ": " << e.error_name << ": " << e.message << '\n';
    }
}

std::string stem_path(const Options& o, const EmbeddingStore& store, const char* suffix) {
    return (o.out_dir / output_stem(store.model_name())).string() + suffix;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

// One query vector per line, comma separated; '#' lines and a non-numeric
// header line are skipped.
Matrix<float> load_sequence_csv(const fs::path& path, std::size_t dim) {
    std::istringstream in(read_file(path));
    std::vector<float> values;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<float> row;
        bool numeric = true;
        std::size_t start = 0;
        while (start <= line.size()) {
            const auto end = std::min(line.find(',', start), line.size());
            std::string field = line.substr(start, end - start);
            while (!field.empty() && field.front() == ' ') field.erase(0, 1);
            while (!field.empty() && field.back() == ' ') field.pop_back();
            float v = 0.0f;
            const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
                numeric = false;
                break;
            }
            row.push_back(v);
            start = end + 1;
        }
        if (!numeric) {
            if (rows == 0 && values.empty()) continue;
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field");
        }
        if (row.size() != dim) {
            throw ConsistencyError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(dim) + " values, got " + std::to_string(row.size()));
        }
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) throw InsufficientData(path.string() + ": no query vectors");
    return Matrix<float>(rows, dim, std::move(values));
}

Matrix<float> load_queries(const fs::path& path, std::size_t dim) {
    const auto name = path.filename().string();
    if (name.ends_with(".egem.json") || name.ends_with(".egem.bin")) {
        auto m = load_egem_matrix(path);
        if (m.cols() != dim) {
            throw ConsistencyError("query dimension " + std::to_string(m.cols()) + " does not match store dimension " +
                                   std::to_string(dim));
        }
        return m;
    }
    return load_sequence_csv(path, dim);
}

int cmd_analyze(const Options& o) {
    const auto outcome = run_analyze(o.store, o.config, o.out_dir);
    print_errors(outcome.errors);
    if (outcome.report) std::cout << table_header() << table_row(*outcome.report);
    return outcome.exit_code;
}

int cmd_survey(const Options& o) {
    const auto outcome = run_survey(o.stores, o.config, o.out_dir);
    for (const auto& row : outcome.rows) print_errors(row.errors, row.store_path.string() + ": ");
    std::cout << read_file(o.out_dir / "survey.csv");
    return outcome.exit_code;
}

int cmd_cluster(const Options& o) {
    const auto store = load_store(o.store);
    const auto model = cached_or_fit(store, o.config, o.out_dir);
    std::cout << "k=" << model.k << " inertia=" << format_double(model.inertia)
              << " epochs=" << model.inertia_history.size() - 1 << '\n';
    return 0;
}

int cmd_radial(const Options& o) {
    const auto store = load_store(o.store);
    fs::create_directories(o.out_dir);
    const auto r = compute_lambda_r(store, o.config.radial());
    emit_radial_plotdata(r, stem_path(o, store, ".radial.csv"));
    write_json(stem_path(o, store, ".radial.json"), to_json(r));
    std::cout << "lambda_r=" << format_double(r.lambda_r) << " F=" << format_double(r.f_test.f_stat)
              << " p=" << format_p(r.f_test.p_value) << " bins=" << r.bins.size() << '\n';
    return 0;
}

int cmd_cohesion(const Options& o) {
    const auto store = load_store(o.store);
    const auto model = cached_or_fit(store, o.config, o.out_dir);
    const auto centroid = compute_beta_centroid(store, model, o.config.cohesion());
    const auto pairwise = compute_beta_pairwise(store, model, o.config.cohesion());
    emit_cohesion_plotdata(centroid, pairwise, stem_path(o, store, ".cohesion.csv"));
    nlohmann::ordered_json j;
    j["centroid_diff"] = to_json(centroid);
    j["pairwise"] = to_json(pairwise);
    write_json(stem_path(o, store, ".cohesion.json"), j);
    std::cout << "beta_centroid=" << format_double(centroid.mean_beta) << " p=" << format_p(centroid.p_value)
              << " beta_pairwise=" << format_double(pairwise.mean_beta) << " p=" << format_p(pairwise.p_value)
              << '\n';
    return 0;
}

int cmd_polarity(const Options& o) {
    if (!o.config.antonym_list_path) throw InsufficientData("no antonym list given (--antonyms)");
    const auto store = load_store(o.store);
    const auto pairs = load_antonyms(*o.config.antonym_list_path);
    const auto model = cached_or_fit(store, o.config, o.out_dir);
    const auto r = compute_alpha(store, model, pairs, o.config.polarity());
    emit_polarity_plotdata(r, stem_path(o, store, ".polarity.csv"));
    write_json(stem_path(o, store, ".polarity.json"), to_json(r));
    std::cout << "alpha=" << format_double(r.mean_alpha) << " n_alpha=" << r.n_alpha
              << " co_clustered=" << r.coverage.co_clustered << "/" << r.coverage.total << '\n';
    return 0;
}

int cmd_diagnose(const Options& o) {
    const auto store = load_store(o.store);
    fs::create_directories(o.out_dir);
    const auto d = diagnose_space(store, o.config.diagnostics());
    emit_pca_plotdata(d, stem_path(o, store, ".pca.csv"));
    write_json(stem_path(o, store, ".diagnostics.json"), to_json(d));
    std::cout << "effective_dim_95=" << d.effective_dim_95 << " utilization=" << format_double(d.utilization)
              << " norm_cov=" << format_double(d.norm_cov)
              << " mean_pairwise_cos=" << format_double(d.mean_pairwise_cos) << '\n';
    return 0;
}

int cmd_calibrate(const Options& o) {
    const auto store = load_store(o.store);
    const auto model = cached_or_fit(store, o.config, o.out_dir);
    const auto cal = calibrate(store, model, o.config.detector());
    const auto path = o.thresholds.value_or(stem_path(o, store, ".thresholds.json"));
    save_thresholds(cal.thresholds, path);
    std::cout << "thresholds written to " << path.string() << '\n';
    return 0;
}

int cmd_detect(const Options& o) {
    const auto store = load_store(o.store);
    const auto model = cached_or_fit(store, o.config, o.out_dir);
    const fs::path cached = stem_path(o, store, ".thresholds.json");
    DetectionThresholds thresholds;
    DensityIndex index;
    if (o.thresholds || fs::exists(cached)) {
        thresholds = load_thresholds(o.thresholds.value_or(cached));
        index = build_density_index(store.view(), thresholds.config);
    } else {
        auto cal = calibrate(store, model, o.config.detector());
        save_thresholds(cal.thresholds, cached);
        thresholds = cal.thresholds;
        index = std::move(cal.index);
    }

    std::vector<TokenVerdict> verdicts;
    std::vector<double> infos;
    if (o.queries) {
        const auto q = load_queries(*o.queries, store.dim());
        verdicts = analyze_trajectory(q.view(), model, thresholds, &index);
        infos.assign(q.rows(), std::numeric_limits<double>::quiet_NaN());
    } else {
        verdicts = classify_tokens(store.view(), model, thresholds, index);
        infos = store.self_information();
    }
    write_verdicts_jsonl(verdicts, stem_path(o, store, ".verdicts.jsonl"));
    emit_zone_plotdata(verdicts, infos, stem_path(o, store, ".zones.csv"));
    const auto summary = summarize_detection(verdicts, infos);
    write_file_atomic(stem_path(o, store, ".detect.json"), to_json(summary).dump(2) + "\n");
    std::cout << "tokens=" << summary.tokens << " type1=" << summary.type1 << " type2=" << summary.type2
              << " type3=" << summary.type3 << " mean_info_type1=" << summary.mean_info_type1
              << " mean_info_all=" << summary.mean_info_all << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* env = std::getenv("EMBEDGEOM_THREADS")) {
        int n = 0;
        const std::string_view s(env);
        if (std::from_chars(s.data(), s.data() + s.size(), n).ec == std::errc() && n > 0) {
            kernels::set_max_threads(n);
        }
    }

    CLI::App app{"Cluster-geometry diagnostics for token-embedding spaces"};
    app.require_subcommand(1);
    Options o;

    auto* analyze = app.add_subcommand("analyze", "full pipeline on one store");
    auto* survey = app.add_subcommand("survey", "full pipeline on several stores plus a combined table");
    auto* cluster = app.add_subcommand("cluster", "fit and cache the k-means model");
    auto* radial = app.add_subcommand("radial", "radial information gradient");
    auto* cohesion = app.add_subcommand("cohesion", "cluster cohesion, both variants");
    auto* polarity = app.add_subcommand("polarity", "polarity coupling over antonym pairs");
    auto* diagnose = app.add_subcommand("diagnose", "effective dimension, norm spread, anisotropy");
    auto* calib = app.add_subcommand("calibrate", "percentile thresholds for the detector");
    auto* detect = app.add_subcommand("detect", "classify tokens or a query sequence");

    for (auto* sub : {analyze, cluster, radial, cohesion, polarity, diagnose, calib, detect}) {
        sub->add_option("store", o.store, "EGEM store (.egem.json)")->required();
    }
    survey->add_option("stores", o.stores, "EGEM stores")->required();

    for (auto* sub : {analyze, survey, cluster, radial, cohesion, polarity, diagnose, calib, detect}) {
        add_common(sub, o);
    }
    for (auto* sub : {analyze, survey, radial}) add_radial(sub, o);
    for (auto* sub : {analyze, survey, cohesion}) add_cohesion(sub, o);
    for (auto* sub : {analyze, survey, polarity}) add_polarity(sub, o);
    for (auto* sub : {analyze, survey, diagnose}) add_diagnostics(sub, o);
    for (auto* sub : {calib, detect}) add_detector(sub, o);
    calib->add_option("--thresholds", o.thresholds, "output path for thresholds JSON");
    detect->add_option("--thresholds", o.thresholds, "thresholds JSON from calibrate");
    detect->add_option("--queries", o.queries, "query vectors: EGEM matrix or CSV sequence");

    CLI11_PARSE(app, argc, argv);

    o.config.span_scope = parse_span_scope(o.span_scope);
    o.config.center = !o.no_center;

    try {
        if (*analyze) return cmd_analyze(o);
        if (*survey) return cmd_survey(o);
        if (*cluster) return cmd_cluster(o);
        if (*radial) return cmd_radial(o);
        if (*cohesion) return cmd_cohesion(o);
        if (*polarity) return cmd_polarity(o);
        if (*diagnose) return cmd_diagnose(o);
        if (*calib) return cmd_calibrate(o);
        if (*detect) return cmd_detect(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.name() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
