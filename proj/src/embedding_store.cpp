#include "embedgeom/embedding_store.hpp"

#include "embedgeom/errors.hpp"
#include "embedgeom/io_util.hpp"
#include "embedgeom/kernels.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace embedgeom {
namespace {

constexpr int kFormatVersion = 1;
constexpr double kInfoTolerance = 1e-9;

bool info_matches(double frequency, double info) {
    const double expected = -std::log2(frequency);
    return std::abs(info - expected) <= kInfoTolerance * std::max(1.0, std::abs(expected));
}

void validate_matrix(const Matrix<float>& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        bool nonzero = false;
        for (float x : m.row(i)) {
            if (!std::isfinite(x)) {
                throw DataError("non-finite value in row " + std::to_string(i));
            }
            nonzero = nonzero || x != 0.0f;
        }
        if (!nonzero) {
            throw DataError("all-zero row " + std::to_string(i));
        }
    }
}

void validate_tokens(const std::vector<TokenRecord>& tokens) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i];
        if (t.row_index != i) {
            throw ConsistencyError("row_index " + std::to_string(t.row_index) + " at position " + std::to_string(i));
        }
        if (!(t.frequency > 0.0 && t.frequency <= 1.0)) {
            throw DataError("frequency outside (0, 1] for token '" + t.token + "'");
        }
        if (!std::isfinite(t.self_information) || !info_matches(t.frequency, t.self_information)) {
            throw DataError("self_information disagrees with -log2(frequency) for token '" + t.token + "'");
        }
    }
}

std::string strip_suffix(std::string s, std::string_view suffix) {
    if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
        s.resize(s.size() - suffix.size());
    }
    return s;
}

struct Header {
    std::string model_name;
    std::size_t vocab_size = 0;
    std::size_t dim = 0;
};

Header read_header(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("header is not valid JSON: " + path.string());
    }
    try {
        Header h;
        h.model_name = j.at("model_name").get<std::string>();
        const auto vocab = j.at("vocab_size").get<long long>();
        const auto dim = j.at("dim").get<long long>();
        if (vocab < 0 || dim <= 0) {
            throw FormatError("header has non-positive shape");
        }
        h.vocab_size = static_cast<std::size_t>(vocab);
        h.dim = static_cast<std::size_t>(dim);
        if (j.at("dtype").get<std::string>() != "f32le") {
            throw FormatError("unsupported dtype");
        }
        if (j.at("layout").get<std::string>() != "row-major") {
            throw FormatError("unsupported layout");
        }
        if (j.at("format_version").get<int>() != kFormatVersion) {
            throw FormatError("unsupported format_version");
        }
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed header: ") + e.what());
    }
}

Matrix<float> read_payload(const std::filesystem::path& path, const Header& h) {
    const std::string bytes = read_file(path);
    const std::size_t expected = h.vocab_size * h.dim * sizeof(float);
    if (bytes.size() != expected) {
        throw ConsistencyError("payload holds " + std::to_string(bytes.size() / sizeof(float) / h.dim) +
                               " rows, header declares " + std::to_string(h.vocab_size));
    }
    auto values = decode_f32le(bytes);
    return Matrix<float>(h.vocab_size, h.dim, std::move(values));
}

double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw FormatError("bad number '" + std::string(field) + "' on token line " + std::to_string(line));
    }
    return v;
}

std::vector<TokenRecord> read_tokens(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<TokenRecord> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
            throw FormatError("token line " + std::to_string(tokens.size() + 1) + " does not have 3 columns");
        }
        TokenRecord rec;
        rec.token = line.substr(0, t1);
        rec.frequency = parse_double(std::string_view(line).substr(t1 + 1, t2 - t1 - 1), tokens.size() + 1);
        rec.self_information = parse_double(std::string_view(line).substr(t2 + 1), tokens.size() + 1);
        rec.row_index = tokens.size();
        tokens.push_back(std::move(rec));
    }
    return tokens;
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::string model_name, Matrix<float> matrix, std::vector<TokenRecord> tokens)
    : model_name_(std::move(model_name)), matrix_(std::move(matrix)), tokens_(std::move(tokens)) {
    if (tokens_.size() != matrix_.rows()) {
        throw ConsistencyError("matrix has " + std::to_string(matrix_.rows()) + " rows but " +
                               std::to_string(tokens_.size()) + " tokens");
    }
    validate_matrix(matrix_);
    validate_tokens(tokens_);
    index_.reserve(tokens_.size());
    for (const auto& t : tokens_) index_.emplace(t.token, t.row_index);
}

EmbeddingStore EmbeddingStore::from_frequencies(std::string model_name, Matrix<float> matrix,
                                                const std::vector<std::string>& tokens,
                                                const std::vector<double>& frequencies) {
    if (tokens.size() != frequencies.size()) {
        throw ConsistencyError("token and frequency counts differ");
    }
    std::vector<TokenRecord> records(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        records[i] = TokenRecord{tokens[i], frequencies[i], -std::log2(frequencies[i]), i};
    }
    return EmbeddingStore(std::move(model_name), std::move(matrix), std::move(records));
}

std::vector<double> EmbeddingStore::self_information() const {
    std::vector<double> out(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) out[i] = tokens_[i].self_information;
    return out;
}

std::optional<std::size_t> EmbeddingStore::find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

EgemPaths EgemPaths::from(const std::filesystem::path& path) {
    std::string base = strip_suffix(strip_suffix(strip_suffix(path.string(), ".egem.json"), ".egem.bin"), ".tokens.tsv");
    return {base + ".egem.json", base + ".egem.bin", base + ".tokens.tsv"};
}

Matrix<float> load_egem_matrix(const std::filesystem::path& path) {
    const auto paths = EgemPaths::from(path);
    const Header h = read_header(paths.header);
    auto m = read_payload(paths.payload, h);
    for (float x : m.values()) {
        if (!std::isfinite(x)) throw DataError("non-finite value in payload");
    }
    return m;
}

EmbeddingStore load_store(const std::filesystem::path& path) {
    const auto paths = EgemPaths::from(path);
    const Header h = read_header(paths.header);
    auto matrix = read_payload(paths.payload, h);
    auto tokens = read_tokens(paths.tokens);
    if (tokens.size() != h.vocab_size) {
        throw ConsistencyError("token file has " + std::to_string(tokens.size()) + " rows, header declares " +
                               std::to_string(h.vocab_size));
    }
    return EmbeddingStore(h.model_name, std::move(matrix), std::move(tokens));
}

void save_store(const EmbeddingStore& store, const std::filesystem::path& path) {
    // All checks run before any file is written.
    validate_matrix(store.matrix());
    validate_tokens(store.tokens());
    for (const auto& t : store.tokens()) {
        if (t.token.find_first_of("\t\n\r") != std::string::npos) {
            throw DataError("token contains a tab or newline: cannot be stored in TSV");
        }
    }

    const auto paths = EgemPaths::from(path);
    nlohmann::ordered_json header;
    header["model_name"] = store.model_name();
    header["vocab_size"] = store.vocab_size();
    header["dim"] = store.dim();
    header["dtype"] = "f32le";
    header["layout"] = "row-major";
    header["format_version"] = kFormatVersion;

    const std::string payload = encode_f32le(store.matrix().values());

    std::string tsv;
    for (const auto& t : store.tokens()) {
        tsv += t.token;
        tsv += '\t';
        tsv += format_double(t.frequency);
        tsv += '\t';
        tsv += format_double(t.self_information);
        tsv += '\n';
    }

    write_file_atomic(paths.payload, payload);
    write_file_atomic(paths.tokens, tsv);
    write_file_atomic(paths.header, header.dump(2) + "\n");
}

std::vector<double> norms(const EmbeddingStore& store) {
    return kernels::omp::row_norms(store.view());
}

}  // namespace embedgeom
