#pragma once

#include "embedgeom/matrix.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace embedgeom {

/// Per-token metadata: relative corpus frequency and self-information in bits.
struct TokenRecord {
    std::string token;
    double frequency = 1.0;
    double self_information = 0.0;
    std::size_t row_index = 0;

    friend bool operator==(const TokenRecord&, const TokenRecord&) = default;
};

/// Filtered V x d static embedding matrix plus token metadata.
///
/// Instances are always valid: construction checks every row is finite and
/// nonzero, frequencies lie in (0, 1], self-information agrees with
/// -log2(frequency) to 1e-9 relative, and row indices run 0..V-1.
/// Immutable after construction.
class EmbeddingStore {
public:
    /// Throws ConsistencyError on shape/index mismatch, DataError on bad values.
    EmbeddingStore(std::string model_name, Matrix<float> matrix, std::vector<TokenRecord> tokens);

    /// Builds token records from frequencies, deriving self-information.
    static EmbeddingStore from_frequencies(std::string model_name, Matrix<float> matrix,
                                           const std::vector<std::string>& tokens,
                                           const std::vector<double>& frequencies);

    const std::string& model_name() const { return model_name_; }
    std::size_t dim() const { return matrix_.cols(); }
    std::size_t vocab_size() const { return matrix_.rows(); }
    const Matrix<float>& matrix() const { return matrix_; }
    MatrixView<float> view() const { return matrix_.view(); }
    const std::vector<TokenRecord>& tokens() const { return tokens_; }

    std::vector<double> self_information() const;

    /// Exact-string lookup of a token's row.
    std::optional<std::size_t> find(const std::string& token) const;

    friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
        return a.model_name_ == b.model_name_ && a.matrix_ == b.matrix_ && a.tokens_ == b.tokens_;
    }

private:
    std::string model_name_;
    Matrix<float> matrix_;
    std::vector<TokenRecord> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Paths of the three files that make up one EGEM store.
struct EgemPaths {
    std::filesystem::path header;   // <name>.egem.json
    std::filesystem::path payload;  // <name>.egem.bin
    std::filesystem::path tokens;   // <name>.tokens.tsv

    /// Accepts the header path or the bare `<dir>/<name>` prefix.
    static EgemPaths from(const std::filesystem::path& path);
};

/// Reads an EGEM store. FormatError on a malformed header or TSV,
/// ConsistencyError when payload size or token count disagree with the
/// header, DataError on non-finite values, IoError on missing files.
EmbeddingStore load_store(const std::filesystem::path& path);

/// Reads only an EGEM matrix (header + payload), e.g. a detector query file.
Matrix<float> load_egem_matrix(const std::filesystem::path& path);

/// Writes the EGEM triple. The store is revalidated before any file is touched.
void save_store(const EmbeddingStore& store, const std::filesystem::path& path);

/// Euclidean norm of every row, accumulated in double.
std::vector<double> norms(const EmbeddingStore& store);

}  // namespace embedgeom
