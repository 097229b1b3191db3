#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sage/errors.hpp"
#include "sage/linalg.hpp"

namespace sage::embed {

// Deterministic bag-of-features text embedding (signed feature hashing).
//
// Definition, fixed for all time so stored vectors stay reproducible:
//   1. ASCII-lowercase the text, split on ASCII whitespace.
//   2. Features are the token unigrams plus adjacent-token bigrams joined
//      with the byte 0x1F.
//   3. Each feature is hashed with 64-bit FNV-1a over the 8 little-endian
//      bytes of the seed followed by the feature bytes.
//   4. The feature adds sign (top hash bit clear -> +1, set -> -1) into
//      bucket (hash mod dim).
//   5. The accumulator is L2-normalized.
//
// dim < 2 -> ConfigError; no tokens -> EmptyInputError; exact sign
// cancellation across all buckets -> ZeroNormError.
Vec hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

// Returns v / ||v||. Zero norm -> ZeroNormError; non-finite entries ->
// NumericalError.
Vec normalize(const Vec& v);

// Cosine similarity, clamped to [-1, 1]. Mismatched dims -> DimError;
// zero-norm inputs -> ZeroNormError.
double cosine(const Vec& u, const Vec& v);

// In-memory embedding store: float32 rows addressed by string id.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    EmbeddingStore(std::uint32_t dim) : dim_(dim) {}

    std::uint32_t dim() const { return dim_; }
    std::size_t count() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }

    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    // Appends a row, widening/narrowing to float32 storage. Duplicate id ->
    // DuplicateId; wrong size -> DimError; non-finite -> NumericalError.
    void add(const std::string& id, const Vec& v);

    // Row widened back to double. Unknown id -> MissingEmbedding.
    Vec vector(const std::string& id) const;
    std::span<const float> row(const std::string& id) const;

private:
    std::uint32_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> rows_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Binary store format (all integers little-endian):
//   magic   8 bytes  "SAGEEMB1"
//   dim     u32
//   count   u64
//   record  count times: id_len u16, id bytes, dim float32 values
// Bad magic or trailing bytes -> FormatError; short data ->
// TruncationError carrying the byte offset; repeated id -> DuplicateId.
void write_store(const EmbeddingStore& store, std::ostream& out);
void write_store_file(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore read_store(std::istream& in);
EmbeddingStore read_store_file(const std::filesystem::path& path);

}  // namespace sage::embed
