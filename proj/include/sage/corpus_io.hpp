#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sage/errors.hpp"

namespace sage::corpus {

struct SentencePair {
    std::string id;
    std::string src;
    std::string tgt;
    std::map<std::string, std::string> meta;
};

// Parses one JSONL corpus line: an object with string fields "id", "src",
// "tgt" and an optional string-valued "meta" object. src/tgt are trimmed of
// surrounding Unicode whitespace and must be non-empty afterwards; id is
// kept verbatim and must be non-empty. Unknown fields are ignored.
// Malformed JSON -> ParseError; wrong shape or empty fields -> SchemaError.
SentencePair parse_corpus_line(std::string_view line, std::size_t line_number = 0);

// Streaming JSONL reader with duplicate-id detection across the whole
// stream. Memory stays proportional to the set of ids, not the file size.
class CorpusReader {
public:
    explicit CorpusReader(std::istream& in) : in_(&in) {}

    // Next pair, skipping blank lines. std::nullopt at end of stream.
    std::optional<SentencePair> next();

    std::size_t line_number() const { return line_no_; }
    std::size_t pairs_read() const { return count_; }

private:
    std::istream* in_;
    std::size_t line_no_ = 0;
    std::size_t count_ = 0;
    std::string buf_;
    std::unordered_set<std::string> seen_;
};

std::vector<SentencePair> read_corpus(std::istream& in);
std::vector<SentencePair> read_corpus_file(const std::filesystem::path& path);

void write_corpus(const std::vector<SentencePair>& pairs, std::ostream& out);
void write_corpus_file(const std::vector<SentencePair>& pairs,
                       const std::filesystem::path& path);

struct ManifestEntry {
    std::string id;
    double score = 0.0;
    std::int64_t step = 0;
};

// Output of a curation run: the selected ids in selection order.
struct CuratedManifest {
    std::vector<ManifestEntry> entries;
    std::int64_t budget_k = 0;
    double total_reward = 0.0;
    std::string config_digest;
    std::string created_at;
};

// Checks: budget_K >= 1, no more entries than budget, steps contiguous
// from 1 in order, unique ids, total_reward consistent with the entry
// scores. Violations -> InvariantError.
void validate_manifest(const CuratedManifest& m);

// File format: one JSON header line {"budget_K", "count", "config_digest",
// "created_at", "total_reward"} followed by one JSON line per entry
// {"id", "score", "step"}.
void write_manifest(const CuratedManifest& m, std::ostream& out);
void write_manifest_file(const CuratedManifest& m, const std::filesystem::path& path);
CuratedManifest read_manifest(std::istream& in);
CuratedManifest read_manifest_file(const std::filesystem::path& path);

}  // namespace sage::corpus
