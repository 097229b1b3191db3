#include "sage/corpus_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sage/fsio.hpp"
#include "sage/text.hpp"

namespace sage::corpus {

using nlohmann::json;

namespace {

std::string require_string(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(std::string("missing field: ") + key, line);
    if (!it->is_string()) throw SchemaError(std::string(key) + " must be a string", line);
    return it->get<std::string>();
}

json parse_json_line(std::string_view line, std::size_t line_number) {
    json parsed = json::parse(line, nullptr, false);
    if (parsed.is_discarded()) throw ParseError("invalid JSON", line_number);
    return parsed;
}

bool is_blank(std::string_view line) {
    for (char c : line) {
        if (!text::is_ascii_space(c)) return false;
    }
    return true;
}

}  // namespace

SentencePair parse_corpus_line(std::string_view line, std::size_t line_number) {
    json obj = parse_json_line(line, line_number);
    if (!obj.is_object()) throw SchemaError("expected a JSON object", line_number);

    SentencePair pair;
    pair.id = require_string(obj, "id", line_number);
    if (pair.id.empty()) throw SchemaError("id must be non-empty", line_number);
    pair.src = std::string(text::trim(require_string(obj, "src", line_number)));
    if (pair.src.empty()) throw SchemaError("src must be non-empty after trimming", line_number);
    pair.tgt = std::string(text::trim(require_string(obj, "tgt", line_number)));
    if (pair.tgt.empty()) throw SchemaError("tgt must be non-empty after trimming", line_number);

    auto meta = obj.find("meta");
    if (meta != obj.end()) {
        if (!meta->is_object()) throw SchemaError("meta must be an object", line_number);
        for (const auto& [key, value] : meta->items()) {
            if (!value.is_string()) {
                throw SchemaError("meta." + key + " must be a string", line_number);
            }
            pair.meta.emplace(key, value.get<std::string>());
        }
    }
    return pair;
}

std::optional<SentencePair> CorpusReader::next() {
    while (std::getline(*in_, buf_)) {
        ++line_no_;
        if (is_blank(buf_)) continue;
        SentencePair pair = parse_corpus_line(buf_, line_no_);
        if (!seen_.insert(pair.id).second) throw DuplicateId(pair.id);
        ++count_;
        return pair;
    }
    if (in_->bad()) throw IoError("corpus read failed at line " + std::to_string(line_no_));
    return std::nullopt;
}

std::vector<SentencePair> read_corpus(std::istream& in) {
    CorpusReader reader(in);
    std::vector<SentencePair> pairs;
    while (auto pair = reader.next()) pairs.push_back(std::move(*pair));
    return pairs;
}

std::vector<SentencePair> read_corpus_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_corpus(in);
}

void write_corpus(const std::vector<SentencePair>& pairs, std::ostream& out) {
    for (const SentencePair& pair : pairs) {
        json obj{{"id", pair.id}, {"src", pair.src}, {"tgt", pair.tgt}};
        if (!pair.meta.empty()) obj["meta"] = pair.meta;
        out << obj.dump() << '\n';
    }
    if (!out) throw IoError("corpus write failed");
}

void write_corpus_file(const std::vector<SentencePair>& pairs,
                       const std::filesystem::path& path) {
    std::ostringstream buf;
    write_corpus(pairs, buf);
    fsio::atomic_write_file(path, buf.view());
}

void validate_manifest(const CuratedManifest& m) {
    if (m.budget_k < 1) throw InvariantError("manifest: budget_K must be at least 1");
    if (static_cast<std::int64_t>(m.entries.size()) > m.budget_k) {
        throw InvariantError("manifest: more entries than budget_K");
    }
    std::unordered_set<std::string> ids;
    double sum = 0.0;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const ManifestEntry& e = m.entries[i];
        if (e.step != static_cast<std::int64_t>(i) + 1) {
            throw InvariantError("manifest: steps must be contiguous from 1");
        }
        if (e.id.empty()) throw InvariantError("manifest: empty id at step " +
                                               std::to_string(e.step));
        if (!ids.insert(e.id).second) throw InvariantError("manifest: duplicate id " + e.id);
        if (!std::isfinite(e.score)) {
            throw InvariantError("manifest: non-finite score for " + e.id);
        }
        sum += e.score;
    }
    double tol = 1e-9 * std::max(1.0, std::fabs(sum));
    if (std::fabs(sum - m.total_reward) > tol) {
        throw InvariantError("manifest: total_reward does not match the sum of entry scores");
    }
}

void write_manifest(const CuratedManifest& m, std::ostream& out) {
    validate_manifest(m);
    json header{{"budget_K", m.budget_k},
                {"count", static_cast<std::int64_t>(m.entries.size())},
                {"config_digest", m.config_digest},
                {"created_at", m.created_at},
                {"total_reward", m.total_reward}};
    out << header.dump() << '\n';
    for (const ManifestEntry& e : m.entries) {
        json row{{"id", e.id}, {"score", e.score}, {"step", e.step}};
        out << row.dump() << '\n';
    }
    if (!out) throw IoError("manifest write failed");
}

void write_manifest_file(const CuratedManifest& m, const std::filesystem::path& path) {
    std::ostringstream buf;
    write_manifest(m, buf);
    fsio::atomic_write_file(path, buf.view());
}

CuratedManifest read_manifest(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!is_blank(line)) break;
    }
    if (line_no == 0 || is_blank(line)) throw FormatError("manifest: missing header line");

    json header = parse_json_line(line, line_no);
    if (!header.is_object()) throw SchemaError("manifest header must be an object", line_no);
    CuratedManifest m;
    try {
        m.budget_k = header.at("budget_K").get<std::int64_t>();
        m.total_reward = header.at("total_reward").get<double>();
        m.config_digest = header.at("config_digest").get<std::string>();
        m.created_at = header.at("created_at").get<std::string>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("manifest header: ") + e.what(), line_no);
    }
    if (!header.contains("count") || !header["count"].is_number_integer()) {
        throw SchemaError("manifest header: missing integer count", line_no);
    }
    std::int64_t count = header["count"].get<std::int64_t>();

    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        json row = parse_json_line(line, line_no);
        if (!row.is_object()) throw SchemaError("manifest row must be an object", line_no);
        ManifestEntry e;
        try {
            e.id = row.at("id").get<std::string>();
            e.score = row.at("score").get<double>();
            e.step = row.at("step").get<std::int64_t>();
        } catch (const json::exception& ex) {
            throw SchemaError(std::string("manifest row: ") + ex.what(), line_no);
        }
        m.entries.push_back(std::move(e));
    }
    if (static_cast<std::int64_t>(m.entries.size()) != count) {
        throw FormatError("manifest: header count " + std::to_string(count) + " but " +
                          std::to_string(m.entries.size()) + " rows");
    }
    validate_manifest(m);
    return m;
}

CuratedManifest read_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_manifest(in);
}

}  // namespace sage::corpus
