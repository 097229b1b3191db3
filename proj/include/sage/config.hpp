#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "sage/curation.hpp"
#include "sage/policy.hpp"
#include "sage/sustainability.hpp"

namespace sage::cli {

struct PathsConfig {
    std::string corpus;
    std::string expert_corpus;
    std::string embedding_store;
    std::string output_dir = "out";
};

struct EmbeddingConfig {
    std::int64_t dim = 64;
};

struct CurationBudget {
    std::optional<double> fraction;  // (0, 1]
    std::optional<std::int64_t> k;   // >= 1
    curation::ScoreMode score_mode = curation::ScoreMode::policy;
};

struct BleuConfig {
    bool smoothing = false;
};

struct LoraToyConfig {
    std::int64_t vocab_size = 32;
    std::int64_t rank = 4;
    double alpha = 16.0;
    std::int64_t epochs = 200;
    double learning_rate = 2e-4;
    std::int64_t bos_id = 0;
};

// Whole-run configuration. Every field has a default; a config file only
// overrides what it names. Unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 0;
    PathsConfig paths;
    EmbeddingConfig embedding;
    policy::GrpoConfig grpo;
    CurationBudget curation;
    BleuConfig bleu;
    LoraToyConfig lora;
    carbon::EnergyProfile carbon;

    void validate() const;

    // Absolute budget for a pool: budget_K as-is, or
    // max(1, round(fraction * pool_size)). Values above the pool size are
    // clamped by the caller.
    std::int64_t resolve_budget(std::size_t pool_size) const;
};

RunConfig parse_run_config(const nlohmann::json& obj);
RunConfig load_run_config_file(const std::filesystem::path& path);

// Canonical JSON with every default materialized; key order is fixed
// (alphabetical), so equal configs serialize identically.
nlohmann::json run_config_to_json(const RunConfig& cfg);

// 16-hex-digit digest of the canonical serialization. Stamped into
// manifests and reports so artifacts can be traced to the exact effective
// config.
std::string config_digest(const RunConfig& cfg);

// Digest over just the fields that shape policy training (seed, data
// paths, embedding, grpo). Stamped into policy checkpoints and re-checked
// before a checkpoint is reused, so e.g. changing the curation budget does
// not orphan a checkpoint but changing the seed or corpus does.
std::string training_digest(const RunConfig& cfg);

}  // namespace sage::cli
