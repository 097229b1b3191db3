#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "sage/config.hpp"

namespace sage::cli {

struct EvalArgs {
    std::string hyp_path;
    std::string ref_path;
    std::optional<std::string> hyp_b_path;  // second system for a paired test
    std::optional<std::string> src_path;
    std::optional<std::string> comet_head_path;
    bool smoothing = false;
    std::optional<std::string> out_path;
};

struct CarbonArgs {
    std::optional<std::string> profile_path;
    std::optional<std::string> baseline_path;
    std::optional<std::string> out_path;
};

// Timestamp stamped into manifests. Reads SOURCE_DATE_EPOCH when set and
// falls back to the epoch, never the wall clock, so reruns stay
// byte-identical.
std::string now_created_at();

// Each command returns the JSON report it also writes under
// paths.output_dir (eval and carbon can run config-free and then only
// write where their args say).
nlohmann::json cmd_embed(const RunConfig& cfg);
nlohmann::json cmd_train_policy(const RunConfig& cfg);
nlohmann::json cmd_curate(const RunConfig& cfg, const std::optional<std::string>& checkpoint);
nlohmann::json cmd_eval(const EvalArgs& args, const std::optional<RunConfig>& cfg);
nlohmann::json cmd_finetune_toy(const RunConfig& cfg,
                                const std::optional<std::string>& manifest_path,
                                const std::optional<std::string>& eval_corpus_path);
nlohmann::json cmd_carbon(const CarbonArgs& args, const std::optional<RunConfig>& cfg);
nlohmann::json cmd_report(const RunConfig& cfg);

}  // namespace sage::cli
