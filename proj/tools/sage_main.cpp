#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sage/errors.hpp"
#include "sage/pipeline.hpp"

namespace {

using sage::cli::RunConfig;

// Seed precedence: --seed flag, then SAGE_SEED, then the config file value.
std::optional<std::uint64_t> env_seed() {
    const char* env = std::getenv("SAGE_SEED");
    if (!env || !*env) return std::nullopt;
    char* end = nullptr;
    unsigned long long value = std::strtoull(env, &end, 10);
    if (!end || *end != '\0') throw sage::ConfigError("SAGE_SEED is not an unsigned integer");
    return static_cast<std::uint64_t>(value);
}

RunConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed_flag) {
    RunConfig cfg = sage::cli::load_run_config_file(path);
    if (auto seed = env_seed()) cfg.seed = *seed;
    if (seed_flag) cfg.seed = *seed_flag;
    cfg.grpo.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

void print_report(const nlohmann::json& report) { std::cout << report.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corpus curation pipeline: embeddings, policy training, budgeted selection, "
                 "evaluation, and emissions accounting"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_flag;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("-c,--config", config_path, "Run config JSON");
        if (config_required) opt->required();
        sub->add_option("--seed", seed_flag, "Override the config seed");
    };

    CLI::App* embed = app.add_subcommand("embed", "Embed a corpus into the vector store");
    add_common(embed, true);

    CLI::App* train = app.add_subcommand("train-policy", "Train the selection policy");
    add_common(train, true);

    CLI::App* curate = app.add_subcommand("curate", "Select a budgeted subset of the corpus");
    add_common(curate, true);
    std::string checkpoint_path;
    curate->add_option("--checkpoint", checkpoint_path,
                       "Reuse a policy checkpoint instead of training");

    CLI::App* eval = app.add_subcommand("eval", "Score hypotheses against references");
    add_common(eval, false);
    sage::cli::EvalArgs eval_args;
    eval->add_option("--hyp", eval_args.hyp_path, "Hypothesis file, one segment per line")
        ->required();
    eval->add_option("--ref", eval_args.ref_path, "Reference file")->required();
    std::string hyp_b, src_path, comet_head, eval_out;
    eval->add_option("--hyp-b", hyp_b, "Second hypothesis file for a paired test");
    eval->add_option("--src", src_path, "Source file (needed for --comet-head)");
    eval->add_option("--comet-head", comet_head, "Regression head weights JSON");
    eval->add_flag("--smoothing", eval_args.smoothing, "Add-one smoothing on n>=2 precisions");
    eval->add_option("--out", eval_out, "Write the report JSON here");

    CLI::App* finetune = app.add_subcommand("finetune-toy",
                                            "Train the toy adapter on a curated subset");
    add_common(finetune, true);
    std::string manifest_path, eval_corpus;
    finetune->add_option("--manifest", manifest_path, "Curated manifest to train on");
    finetune->add_option("--eval-corpus", eval_corpus, "Held-out corpus for NLL reporting");

    CLI::App* carbon = app.add_subcommand("carbon", "Estimate training emissions");
    add_common(carbon, false);
    sage::cli::CarbonArgs carbon_args;
    std::string profile_path, baseline_path, carbon_out;
    carbon->add_option("--profile", profile_path, "Energy profile JSON");
    carbon->add_option("--baseline-profile", baseline_path,
                       "Baseline profile for a reduction comparison");
    carbon->add_option("--out", carbon_out, "Write the report JSON here");

    CLI::App* report = app.add_subcommand("report", "Summarize run artifacts");
    add_common(report, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (embed->parsed()) {
            print_report(sage::cli::cmd_embed(load_config(config_path, seed_flag)));
        } else if (train->parsed()) {
            print_report(sage::cli::cmd_train_policy(load_config(config_path, seed_flag)));
        } else if (curate->parsed()) {
            std::optional<std::string> checkpoint;
            if (!checkpoint_path.empty()) checkpoint = checkpoint_path;
            print_report(sage::cli::cmd_curate(load_config(config_path, seed_flag), checkpoint));
        } else if (eval->parsed()) {
            if (!hyp_b.empty()) eval_args.hyp_b_path = hyp_b;
            if (!src_path.empty()) eval_args.src_path = src_path;
            if (!comet_head.empty()) eval_args.comet_head_path = comet_head;
            if (!eval_out.empty()) eval_args.out_path = eval_out;
            std::optional<RunConfig> cfg;
            if (!config_path.empty()) cfg = load_config(config_path, seed_flag);
            print_report(sage::cli::cmd_eval(eval_args, cfg));
        } else if (finetune->parsed()) {
            std::optional<std::string> manifest;
            if (!manifest_path.empty()) manifest = manifest_path;
            std::optional<std::string> heldout;
            if (!eval_corpus.empty()) heldout = eval_corpus;
            print_report(sage::cli::cmd_finetune_toy(load_config(config_path, seed_flag),
                                                     manifest, heldout));
        } else if (carbon->parsed()) {
            if (!profile_path.empty()) carbon_args.profile_path = profile_path;
            if (!baseline_path.empty()) carbon_args.baseline_path = baseline_path;
            if (!carbon_out.empty()) carbon_args.out_path = carbon_out;
            std::optional<RunConfig> cfg;
            if (!config_path.empty()) cfg = load_config(config_path, seed_flag);
            print_report(sage::cli::cmd_carbon(carbon_args, cfg));
        } else if (report->parsed()) {
            print_report(sage::cli::cmd_report(load_config(config_path, seed_flag)));
        }
    } catch (const sage::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sage::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
