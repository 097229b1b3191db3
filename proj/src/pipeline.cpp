#include "sage/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "sage/curation.hpp"
#include "sage/embedding.hpp"
#include "sage/fsio.hpp"
#include "sage/lora.hpp"
#include "sage/metrics.hpp"
#include "sage/policy.hpp"
#include "sage/reward.hpp"

namespace sage::cli {

using nlohmann::json;

namespace {

json load_json_file(const std::filesystem::path& path) {
    json obj = json::parse(fsio::read_file(path), nullptr, false);
    if (obj.is_discarded()) throw ParseError("invalid JSON in " + path.string());
    return obj;
}

void write_json_file(const std::filesystem::path& path, const json& obj) {
    fsio::atomic_write_file(path, obj.dump(2) + "\n");
}

std::filesystem::path output_dir(const RunConfig& cfg) {
    if (cfg.paths.output_dir.empty()) throw ConfigError("paths.output_dir is required");
    std::filesystem::path dir(cfg.paths.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void require_path(const std::string& value, const char* name) {
    if (value.empty()) throw ConfigError(std::string("paths.") + name + " is required");
    if (!std::filesystem::exists(value)) {
        throw IoError(std::string(name) + " not found: " + value);
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::string blob = fsio::read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= blob.size()) {
        std::size_t end = blob.find('\n', start);
        if (end == std::string::npos) {
            if (start < blob.size()) lines.push_back(blob.substr(start));
            break;
        }
        std::string line = blob.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

reward::ExpertReference expert_reference_from_file(const std::filesystem::path& path,
                                                   std::size_t dim, std::uint64_t seed) {
    std::vector<corpus::SentencePair> experts = corpus::read_corpus_file(path);
    if (experts.empty()) throw EmptyInputError("expert corpus has no pairs");
    std::vector<Vec> vectors;
    vectors.reserve(experts.size());
    for (const corpus::SentencePair& pair : experts) {
        vectors.push_back(embed::hash_embed(pair.tgt, dim, seed));
    }
    return reward::build_expert_reference(vectors);
}

struct LoadedRun {
    std::vector<corpus::SentencePair> pairs;
    embed::EmbeddingStore store;
    reward::ExpertReference ref;
    std::vector<policy::PoolItem> pool;
};

LoadedRun load_run_inputs(const RunConfig& cfg) {
    require_path(cfg.paths.corpus, "corpus");
    require_path(cfg.paths.expert_corpus, "expert_corpus");
    require_path(cfg.paths.embedding_store, "embedding_store");
    LoadedRun run;
    run.pairs = corpus::read_corpus_file(cfg.paths.corpus);
    if (run.pairs.empty()) throw EmptyInputError("corpus has no pairs");
    run.store = embed::read_store_file(cfg.paths.embedding_store);
    run.ref = expert_reference_from_file(cfg.paths.expert_corpus, run.store.dim(), cfg.seed);
    run.pool = policy::build_pool(run.pairs, run.store, run.ref);
    return run;
}

json bleu_to_json(const metrics::BleuReport& r) {
    return json{{"score", r.score},
                {"precisions", r.precisions},
                {"brevity_penalty", r.brevity_penalty},
                {"hyp_len", r.hyp_len},
                {"ref_len", r.ref_len}};
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

class WallTimer {
public:
    explicit WallTimer(const char* label) : label_(label) {
        start_ = std::chrono::steady_clock::now();
    }
    ~WallTimer() {
        auto elapsed = std::chrono::steady_clock::now() - start_;
        double seconds =
            std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
        // Timing is log-only; reports must stay byte-identical across
        // reruns.
        std::cerr << label_ << ": wall_time_seconds=" << seconds << "\n";
    }

private:
    const char* label_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

std::string now_created_at() {
    std::int64_t epoch = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        try {
            epoch = std::stoll(env);
        } catch (...) {
            throw ConfigError("SOURCE_DATE_EPOCH is not an integer");
        }
    }
    std::time_t t = static_cast<std::time_t>(epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json cmd_embed(const RunConfig& cfg) {
    WallTimer timer("embed");
    require_path(cfg.paths.corpus, "corpus");
    if (cfg.paths.embedding_store.empty()) {
        throw ConfigError("paths.embedding_store is required");
    }

    std::ifstream in(cfg.paths.corpus, std::ios::binary);
    if (!in) throw IoError("cannot open " + cfg.paths.corpus);
    corpus::CorpusReader reader(in);
    embed::EmbeddingStore store(static_cast<std::uint32_t>(cfg.embedding.dim));
    std::size_t pairs = 0;
    while (auto pair = reader.next()) {
        store.add(pair->id, embed::hash_embed(pair->tgt, static_cast<std::size_t>(
                                                             cfg.embedding.dim),
                                              cfg.seed));
        store.add(pair->id + policy::kSrcSuffix,
                  embed::hash_embed(pair->src, static_cast<std::size_t>(cfg.embedding.dim),
                                    cfg.seed));
        ++pairs;
    }
    if (pairs == 0) throw EmptyInputError("corpus has no pairs");

    std::filesystem::path store_path(cfg.paths.embedding_store);
    if (store_path.has_parent_path()) std::filesystem::create_directories(store_path.parent_path());
    embed::write_store_file(store, store_path);

    return json{{"command", "embed"},
                {"store", cfg.paths.embedding_store},
                {"dim", cfg.embedding.dim},
                {"pairs", pairs},
                {"rows", store.count()},
                {"config_digest", config_digest(cfg)}};
}

json cmd_train_policy(const RunConfig& cfg) {
    WallTimer timer("train-policy");
    LoadedRun run = load_run_inputs(cfg);

    policy::GrpoConfig grpo = cfg.grpo;
    grpo.seed = cfg.seed;
    policy::TrainResult result = policy::train_policy(run.pairs, run.store, run.ref, grpo);

    std::filesystem::path dir = output_dir(cfg);
    std::string checkpoint = (dir / "policy.json").string();
    policy::write_checkpoint_file(result.params, training_digest(cfg), checkpoint);

    json report{{"command", "train-policy"},
                {"checkpoint", checkpoint},
                {"feature_dim", result.params.feature_dim()},
                {"iterations", cfg.grpo.iterations},
                {"mean_reward_first", result.mean_reward_trace.front()},
                {"mean_reward_last", result.mean_reward_trace.back()},
                {"reward_trace", result.mean_reward_trace},
                {"skipped_groups", result.skipped_groups},
                {"config_digest", config_digest(cfg)}};
    write_json_file(dir / "train_report.json", report);
    return report;
}

json cmd_curate(const RunConfig& cfg, const std::optional<std::string>& checkpoint) {
    WallTimer timer("curate");
    LoadedRun run = load_run_inputs(cfg);
    std::filesystem::path dir = output_dir(cfg);

    policy::PolicyParams params;
    std::string checkpoint_path;
    if (checkpoint) {
        checkpoint_path = *checkpoint;
        std::string digest;
        params = policy::read_checkpoint_file(checkpoint_path, &digest);
        if (digest != training_digest(cfg)) {
            throw ConfigError("checkpoint " + checkpoint_path +
                              " was trained under a different config (digest mismatch)");
        }
    } else {
        policy::GrpoConfig grpo = cfg.grpo;
        grpo.seed = cfg.seed;
        policy::TrainResult result = policy::train_policy(run.pairs, run.store, run.ref, grpo);
        params = std::move(result.params);
        checkpoint_path = (dir / "policy.json").string();
        policy::write_checkpoint_file(params, training_digest(cfg), checkpoint_path);
    }

    std::int64_t requested = cfg.resolve_budget(run.pool.size());
    std::int64_t effective = requested;
    if (static_cast<std::size_t>(requested) > run.pool.size()) {
        effective = static_cast<std::int64_t>(run.pool.size());
        std::cerr << "curate: budget_K " << requested << " exceeds pool of " << run.pool.size()
                  << "; clamping to " << effective << "\n";
    }

    curation::CurationConfig ccfg;
    ccfg.budget_k = effective;
    ccfg.score_mode = cfg.curation.score_mode;
    corpus::CuratedManifest manifest = curation::curate(params, run.pool, ccfg);
    manifest.config_digest = config_digest(cfg);
    manifest.created_at = now_created_at();

    std::string manifest_path = (dir / "manifest.jsonl").string();
    corpus::write_manifest_file(manifest, manifest_path);

    std::unordered_map<std::string, double> reward_by_id;
    reward_by_id.reserve(run.pool.size());
    double pool_reward = 0.0;
    for (const policy::PoolItem& item : run.pool) {
        reward_by_id.emplace(item.id, item.reward);
        pool_reward += item.reward;
    }
    double selected_reward = 0.0;
    for (const corpus::ManifestEntry& e : manifest.entries) {
        selected_reward += reward_by_id.at(e.id);
    }

    json report{{"command", "curate"},
                {"manifest", manifest_path},
                {"checkpoint", checkpoint_path},
                {"budget_K", effective},
                {"count", manifest.entries.size()},
                {"total_score", manifest.total_reward},
                {"mean_selected_reward",
                 selected_reward / static_cast<double>(manifest.entries.size())},
                {"mean_pool_reward", pool_reward / static_cast<double>(run.pool.size())},
                {"config_digest", config_digest(cfg)}};
    write_json_file(dir / "curation_report.json", report);
    return report;
}

json cmd_eval(const EvalArgs& args, const std::optional<RunConfig>& cfg) {
    WallTimer timer("eval");
    std::vector<std::string> hyp_lines = read_lines(args.hyp_path);
    std::vector<std::string> ref_lines = read_lines(args.ref_path);
    if (hyp_lines.size() != ref_lines.size()) {
        throw DimError("eval: " + std::to_string(hyp_lines.size()) + " hypothesis lines vs " +
                       std::to_string(ref_lines.size()) + " reference lines");
    }
    if (hyp_lines.empty()) throw EmptyInputError("eval: no segments");

    auto tokenize_all = [](const std::vector<std::string>& lines) {
        std::vector<std::vector<std::string>> out;
        out.reserve(lines.size());
        for (const std::string& line : lines) out.push_back(metrics::tokenize_for_bleu(line));
        return out;
    };
    auto hyps = tokenize_all(hyp_lines);
    auto refs = tokenize_all(ref_lines);

    metrics::BleuOptions opts;
    opts.smoothing = args.smoothing || (cfg && cfg->bleu.smoothing);

    json report{{"command", "eval"},
                {"segments", hyp_lines.size()},
                {"bleu", bleu_to_json(metrics::bleu_corpus(hyps, refs, opts))}};
    if (cfg) report["config_digest"] = config_digest(*cfg);

    if (args.hyp_b_path) {
        std::vector<std::string> b_lines = read_lines(*args.hyp_b_path);
        if (b_lines.size() != ref_lines.size()) {
            throw DimError("eval: second system has " + std::to_string(b_lines.size()) +
                           " lines, expected " + std::to_string(ref_lines.size()));
        }
        auto hyps_b = tokenize_all(b_lines);
        report["bleu_b"] = bleu_to_json(metrics::bleu_corpus(hyps_b, refs, opts));

        // Per-segment scores always use add-one smoothing; short segments
        // otherwise zero out and the paired test degenerates.
        metrics::BleuOptions seg_opts;
        seg_opts.smoothing = true;
        std::vector<double> seg_a, seg_b;
        seg_a.reserve(hyps.size());
        seg_b.reserve(hyps.size());
        for (std::size_t i = 0; i < hyps.size(); ++i) {
            seg_a.push_back(metrics::bleu_segment(hyps[i], refs[i], seg_opts).score);
            seg_b.push_back(metrics::bleu_segment(hyps_b[i], refs[i], seg_opts).score);
        }
        metrics::TTestResult t = metrics::paired_t_test(seg_a, seg_b);
        report["paired_t"] = json{{"mean_diff", t.mean_diff},
                                  {"t_stat", t.t_stat},
                                  {"df", t.df},
                                  {"p_two_tailed", t.p_two_tailed}};
    }

    if (args.comet_head_path) {
        if (!args.src_path) throw ConfigError("eval: --comet-head needs --src");
        std::vector<std::string> src_lines = read_lines(*args.src_path);
        if (src_lines.size() != ref_lines.size()) {
            throw DimError("eval: " + std::to_string(src_lines.size()) +
                           " source lines, expected " + std::to_string(ref_lines.size()));
        }
        metrics::CometHeadConfig head = metrics::load_comet_head_file(*args.comet_head_path);

        // Stand-in encoder: layer l of a segment is its hash embedding
        // under seed l, so the head math runs end to end on plain text.
        auto embed_layers = [&](const std::string& tex) {
            std::vector<Vec> layers;
            layers.reserve(static_cast<std::size_t>(head.num_layers) + 1);
            for (std::int64_t l = 0; l <= head.num_layers; ++l) {
                layers.push_back(embed::hash_embed(tex, static_cast<std::size_t>(head.dim),
                                                   static_cast<std::uint64_t>(l)));
            }
            return layers;
        };
        std::vector<double> scores;
        scores.reserve(hyp_lines.size());
        for (std::size_t i = 0; i < hyp_lines.size(); ++i) {
            scores.push_back(metrics::comet_score(head, embed_layers(hyp_lines[i]),
                                                  embed_layers(src_lines[i]),
                                                  embed_layers(ref_lines[i])));
        }
        report["comet_mean"] = mean_of(scores);
    }

    if (args.out_path) {
        write_json_file(*args.out_path, report);
    } else if (cfg) {
        write_json_file(output_dir(*cfg) / "eval_report.json", report);
    }
    return report;
}

json cmd_finetune_toy(const RunConfig& cfg, const std::optional<std::string>& manifest_path,
                      const std::optional<std::string>& eval_corpus_path) {
    WallTimer timer("finetune-toy");
    require_path(cfg.paths.corpus, "corpus");
    std::vector<corpus::SentencePair> pairs = corpus::read_corpus_file(cfg.paths.corpus);
    if (pairs.empty()) throw EmptyInputError("corpus has no pairs");

    std::vector<lora::ToySample> samples;
    samples.reserve(pairs.size());
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        samples.push_back(lora::parse_toy_sample(pairs[i]));
        by_id.emplace(pairs[i].id, i);
    }

    std::vector<lora::ToySample> subset;
    if (manifest_path) {
        corpus::CuratedManifest manifest = corpus::read_manifest_file(*manifest_path);
        subset.reserve(manifest.entries.size());
        for (const corpus::ManifestEntry& e : manifest.entries) {
            auto it = by_id.find(e.id);
            if (it == by_id.end()) {
                throw InvariantError("manifest id not present in corpus: " + e.id);
            }
            subset.push_back(samples[it->second]);
        }
    } else {
        subset = samples;
    }

    std::int64_t rank = cfg.lora.rank;
    if (rank > cfg.lora.vocab_size) {
        std::cerr << "finetune-toy: rank " << rank << " clamped to vocab "
                  << cfg.lora.vocab_size << "\n";
        rank = cfg.lora.vocab_size;
    }
    lora::ToyModel model(cfg.lora.vocab_size, rank, cfg.lora.alpha, cfg.lora.bos_id);

    lora::ToyTrainOptions opts;
    opts.epochs = cfg.lora.epochs;
    opts.learning_rate = cfg.lora.learning_rate;
    opts.seed = cfg.seed;
    lora::ToyTrainResult result = lora::train_lora_toy(model, subset, opts);

    std::optional<double> heldout;
    if (eval_corpus_path) {
        std::vector<corpus::SentencePair> eval_pairs =
            corpus::read_corpus_file(*eval_corpus_path);
        if (eval_pairs.empty()) throw EmptyInputError("eval corpus has no pairs");
        std::vector<lora::ToySample> eval_samples;
        eval_samples.reserve(eval_pairs.size());
        for (const corpus::SentencePair& pair : eval_pairs) {
            eval_samples.push_back(lora::parse_toy_sample(pair));
        }
        heldout = lora::nll_loss(model, eval_samples);
    }

    std::filesystem::path dir = output_dir(cfg);
    std::string adapter_path = (dir / "adapter.json").string();
    lora::write_adapter_file(model.layer, cfg.seed, adapter_path);

    std::int64_t adapter_params = lora::adapter_param_count(model.layer);
    std::int64_t base_params = lora::base_param_count(model.layer);
    if (adapter_params >= base_params) {
        std::cerr << "finetune-toy: adapter has " << adapter_params
                  << " params, base has " << base_params << "; no reduction at this shape\n";
    }

    json report{{"command", "finetune-toy"},
                {"adapter", adapter_path},
                {"pairs_used", subset.size()},
                {"epochs", cfg.lora.epochs},
                {"rank", rank},
                {"alpha", cfg.lora.alpha},
                {"adapter_params", adapter_params},
                {"base_params", base_params},
                {"initial_nll", result.loss_trace.front()},
                {"final_nll", result.loss_trace.back()},
                {"loss_trace", result.loss_trace},
                {"config_digest", config_digest(cfg)}};
    if (heldout) report["heldout_nll"] = *heldout;
    write_json_file(dir / "finetune_report.json", report);
    return report;
}

json cmd_carbon(const CarbonArgs& args, const std::optional<RunConfig>& cfg) {
    carbon::EnergyProfile profile;
    if (args.profile_path) {
        profile = carbon::profile_from_json(load_json_file(*args.profile_path));
    } else if (cfg) {
        profile = cfg->carbon;
    } else {
        throw ConfigError("carbon: need --profile or --config");
    }
    carbon::EmissionsReport report = carbon::estimate_emissions(profile);

    json out{{"command", "carbon"},
             {"profile", carbon::profile_to_json(profile)},
             {"report", carbon::report_to_json(report)}};
    if (args.baseline_path) {
        carbon::EnergyProfile baseline =
            carbon::profile_from_json(load_json_file(*args.baseline_path));
        carbon::EmissionsReport baseline_report = carbon::estimate_emissions(baseline);
        double reduction = carbon::percent_reduction(baseline_report.co2_kg, report.co2_kg);
        out["baseline_profile"] = carbon::profile_to_json(baseline);
        out["baseline_report"] = carbon::report_to_json(baseline_report);
        out["reduction_percent"] = reduction;
        out["reduction_formatted"] = carbon::format_reduction(reduction);
    }

    if (args.out_path) {
        write_json_file(*args.out_path, out);
    } else if (cfg) {
        write_json_file(output_dir(*cfg) / "emissions.json", out);
    }
    return out;
}

json cmd_report(const RunConfig& cfg) {
    WallTimer timer("report");
    std::filesystem::path dir = output_dir(cfg);
    json summary{{"command", "report"}, {"config_digest", config_digest(cfg)}};
    summary["config"] = run_config_to_json(cfg);

    if (!cfg.paths.corpus.empty() && std::filesystem::exists(cfg.paths.corpus)) {
        std::ifstream in(cfg.paths.corpus, std::ios::binary);
        if (!in) throw IoError("cannot open " + cfg.paths.corpus);
        corpus::CorpusReader reader(in);
        while (reader.next()) {
        }
        summary["corpus"] = json{{"path", cfg.paths.corpus}, {"pairs", reader.pairs_read()}};
    }
    if (!cfg.paths.expert_corpus.empty() && std::filesystem::exists(cfg.paths.expert_corpus)) {
        std::ifstream in(cfg.paths.expert_corpus, std::ios::binary);
        if (!in) throw IoError("cannot open " + cfg.paths.expert_corpus);
        corpus::CorpusReader reader(in);
        while (reader.next()) {
        }
        summary["expert_corpus"] =
            json{{"path", cfg.paths.expert_corpus}, {"pairs", reader.pairs_read()}};
    }
    if (!cfg.paths.embedding_store.empty() &&
        std::filesystem::exists(cfg.paths.embedding_store)) {
        embed::EmbeddingStore store = embed::read_store_file(cfg.paths.embedding_store);
        summary["embedding_store"] = json{{"path", cfg.paths.embedding_store},
                                          {"dim", store.dim()},
                                          {"rows", store.count()}};
    }
    std::filesystem::path manifest_path = dir / "manifest.jsonl";
    if (std::filesystem::exists(manifest_path)) {
        corpus::CuratedManifest manifest = corpus::read_manifest_file(manifest_path);
        summary["manifest"] = json{{"path", manifest_path.string()},
                                   {"count", manifest.entries.size()},
                                   {"budget_K", manifest.budget_k},
                                   {"total_reward", manifest.total_reward},
                                   {"config_digest", manifest.config_digest}};
    }
    for (const char* name :
         {"train_report", "curation_report", "finetune_report", "eval_report", "emissions"}) {
        std::filesystem::path p = dir / (std::string(name) + ".json");
        if (std::filesystem::exists(p)) summary[name] = load_json_file(p);
    }

    write_json_file(dir / "summary.json", summary);
    return summary;
}

}  // namespace sage::cli
