#include "sage/config.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "sage/fsio.hpp"
#include "sage/hashing.hpp"

namespace sage::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError("config: unknown key \"" + key + "\" in " + where);
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config: bad value for \"") + key + "\"");
    }
}

policy::Objective parse_objective(const std::string& name) {
    if (name == "bradley_terry") return policy::Objective::bradley_terry;
    if (name == "group_baseline") return policy::Objective::group_baseline;
    throw ConfigError("config: grpo.objective must be bradley_terry or group_baseline");
}

curation::ScoreMode parse_score_mode(const std::string& name) {
    if (name == "policy") return curation::ScoreMode::policy;
    if (name == "reward") return curation::ScoreMode::reward;
    throw ConfigError("config: curation.score_mode must be policy or reward");
}

}  // namespace

void RunConfig::validate() const {
    if (embedding.dim < 2) throw ConfigError("config: embedding.dim must be at least 2");
    grpo.validate();
    if (curation.fraction && curation.k) {
        throw ConfigError("config: set curation.budget_fraction or curation.budget_K, not both");
    }
    if (curation.fraction) {
        if (!(*curation.fraction > 0.0) || !(*curation.fraction <= 1.0)) {
            throw ConfigError("config: curation.budget_fraction must be in (0, 1]");
        }
    }
    if (curation.k && *curation.k < 1) {
        throw ConfigError("config: curation.budget_K must be at least 1");
    }
    if (lora.vocab_size < 2) throw ConfigError("config: lora.vocab_size must be at least 2");
    if (lora.rank < 1) throw ConfigError("config: lora.rank must be at least 1");
    if (!(lora.alpha > 0.0)) throw ConfigError("config: lora.alpha must be positive");
    if (lora.epochs < 1) throw ConfigError("config: lora.epochs must be at least 1");
    if (!(lora.learning_rate > 0.0)) {
        throw ConfigError("config: lora.learning_rate must be positive");
    }
    if (lora.bos_id < 0 || lora.bos_id >= lora.vocab_size) {
        throw ConfigError("config: lora.bos_id out of range");
    }
    carbon.validate();
}

std::int64_t RunConfig::resolve_budget(std::size_t pool_size) const {
    if (pool_size == 0) throw EmptyInputError("resolve_budget: empty pool");
    if (curation.k) return *curation.k;
    double fraction = curation.fraction.value_or(0.03);
    auto k = static_cast<std::int64_t>(
        std::floor(fraction * static_cast<double>(pool_size) + 0.5));
    return std::max<std::int64_t>(1, k);
}

RunConfig parse_run_config(const json& obj) {
    if (!obj.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown(obj, {"seed", "paths", "embedding", "grpo", "curation", "bleu", "lora",
                         "carbon"},
                   "top level");

    RunConfig cfg;
    read_field(obj, "seed", cfg.seed);

    if (obj.contains("paths")) {
        const json& p = obj["paths"];
        if (!p.is_object()) throw ConfigError("config: paths must be an object");
        reject_unknown(p, {"corpus", "expert_corpus", "embedding_store", "output_dir"}, "paths");
        read_field(p, "corpus", cfg.paths.corpus);
        read_field(p, "expert_corpus", cfg.paths.expert_corpus);
        read_field(p, "embedding_store", cfg.paths.embedding_store);
        read_field(p, "output_dir", cfg.paths.output_dir);
    }

    if (obj.contains("embedding")) {
        const json& e = obj["embedding"];
        if (!e.is_object()) throw ConfigError("config: embedding must be an object");
        reject_unknown(e, {"dim"}, "embedding");
        read_field(e, "dim", cfg.embedding.dim);
    }

    if (obj.contains("grpo")) {
        const json& g = obj["grpo"];
        if (!g.is_object()) throw ConfigError("config: grpo must be an object");
        reject_unknown(g,
                       {"group_size", "traj_len", "pool_sample", "beta", "learning_rate",
                        "iterations", "objective"},
                       "grpo");
        read_field(g, "group_size", cfg.grpo.group_size);
        read_field(g, "traj_len", cfg.grpo.traj_len);
        read_field(g, "pool_sample", cfg.grpo.pool_sample);
        read_field(g, "beta", cfg.grpo.beta);
        read_field(g, "learning_rate", cfg.grpo.learning_rate);
        read_field(g, "iterations", cfg.grpo.iterations);
        if (g.contains("objective")) {
            cfg.grpo.objective = parse_objective(g["objective"].get<std::string>());
        }
    }

    if (obj.contains("curation")) {
        const json& c = obj["curation"];
        if (!c.is_object()) throw ConfigError("config: curation must be an object");
        reject_unknown(c, {"budget_fraction", "budget_K", "score_mode"}, "curation");
        if (c.contains("budget_fraction")) {
            cfg.curation.fraction = c["budget_fraction"].get<double>();
        }
        if (c.contains("budget_K")) cfg.curation.k = c["budget_K"].get<std::int64_t>();
        if (c.contains("score_mode")) {
            cfg.curation.score_mode = parse_score_mode(c["score_mode"].get<std::string>());
        }
    }

    if (obj.contains("bleu")) {
        const json& b = obj["bleu"];
        if (!b.is_object()) throw ConfigError("config: bleu must be an object");
        reject_unknown(b, {"smoothing"}, "bleu");
        read_field(b, "smoothing", cfg.bleu.smoothing);
    }

    if (obj.contains("lora")) {
        const json& l = obj["lora"];
        if (!l.is_object()) throw ConfigError("config: lora must be an object");
        reject_unknown(l, {"vocab_size", "rank", "alpha", "epochs", "learning_rate", "bos_id"},
                       "lora");
        read_field(l, "vocab_size", cfg.lora.vocab_size);
        read_field(l, "rank", cfg.lora.rank);
        read_field(l, "alpha", cfg.lora.alpha);
        read_field(l, "epochs", cfg.lora.epochs);
        read_field(l, "learning_rate", cfg.lora.learning_rate);
        read_field(l, "bos_id", cfg.lora.bos_id);
    }

    if (obj.contains("carbon")) {
        const json& c = obj["carbon"];
        if (!c.is_object()) throw ConfigError("config: carbon must be an object");
        reject_unknown(c,
                       {"train_hours", "num_gpus", "tdp_watts", "sys_overhead", "pue",
                        "carbon_intensity"},
                       "carbon");
        read_field(c, "train_hours", cfg.carbon.train_hours);
        read_field(c, "num_gpus", cfg.carbon.num_gpus);
        read_field(c, "tdp_watts", cfg.carbon.tdp_watts);
        read_field(c, "sys_overhead", cfg.carbon.sys_overhead);
        read_field(c, "pue", cfg.carbon.pue);
        read_field(c, "carbon_intensity", cfg.carbon.carbon_intensity);
    }

    cfg.grpo.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

RunConfig load_run_config_file(const std::filesystem::path& path) {
    json obj = json::parse(fsio::read_file(path), nullptr, false);
    if (obj.is_discarded()) throw ConfigError("config: invalid JSON in " + path.string());
    return parse_run_config(obj);
}

json run_config_to_json(const RunConfig& cfg) {
    json obj;
    obj["seed"] = cfg.seed;
    obj["paths"] = {{"corpus", cfg.paths.corpus},
                    {"expert_corpus", cfg.paths.expert_corpus},
                    {"embedding_store", cfg.paths.embedding_store},
                    {"output_dir", cfg.paths.output_dir}};
    obj["embedding"] = {{"dim", cfg.embedding.dim}};
    obj["grpo"] = {{"group_size", cfg.grpo.group_size},
                   {"traj_len", cfg.grpo.traj_len},
                   {"pool_sample", cfg.grpo.pool_sample},
                   {"beta", cfg.grpo.beta},
                   {"learning_rate", cfg.grpo.learning_rate},
                   {"iterations", cfg.grpo.iterations},
                   {"objective", cfg.grpo.objective == policy::Objective::bradley_terry
                                     ? "bradley_terry"
                                     : "group_baseline"}};
    json cur;
    if (cfg.curation.fraction) {
        cur["budget_fraction"] = *cfg.curation.fraction;
    } else if (cfg.curation.k) {
        cur["budget_K"] = *cfg.curation.k;
    } else {
        cur["budget_fraction"] = 0.03;
    }
    cur["score_mode"] = cfg.curation.score_mode == curation::ScoreMode::policy ? "policy"
                                                                               : "reward";
    obj["curation"] = std::move(cur);
    obj["bleu"] = {{"smoothing", cfg.bleu.smoothing}};
    obj["lora"] = {{"vocab_size", cfg.lora.vocab_size}, {"rank", cfg.lora.rank},
                   {"alpha", cfg.lora.alpha},           {"epochs", cfg.lora.epochs},
                   {"learning_rate", cfg.lora.learning_rate},
                   {"bos_id", cfg.lora.bos_id}};
    obj["carbon"] = carbon::profile_to_json(cfg.carbon);
    return obj;
}

std::string config_digest(const RunConfig& cfg) {
    return hex64(fnv1a64(run_config_to_json(cfg).dump()));
}

std::string training_digest(const RunConfig& cfg) {
    json all = run_config_to_json(cfg);
    json scoped{{"seed", all["seed"]},
                {"paths", all["paths"]},
                {"embedding", all["embedding"]},
                {"grpo", all["grpo"]}};
    return hex64(fnv1a64(scoped.dump()));
}

}  // namespace sage::cli
