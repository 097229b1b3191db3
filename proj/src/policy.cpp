#include "sage/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sage/fsio.hpp"
#include "sage/hashing.hpp"

namespace sage::policy {

using nlohmann::json;

namespace {

// Stream tags for derived RNG seeds: stream 0 draws the iteration's pool,
// streams 1..G its trajectories.
constexpr std::uint64_t kPoolStream = 0;
constexpr std::uint64_t kTrajStreamBase = 1;

struct StepDistribution {
    double lse = 0.0;                // logsumexp of remaining scores
    std::vector<double> scores;      // aligned with the remaining list
    std::vector<double> probs;
};

StepDistribution step_distribution(const PolicyParams& params, std::span<const PoolItem> pool,
                                   const std::vector<std::size_t>& remaining) {
    StepDistribution d;
    d.scores.reserve(remaining.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t idx : remaining) {
        double s = dot(params.theta, pool[idx].features);
        if (!std::isfinite(s)) throw NumericalError("policy score is non-finite");
        d.scores.push_back(s);
        mx = std::max(mx, s);
    }
    double sum = 0.0;
    d.probs.resize(d.scores.size());
    for (std::size_t i = 0; i < d.scores.size(); ++i) {
        d.probs[i] = std::exp(d.scores[i] - mx);
        sum += d.probs[i];
    }
    d.lse = mx + std::log(sum);
    for (double& p : d.probs) p /= sum;
    return d;
}

std::vector<double> trajectory_coefficients(std::span<const Rollout> group,
                                            const GrpoConfig& cfg, double* scale_out) {
    std::vector<Trajectory> trajs;
    trajs.reserve(group.size());
    for (const Rollout& r : group) trajs.push_back(r.trajectory);

    std::vector<double> coeff(group.size(), 0.0);
    if (cfg.objective == Objective::bradley_terry) {
        auto pairs = preference_pairs(trajs);
        if (pairs.empty()) {
            throw DegenerateGroup("all trajectory rewards are equal; no preference pairs");
        }
        for (auto [w, l] : pairs) {
            double margin = trajs[w].total_reward - trajs[l].total_reward;
            double c = -pair_loss(margin, cfg.beta);  // ln sigmoid(beta * margin)
            coeff[w] += c;
            coeff[l] += c;
        }
        *scale_out = -1.0 / static_cast<double>(pairs.size());
    } else {
        double mean = 0.0;
        for (const Trajectory& t : trajs) mean += t.total_reward;
        mean /= static_cast<double>(trajs.size());
        bool all_equal = true;
        for (const Trajectory& t : trajs) {
            coeff[&t - trajs.data()] = t.total_reward - mean;
            if (t.total_reward != trajs.front().total_reward) all_equal = false;
        }
        if (all_equal) {
            throw DegenerateGroup("all trajectory rewards are equal; zero advantage");
        }
        *scale_out = -1.0 / static_cast<double>(trajs.size());
    }
    return coeff;
}

}  // namespace

void GrpoConfig::validate() const {
    if (group_size < 2) throw ConfigError("grpo: group_size must be at least 2");
    if (traj_len < 1) throw ConfigError("grpo: traj_len must be at least 1");
    if (pool_sample < 1) throw ConfigError("grpo: pool_sample must be at least 1");
    if (traj_len > pool_sample) {
        throw ConfigError("grpo: traj_len cannot exceed pool_sample");
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw ConfigError("grpo: beta must be nonnegative");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("grpo: learning_rate must be positive");
    }
    if (iterations < 0) throw ConfigError("grpo: iterations must be nonnegative");
}

Vec featurize(const corpus::SentencePair& pair, const embed::EmbeddingStore& store) {
    Vec tgt = store.vector(pair.id);
    Vec src = store.vector(pair.id + kSrcSuffix);
    if (pair.src.empty()) throw DegenerateInput("featurize: empty src for " + pair.id);
    Vec features;
    features.reserve(tgt.size() + 3);
    features.insert(features.end(), tgt.begin(), tgt.end());
    features.push_back(static_cast<double>(pair.tgt.size()) /
                       static_cast<double>(pair.src.size()));
    features.push_back(embed::cosine(src, tgt));
    features.push_back(1.0);
    return features;
}

double policy_score(const PolicyParams& params, const Vec& features) {
    return dot(params.theta, features);
}

Rollout sample_trajectory(const PolicyParams& params, std::span<const PoolItem> pool,
                          std::int64_t traj_len, Rng& rng) {
    if (pool.empty()) throw EmptyInputError("sample_trajectory: empty pool");
    if (traj_len < 1 || static_cast<std::size_t>(traj_len) > pool.size()) {
        throw ConfigError("sample_trajectory: traj_len " + std::to_string(traj_len) +
                          " out of range for pool of " + std::to_string(pool.size()));
    }

    std::vector<std::size_t> remaining(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) remaining[i] = i;

    Rollout out;
    out.trajectory.steps.reserve(static_cast<std::size_t>(traj_len));
    out.chosen.reserve(static_cast<std::size_t>(traj_len));
    for (std::int64_t t = 0; t < traj_len; ++t) {
        StepDistribution d = step_distribution(params, pool, remaining);
        double u = rng.next_double();
        std::size_t pick = remaining.size() - 1;
        double cum = 0.0;
        for (std::size_t i = 0; i < d.probs.size(); ++i) {
            cum += d.probs[i];
            if (u < cum) {
                pick = i;
                break;
            }
        }
        std::size_t pool_idx = remaining[pick];
        out.trajectory.steps.push_back({pool[pool_idx].id, d.scores[pick] - d.lse,
                                        pool[pool_idx].reward});
        out.trajectory.total_reward += pool[pool_idx].reward;
        out.chosen.push_back(pool_idx);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return out;
}

double trajectory_logprob(const PolicyParams& params, std::span<const PoolItem> pool,
                          const Rollout& rollout) {
    std::vector<std::size_t> remaining(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) remaining[i] = i;

    double lp = 0.0;
    for (std::size_t chosen_idx : rollout.chosen) {
        auto it = std::find(remaining.begin(), remaining.end(), chosen_idx);
        if (it == remaining.end()) {
            throw InvariantError("trajectory references a candidate not in the pool");
        }
        StepDistribution d = step_distribution(params, pool, remaining);
        lp += d.scores[static_cast<std::size_t>(it - remaining.begin())] - d.lse;
        remaining.erase(it);
    }
    return lp;
}

double pair_loss(double margin, double beta) {
    double x = beta * margin;
    // -ln sigmoid(x), stable at both tails.
    if (x >= 0.0) return std::log1p(std::exp(-x));
    return -x + std::log1p(std::exp(x));
}

std::vector<std::pair<std::size_t, std::size_t>> preference_pairs(
    std::span<const Trajectory> group) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < group.size(); ++i) {
        for (std::size_t j = i + 1; j < group.size(); ++j) {
            if (group[i].total_reward > group[j].total_reward) {
                pairs.emplace_back(i, j);
            } else if (group[j].total_reward > group[i].total_reward) {
                pairs.emplace_back(j, i);
            }
        }
    }
    return pairs;
}

double grpo_loss(std::span<const Trajectory> group, const GrpoConfig& cfg) {
    if (group.size() < 2) throw ConfigError("grpo_loss: need at least two trajectories");
    if (cfg.objective == Objective::bradley_terry) {
        auto pairs = preference_pairs(group);
        if (pairs.empty()) {
            throw DegenerateGroup("all trajectory rewards are equal; no preference pairs");
        }
        double loss = 0.0;
        for (auto [w, l] : pairs) {
            loss += pair_loss(group[w].total_reward - group[l].total_reward, cfg.beta);
        }
        return loss / static_cast<double>(pairs.size());
    }
    double mean = 0.0;
    for (const Trajectory& t : group) mean += t.total_reward;
    mean /= static_cast<double>(group.size());
    double loss = 0.0;
    bool all_equal = true;
    for (const Trajectory& t : group) {
        double lp = 0.0;
        for (const TrajectoryStep& s : t.steps) lp += s.logprob;
        loss -= (t.total_reward - mean) * lp;
        if (t.total_reward != group.front().total_reward) all_equal = false;
    }
    if (all_equal) throw DegenerateGroup("all trajectory rewards are equal; zero advantage");
    return loss / static_cast<double>(group.size());
}

double grpo_surrogate(const PolicyParams& params, std::span<const PoolItem> pool,
                      std::span<const Rollout> group, const GrpoConfig& cfg) {
    if (group.size() < 2) throw ConfigError("grpo_surrogate: need at least two rollouts");
    double scale = 0.0;
    std::vector<double> coeff = trajectory_coefficients(group, cfg, &scale);
    double value = 0.0;
    for (std::size_t i = 0; i < group.size(); ++i) {
        if (coeff[i] == 0.0) continue;
        value += coeff[i] * trajectory_logprob(params, pool, group[i]);
    }
    return scale * value;
}

Vec grpo_gradient(const PolicyParams& params, std::span<const PoolItem> pool,
                  std::span<const Rollout> group, const GrpoConfig& cfg) {
    if (group.size() < 2) throw ConfigError("grpo_gradient: need at least two rollouts");
    double scale = 0.0;
    std::vector<double> coeff = trajectory_coefficients(group, cfg, &scale);

    Vec grad(params.feature_dim(), 0.0);
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < group.size(); ++i) {
        if (coeff[i] == 0.0) continue;
        remaining.resize(pool.size());
        for (std::size_t k = 0; k < pool.size(); ++k) remaining[k] = k;
        for (std::size_t chosen_idx : group[i].chosen) {
            auto it = std::find(remaining.begin(), remaining.end(), chosen_idx);
            if (it == remaining.end()) {
                throw InvariantError("trajectory references a candidate not in the pool");
            }
            StepDistribution d = step_distribution(params, pool, remaining);
            // d/dtheta log pi(chosen) = f_chosen - sum_j p_j f_j
            const Vec& fc = pool[chosen_idx].features;
            for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += coeff[i] * fc[k];
            for (std::size_t r = 0; r < remaining.size(); ++r) {
                const Vec& fr = pool[remaining[r]].features;
                double w = coeff[i] * d.probs[r];
                for (std::size_t k = 0; k < grad.size(); ++k) grad[k] -= w * fr[k];
            }
            remaining.erase(it);
        }
    }
    for (double& g : grad) {
        g *= scale;
        if (!std::isfinite(g)) throw NumericalError("grpo_gradient: non-finite gradient");
    }
    return grad;
}

std::vector<PoolItem> build_pool(std::span<const corpus::SentencePair> pairs,
                                 const embed::EmbeddingStore& store,
                                 const reward::ExpertReference& ref) {
    std::vector<PoolItem> pool;
    pool.reserve(pairs.size());
    for (const corpus::SentencePair& pair : pairs) {
        PoolItem item;
        item.id = pair.id;
        item.features = featurize(pair, store);
        item.reward = reward::semantic_reward(store.vector(pair.id), ref);
        pool.push_back(std::move(item));
    }
    return pool;
}

TrainResult train_policy(std::span<const corpus::SentencePair> pairs,
                         const embed::EmbeddingStore& store,
                         const reward::ExpertReference& ref, const GrpoConfig& cfg) {
    cfg.validate();
    if (pairs.empty()) throw EmptyInputError("train_policy: empty corpus");
    std::vector<PoolItem> all_items = build_pool(pairs, store, ref);

    std::size_t per_iter = std::min<std::size_t>(static_cast<std::size_t>(cfg.pool_sample),
                                                 all_items.size());
    if (static_cast<std::size_t>(cfg.traj_len) > per_iter) {
        throw ConfigError("train_policy: traj_len exceeds the per-iteration pool");
    }

    TrainResult result;
    result.params.theta.assign(all_items.front().features.size(), 0.0);
    result.mean_reward_trace.reserve(static_cast<std::size_t>(cfg.iterations));

    std::vector<PoolItem> subpool(per_iter);
    for (std::int64_t iter = 0; iter < cfg.iterations; ++iter) {
        Rng pool_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(iter), kPoolStream));
        std::vector<std::size_t> idxs = pool_rng.sample_indices(all_items.size(), per_iter);
        for (std::size_t i = 0; i < idxs.size(); ++i) subpool[i] = all_items[idxs[i]];

        std::vector<Rollout> rollouts;
        rollouts.reserve(static_cast<std::size_t>(cfg.group_size));
        double mean_reward = 0.0;
        for (std::int64_t j = 0; j < cfg.group_size; ++j) {
            Rng traj_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(iter),
                                     kTrajStreamBase + static_cast<std::uint64_t>(j)));
            rollouts.push_back(
                sample_trajectory(result.params, subpool, cfg.traj_len, traj_rng));
            mean_reward += rollouts.back().trajectory.total_reward;
        }
        mean_reward /= static_cast<double>(cfg.group_size);
        result.mean_reward_trace.push_back(mean_reward);

        try {
            Vec grad = grpo_gradient(result.params, subpool, rollouts, cfg);
            for (std::size_t k = 0; k < grad.size(); ++k) {
                result.params.theta[k] -= cfg.learning_rate * grad[k];
            }
        } catch (const DegenerateGroup&) {
            ++result.skipped_groups;
        }
    }
    return result;
}

void write_checkpoint(const PolicyParams& params, const std::string& config_digest,
                      std::ostream& out) {
    json obj{{"feature_dim", static_cast<std::int64_t>(params.feature_dim())},
             {"theta", params.theta},
             {"config_digest", config_digest}};
    out << obj.dump(2) << '\n';
    if (!out) throw IoError("checkpoint write failed");
}

void write_checkpoint_file(const PolicyParams& params, const std::string& config_digest,
                           const std::filesystem::path& path) {
    std::ostringstream buf;
    write_checkpoint(params, config_digest, buf);
    fsio::atomic_write_file(path, buf.view());
}

PolicyParams read_checkpoint(std::istream& in, std::string* config_digest) {
    json obj = json::parse(in, nullptr, false);
    if (obj.is_discarded()) throw ParseError("checkpoint: invalid JSON");
    if (!obj.is_object()) throw SchemaError("checkpoint: expected a JSON object");
    PolicyParams params;
    try {
        params.theta = obj.at("theta").get<Vec>();
        auto dim = obj.at("feature_dim").get<std::int64_t>();
        if (dim < 0 || static_cast<std::size_t>(dim) != params.theta.size()) {
            throw FormatError("checkpoint: feature_dim does not match theta length");
        }
        if (config_digest) *config_digest = obj.at("config_digest").get<std::string>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
    for (double x : params.theta) {
        if (!std::isfinite(x)) throw NumericalError("checkpoint: non-finite theta");
    }
    return params;
}

PolicyParams read_checkpoint_file(const std::filesystem::path& path,
                                  std::string* config_digest) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_checkpoint(in, config_digest);
}

}  // namespace sage::policy
