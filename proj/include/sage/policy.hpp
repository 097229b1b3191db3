#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sage/corpus_io.hpp"
#include "sage/embedding.hpp"
#include "sage/linalg.hpp"
#include "sage/reward.hpp"
#include "sage/rng.hpp"

namespace sage::policy {

// What the policy objective averages over: pairwise Bradley-Terry
// preferences inside each trajectory group (default), or per-trajectory
// advantages against the group mean.
enum class Objective { bradley_terry, group_baseline };

struct GrpoConfig {
    std::int64_t group_size = 8;     // trajectories per group
    std::int64_t traj_len = 16;      // selections per trajectory
    std::int64_t pool_sample = 256;  // candidate pool drawn per iteration
    double beta = 1.0;               // preference sharpness
    double learning_rate = 0.05;
    std::int64_t iterations = 500;
    std::uint64_t seed = 0;
    Objective objective = Objective::bradley_terry;

    void validate() const;  // ConfigError on bad ranges
};

// Linear selection policy over per-candidate features.
struct PolicyParams {
    Vec theta;

    std::size_t feature_dim() const { return theta.size(); }
};

// One candidate as the policy sees it: cached features and its scalar
// reward.
struct PoolItem {
    std::string id;
    Vec features;
    double reward = 0.0;
};

// Feature map for a sentence pair given its stored embeddings: the target
// embedding, then length_ratio (|tgt| / |src| in bytes), the src/tgt
// cosine, and a constant bias feature. Source rows live under id + "#src".
Vec featurize(const corpus::SentencePair& pair, const embed::EmbeddingStore& store);

inline constexpr const char* kSrcSuffix = "#src";

double policy_score(const PolicyParams& params, const Vec& features);

struct TrajectoryStep {
    std::string candidate_id;
    double logprob = 0.0;
    double reward = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    double total_reward = 0.0;
};

// A trajectory plus the pool indices it chose, so log-probabilities can be
// recomputed for any parameter vector by replaying the same choices.
struct Rollout {
    Trajectory trajectory;
    std::vector<std::size_t> chosen;
};

// Samples traj_len candidates without replacement. At each step the policy
// softmax is taken over the candidates still remaining in the pool.
// traj_len > pool size -> ConfigError; empty pool -> EmptyInputError.
Rollout sample_trajectory(const PolicyParams& params, std::span<const PoolItem> pool,
                          std::int64_t traj_len, Rng& rng);

// log pi_theta(tau): sum over steps of (score of chosen - logsumexp over
// the remaining pool at that step).
double trajectory_logprob(const PolicyParams& params, std::span<const PoolItem> pool,
                          const Rollout& rollout);

// -ln sigmoid(beta * margin), computed in a saturation-safe form.
double pair_loss(double margin, double beta);

// All ordered (winner, loser) pairs by strict total-reward comparison.
std::vector<std::pair<std::size_t, std::size_t>> preference_pairs(
    std::span<const Trajectory> group);

// Group objective value. Bradley-Terry: mean over preference pairs of
// pair_loss(R_w - R_l, beta); all rewards equal -> DegenerateGroup.
// Group-baseline: -(1/G) sum_i (R_i - mean R) log pi(tau_i) evaluated via
// the surrogate below.
double grpo_loss(std::span<const Trajectory> group, const GrpoConfig& cfg);

// Differentiable surrogate whose gradient at the sampling parameters is the
// policy-gradient estimate. Pair coefficients c_wl = ln sigmoid(beta (R_w -
// R_l)) and advantages are treated as constants of theta:
//   bradley_terry:   -(1/|P|) sum_pairs c_wl (log pi(w) + log pi(l))
//   group_baseline:  -(1/G) sum_i (R_i - mean R) log pi(i)
double grpo_surrogate(const PolicyParams& params, std::span<const PoolItem> pool,
                      std::span<const Rollout> group, const GrpoConfig& cfg);

// Analytic gradient of grpo_surrogate with respect to theta.
Vec grpo_gradient(const PolicyParams& params, std::span<const PoolItem> pool,
                  std::span<const Rollout> group, const GrpoConfig& cfg);

struct TrainResult {
    PolicyParams params;
    // Mean trajectory total_reward per iteration, in iteration order.
    std::vector<double> mean_reward_trace;
    std::int64_t skipped_groups = 0;  // degenerate groups that gave no update
};

// Full training loop: theta starts at zero; each iteration draws a
// pool_sample-sized candidate pool (without replacement, reshuffled per
// iteration), rolls out group_size trajectories on derived RNG streams,
// and takes one gradient step. Deterministic given (corpus order, store,
// config).
TrainResult train_policy(std::span<const corpus::SentencePair> pairs,
                         const embed::EmbeddingStore& store,
                         const reward::ExpertReference& ref, const GrpoConfig& cfg);

// Builds the PoolItem list train_policy and curation share. Every pair
// needs tgt and src rows in the store.
std::vector<PoolItem> build_pool(std::span<const corpus::SentencePair> pairs,
                                 const embed::EmbeddingStore& store,
                                 const reward::ExpertReference& ref);

// Checkpoint format: JSON {"feature_dim", "theta", "config_digest"}.
void write_checkpoint(const PolicyParams& params, const std::string& config_digest,
                      std::ostream& out);
void write_checkpoint_file(const PolicyParams& params, const std::string& config_digest,
                           const std::filesystem::path& path);
PolicyParams read_checkpoint(std::istream& in, std::string* config_digest = nullptr);
PolicyParams read_checkpoint_file(const std::filesystem::path& path,
                                  std::string* config_digest = nullptr);

}  // namespace sage::policy
