#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sage/corpus_io.hpp"
#include "sage/policy.hpp"

namespace sage::curation {

enum class TieBreak { by_id_ascending };
enum class ScoreMode { policy, reward };

struct CurationConfig {
    std::int64_t budget_k = 1;
    TieBreak tie_break = TieBreak::by_id_ascending;
    ScoreMode score_mode = ScoreMode::policy;

    void validate() const;
};

// Budgeted greedy selection. Because the selection score of a candidate
// does not depend on what was already selected, the greedy loop collapses
// to top-K by score with the tie-break, which is what this computes (a
// bounded selection pass; the pool is never fully sorted). Entries come
// back in selection order with steps 1..K and scores attached;
// total_reward is their sum. K is clamped to the pool size.
// Empty pool -> EmptyInputError; duplicate pool ids -> DuplicateId.
corpus::CuratedManifest curate(const policy::PolicyParams& params,
                               std::span<const policy::PoolItem> pool,
                               const CurationConfig& cfg);

// Context-aware scorer hook: sees the candidate and the manifest built so
// far. Lets selection-dependent scores (e.g. redundancy penalties) reuse
// the same greedy loop.
using ContextScorer = std::function<double(const policy::PoolItem&,
                                           const corpus::CuratedManifest&)>;

// The literal greedy loop: rescore all remaining candidates each step,
// take the argmax (ties by ascending id). O(pool * K); exists for hooks
// and as the reference the fast path is checked against.
corpus::CuratedManifest curate_with_scorer(std::span<const policy::PoolItem> pool,
                                           std::int64_t budget_k,
                                           const ContextScorer& scorer);

// Reference top-K: stable full sort by (score desc, id asc), take K ids in
// order. Used as the test oracle.
std::vector<std::string> brute_force_topk(
    std::span<const std::pair<std::string, double>> scored, std::int64_t k);

}  // namespace sage::curation
