#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sage/linalg.hpp"

namespace sage::reward {

// Precomputed summary of the expert demonstration set. The mean cosine
// similarity of a unit candidate u against experts e_1..e_M equals
// u . (1/M sum_j e_j / ||e_j||), so the whole set collapses to one centroid
// vector (not re-normalized) and scoring is a single dot product.
struct ExpertReference {
    std::int64_t expert_count = 0;
    Vec centroid;

    std::size_t dim() const { return centroid.size(); }
};

// Builds the reference from raw expert vectors. Empty set ->
// EmptyInputError; mixed dims -> DimError; zero-norm expert ->
// ZeroNormError.
ExpertReference build_expert_reference(std::span<const Vec> expert_vectors);

// Mean cosine similarity of the candidate against the expert set, in
// [-1, 1]. Zero-norm candidate -> ZeroNormError; dim mismatch -> DimError.
double semantic_reward(const Vec& candidate, const ExpertReference& ref);

// Batch scoring; output order matches input order.
std::vector<std::pair<std::string, double>> semantic_reward_batch(
    std::span<const std::pair<std::string, Vec>> candidates, const ExpertReference& ref);

}  // namespace sage::reward
