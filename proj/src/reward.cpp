#include "sage/reward.hpp"

#include <cmath>
#include <string>

#include "sage/embedding.hpp"

namespace sage::reward {

ExpertReference build_expert_reference(std::span<const Vec> expert_vectors) {
    if (expert_vectors.empty()) throw EmptyInputError("expert set is empty");
    std::size_t dim = expert_vectors.front().size();
    ExpertReference ref;
    ref.expert_count = static_cast<std::int64_t>(expert_vectors.size());
    ref.centroid.assign(dim, 0.0);
    for (const Vec& e : expert_vectors) {
        if (e.size() != dim) {
            throw DimError("expert vectors disagree on dim: " + std::to_string(e.size()) +
                           " vs " + std::to_string(dim));
        }
        Vec unit = embed::normalize(e);
        for (std::size_t i = 0; i < dim; ++i) ref.centroid[i] += unit[i];
    }
    double inv = 1.0 / static_cast<double>(ref.expert_count);
    for (double& x : ref.centroid) x *= inv;
    return ref;
}

double semantic_reward(const Vec& candidate, const ExpertReference& ref) {
    if (ref.expert_count < 1) throw EmptyInputError("expert reference is empty");
    if (candidate.size() != ref.dim()) {
        throw DimError("candidate dim " + std::to_string(candidate.size()) +
                       " vs reference dim " + std::to_string(ref.dim()));
    }
    Vec unit = embed::normalize(candidate);
    double r = dot(unit, ref.centroid);
    if (!std::isfinite(r)) throw NumericalError("semantic_reward: non-finite result");
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}

std::vector<std::pair<std::string, double>> semantic_reward_batch(
    std::span<const std::pair<std::string, Vec>> candidates, const ExpertReference& ref) {
    std::vector<std::pair<std::string, double>> out;
    out.reserve(candidates.size());
    for (const auto& [id, vec] : candidates) {
        out.emplace_back(id, semantic_reward(vec, ref));
    }
    return out;
}

}  // namespace sage::reward
