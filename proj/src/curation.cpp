#include "sage/curation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace sage::curation {

namespace {

struct Scored {
    const policy::PoolItem* item = nullptr;
    double score = 0.0;
};

// True when a ranks ahead of b: higher score first, ties by ascending id.
bool ranks_before(const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item->id < b.item->id;
}

corpus::CuratedManifest finish(std::vector<Scored> selected, std::int64_t budget_k) {
    corpus::CuratedManifest m;
    m.budget_k = budget_k;
    m.entries.reserve(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i) {
        m.entries.push_back({selected[i].item->id, selected[i].score,
                             static_cast<std::int64_t>(i) + 1});
        m.total_reward += selected[i].score;
    }
    return m;
}

void check_unique_ids(std::span<const policy::PoolItem> pool) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(pool.size());
    for (const policy::PoolItem& item : pool) {
        if (!seen.insert(item.id).second) throw DuplicateId(item.id);
    }
}

}  // namespace

void CurationConfig::validate() const {
    if (budget_k < 1) throw ConfigError("curation: budget_K must be at least 1");
}

corpus::CuratedManifest curate(const policy::PolicyParams& params,
                               std::span<const policy::PoolItem> pool,
                               const CurationConfig& cfg) {
    cfg.validate();
    if (pool.empty()) throw EmptyInputError("curate: empty pool");
    check_unique_ids(pool);

    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.budget_k), pool.size());

    // Bounded selection: keep the current top k in a heap whose root is the
    // weakest kept candidate.
    auto worse = [](const Scored& a, const Scored& b) { return ranks_before(a, b); };
    std::vector<Scored> heap;
    heap.reserve(k + 1);
    for (const policy::PoolItem& item : pool) {
        double s = cfg.score_mode == ScoreMode::policy ? policy::policy_score(params, item.features)
                                                       : item.reward;
        if (!std::isfinite(s)) throw NumericalError("curate: non-finite score for " + item.id);
        Scored cand{&item, s};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), worse);
        } else if (ranks_before(cand, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    }
    std::sort_heap(heap.begin(), heap.end(), worse);
    return finish(std::move(heap), cfg.budget_k);
}

corpus::CuratedManifest curate_with_scorer(std::span<const policy::PoolItem> pool,
                                           std::int64_t budget_k,
                                           const ContextScorer& scorer) {
    if (budget_k < 1) throw ConfigError("curate_with_scorer: budget_K must be at least 1");
    if (pool.empty()) throw EmptyInputError("curate_with_scorer: empty pool");
    check_unique_ids(pool);

    std::vector<const policy::PoolItem*> remaining;
    remaining.reserve(pool.size());
    for (const policy::PoolItem& item : pool) remaining.push_back(&item);

    corpus::CuratedManifest m;
    m.budget_k = budget_k;
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(budget_k), pool.size());
    for (std::size_t step = 1; step <= k; ++step) {
        std::size_t best = 0;
        double best_score = 0.0;
        bool have = false;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            double s = scorer(*remaining[i], m);
            if (!std::isfinite(s)) {
                throw NumericalError("curate_with_scorer: non-finite score for " +
                                     remaining[i]->id);
            }
            if (!have || s > best_score ||
                (s == best_score && remaining[i]->id < remaining[best]->id)) {
                best = i;
                best_score = s;
                have = true;
            }
        }
        m.entries.push_back({remaining[best]->id, best_score,
                             static_cast<std::int64_t>(step)});
        m.total_reward += best_score;
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return m;
}

std::vector<std::string> brute_force_topk(
    std::span<const std::pair<std::string, double>> scored, std::int64_t k) {
    if (k < 1) throw ConfigError("brute_force_topk: k must be at least 1");
    std::vector<std::pair<std::string, double>> sorted(scored.begin(), scored.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), sorted.size());
    std::vector<std::string> ids;
    ids.reserve(take);
    for (std::size_t i = 0; i < take; ++i) ids.push_back(sorted[i].first);
    return ids;
}

}  // namespace sage::curation
