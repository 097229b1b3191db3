// Release gate. Each numbered check prints exactly one [PASS]/[FAIL] line
// with a short measurement, and the process exits nonzero if any check
// fails or overruns its time budget.
//
// Usage: sage_acceptance --cli /path/to/sage --data /path/to/tests/data
//
// --cli is the pipeline binary (exercised by the determinism check) and
// --data is the directory holding the frozen scoring fixtures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "sage/corpus_io.hpp"
#include "sage/curation.hpp"
#include "sage/embedding.hpp"
#include "sage/errors.hpp"
#include "sage/fsio.hpp"
#include "sage/hashing.hpp"
#include "sage/linalg.hpp"
#include "sage/lora.hpp"
#include "sage/metrics.hpp"
#include "sage/policy.hpp"
#include "sage/reward.hpp"
#include "sage/rng.hpp"
#include "sage/sustainability.hpp"

#include "synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using sage::Rng;
using sage::Vec;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string num(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

Vec random_vec(Rng& rng, std::size_t dim) {
    while (true) {
        Vec v(dim);
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
        if (sage::l2_norm(v) > 1e-6) return v;
    }
}

// ---------------------------------------------------------------------------
// 1. Fast reward equals the brute-force mean cosine.

Outcome check_reward_centroid() {
    const std::size_t dims[] = {2, 8, 64, 768};
    double max_err = 0.0;
    std::size_t instances = 0;
    for (std::size_t d : dims) {
        Rng rng(sage::derive_seed(101, d, 0));
        for (int trial = 0; trial < 250; ++trial) {
            std::size_t experts = 1 + rng.next_below(12);
            std::vector<Vec> expert_vecs;
            expert_vecs.reserve(experts);
            for (std::size_t j = 0; j < experts; ++j) expert_vecs.push_back(random_vec(rng, d));
            Vec candidate = random_vec(rng, d);

            sage::reward::ExpertReference ref =
                sage::reward::build_expert_reference(expert_vecs);
            double fast = sage::reward::semantic_reward(candidate, ref);

            double cnorm = sage::l2_norm(candidate);
            double brute = 0.0;
            for (const Vec& e : expert_vecs) {
                brute += sage::dot(candidate, e) / (cnorm * sage::l2_norm(e));
            }
            brute /= static_cast<double>(experts);

            max_err = std::max(max_err, std::abs(fast - brute));
            ++instances;
        }
    }
    return {max_err < 1e-9 && instances >= 1000,
            "instances=" + std::to_string(instances) + " max_abs_err=" + num(max_err)};
}

// ---------------------------------------------------------------------------
// 2. Analytic policy gradient vs central finite differences.

Outcome check_policy_gradient() {
    const std::int64_t group_sizes[] = {2, 3, 8};
    const std::int64_t traj_lens[] = {1, 2, 4};
    const double betas[] = {0.5, 1.0, 2.0};
    double max_rel = 0.0;
    int instances = 0;

    for (std::int64_t g : group_sizes) {
        for (std::int64_t len : traj_lens) {
            for (int rep = 0; rep < 12; ++rep) {
                Rng rng(sage::derive_seed(202, static_cast<std::uint64_t>(g * 100 + len),
                                          static_cast<std::uint64_t>(rep)));
                std::size_t dim = 2 + rng.next_below(7);  // 2..8
                std::size_t pool_n = static_cast<std::size_t>(len) + 4 + rng.next_below(10);

                std::vector<sage::policy::PoolItem> pool(pool_n);
                for (std::size_t i = 0; i < pool_n; ++i) {
                    pool[i].id = "c" + std::to_string(i);
                    pool[i].features = random_vec(rng, dim);
                    pool[i].reward = rng.next_double();
                }
                sage::policy::PolicyParams params{random_vec(rng, dim)};

                sage::policy::GrpoConfig cfg;
                cfg.group_size = g;
                cfg.traj_len = len;
                cfg.pool_sample = static_cast<std::int64_t>(pool_n);
                cfg.beta = betas[rep % 3];

                // Degenerate draws (every rollout landing on the same total
                // reward) have no preference pairs and no defined gradient;
                // resample those from a fresh stream.
                std::vector<sage::policy::Rollout> group;
                for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
                    group.clear();
                    for (std::int64_t j = 0; j < g; ++j) {
                        Rng roll_rng(sage::derive_seed(
                            203, static_cast<std::uint64_t>(rep) * 64 + attempt,
                            static_cast<std::uint64_t>(j)));
                        group.push_back(
                            sage::policy::sample_trajectory(params, pool, len, roll_rng));
                    }
                    bool varied = false;
                    for (const auto& rollout : group) {
                        varied = varied || rollout.trajectory.total_reward !=
                                               group.front().trajectory.total_reward;
                    }
                    if (varied) break;
                }

                Vec analytic = sage::policy::grpo_gradient(params, pool, group, cfg);
                const double h = 1e-5;
                for (std::size_t i = 0; i < dim; ++i) {
                    sage::policy::PolicyParams hi = params, lo = params;
                    hi.theta[i] += h;
                    lo.theta[i] -= h;
                    double fd = (sage::policy::grpo_surrogate(hi, pool, group, cfg) -
                                 sage::policy::grpo_surrogate(lo, pool, group, cfg)) /
                                (2.0 * h);
                    double rel = std::abs(analytic[i] - fd) / std::max(1e-2, std::abs(fd));
                    max_rel = std::max(max_rel, rel);
                }
                ++instances;
            }
        }
    }
    return {max_rel < 1e-4 && instances >= 100,
            "instances=" + std::to_string(instances) + " max_rel_err=" + num(max_rel)};
}

// ---------------------------------------------------------------------------
// 3. Preference-loss anchors: ln 2 at zero margin and at zero sharpness.

Outcome check_loss_anchors() {
    const double ln2 = std::log(2.0);
    double max_dev = 0.0;
    Rng rng(303);
    for (int trial = 0; trial < 200; ++trial) {
        double beta = rng.uniform(0.0, 8.0);
        max_dev = std::max(max_dev, std::abs(sage::policy::pair_loss(0.0, beta) - ln2));

        double margin = rng.uniform(-1e6, 1e6);
        max_dev = std::max(max_dev, std::abs(sage::policy::pair_loss(margin, 0.0) - ln2));
    }
    return {max_dev < 1e-12, "max_dev_from_ln2=" + num(max_dev)};
}

// ---------------------------------------------------------------------------
// 4. Fast curation equals the brute-force top-K oracle, ids and order.

Outcome check_curation_oracle() {
    int pools_checked = 0;
    std::size_t largest = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Rng rng(sage::derive_seed(404, static_cast<std::uint64_t>(trial), 0));
        std::size_t n;
        if (trial == 0) {
            n = 10;
        } else if (trial == 1) {
            n = 10000;
        } else {
            n = static_cast<std::size_t>(
                std::lround(std::exp(rng.uniform(std::log(10.0), std::log(10000.0)))));
        }
        largest = std::max(largest, n);

        std::int64_t k;
        if (trial % 3 == 0) {
            k = 1;
        } else if (trial % 3 == 1) {
            k = static_cast<std::int64_t>(n);
        } else {
            k = 1 + static_cast<std::int64_t>(rng.next_below(n));
        }

        const bool quantized = trial % 5 == 2;  // force score ties
        std::vector<sage::policy::PoolItem> pool(n);
        std::vector<std::pair<std::string, double>> scored(n);
        for (std::size_t i = 0; i < n; ++i) {
            double score = rng.next_double();
            if (quantized) score = std::round(score * 8.0) / 8.0;
            char buf[24];
            std::snprintf(buf, sizeof buf, "c%05zu", i);
            pool[i] = {buf, {score}, score};
            scored[i] = {buf, score};
        }

        sage::policy::PolicyParams unit{{1.0}};
        sage::curation::CurationConfig cfg;
        cfg.budget_k = k;
        sage::corpus::CuratedManifest manifest = sage::curation::curate(unit, pool, cfg);
        std::vector<std::string> oracle = sage::curation::brute_force_topk(scored, k);

        if (manifest.entries.size() != oracle.size()) {
            return {false, "pool " + std::to_string(trial) + ": size mismatch"};
        }
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            if (manifest.entries[i].id != oracle[i]) {
                return {false, "pool " + std::to_string(trial) + ": order diverges at rank " +
                                   std::to_string(i + 1)};
            }
        }
        ++pools_checked;
    }
    return {pools_checked == 200,
            "pools=" + std::to_string(pools_checked) +
                " largest=" + std::to_string(largest)};
}

// ---------------------------------------------------------------------------
// 5. End-to-end curation on the two-cluster corpus: the trained policy's
//    3% subset is in-domain and lifts the mean reward.

Outcome check_synthetic_curation() {
    sagetest::SyntheticBench bench = sagetest::make_bench(1);
    const std::uint64_t embed_seed = 1;
    sage::embed::EmbeddingStore store = sagetest::build_store(bench.corpus, 64, embed_seed);

    std::vector<Vec> expert_vecs;
    expert_vecs.reserve(bench.expert_targets.size());
    for (const std::string& target : bench.expert_targets) {
        expert_vecs.push_back(sage::embed::hash_embed(target, 64, embed_seed));
    }
    sage::reward::ExpertReference ref = sage::reward::build_expert_reference(expert_vecs);
    std::vector<sage::policy::PoolItem> pool =
        sage::policy::build_pool(bench.corpus, store, ref);

    sage::policy::GrpoConfig cfg;  // stock training schedule
    cfg.seed = 0;
    sage::policy::TrainResult trained =
        sage::policy::train_policy(bench.corpus, store, ref, cfg);

    sage::curation::CurationConfig ccfg;
    ccfg.budget_k = 300;  // 3% of the pool
    sage::corpus::CuratedManifest manifest =
        sage::curation::curate(trained.params, pool, ccfg);

    std::unordered_map<std::string, double> reward_by_id;
    double pool_reward = 0.0;
    for (const auto& item : pool) {
        reward_by_id.emplace(item.id, item.reward);
        pool_reward += item.reward;
    }
    pool_reward /= static_cast<double>(pool.size());

    std::size_t hits = 0;
    double selected_reward = 0.0;
    for (const auto& entry : manifest.entries) {
        hits += bench.in_domain_ids.count(entry.id);
        selected_reward += reward_by_id.at(entry.id);
    }
    double precision = static_cast<double>(hits) / static_cast<double>(manifest.entries.size());
    selected_reward /= static_cast<double>(manifest.entries.size());

    bool ok = precision >= 0.9 && selected_reward > pool_reward + 0.2;
    return {ok, "precision=" + num(precision) + " mean_selected=" + num(selected_reward) +
                    " mean_pool=" + num(pool_reward)};
}

// ---------------------------------------------------------------------------
// 6. Adapter algebra: merge == forward, zeroed adapter == base map, and the
//    base weights never move during training.

Outcome check_lora_equivalences() {
    double max_diff = 0.0;
    Rng rng(606);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t d = 1 + rng.next_below(8);
        std::size_t k = 1 + rng.next_below(8);
        std::int64_t r = 1 + static_cast<std::int64_t>(rng.next_below(std::min(d, k)));

        sage::Matrix w0(d, k);
        for (double& x : w0.data) x = rng.uniform(-1.0, 1.0);
        sage::lora::LoraLayer layer(w0, r, rng.uniform(0.0, 4.0));

        sage::Matrix a(static_cast<std::size_t>(r), k), b(d, static_cast<std::size_t>(r));
        for (double& x : a.data) x = rng.uniform(-1.0, 1.0);
        for (double& x : b.data) x = rng.uniform(-1.0, 1.0);
        layer.set_a(a);
        layer.set_b(b);

        Vec x = random_vec(rng, k);
        Vec via_forward = sage::lora::lora_forward(layer, x);
        Vec via_merge = sage::matvec(sage::lora::lora_merge(layer), x);
        for (std::size_t i = 0; i < d; ++i) {
            max_diff = std::max(max_diff, std::abs(via_forward[i] - via_merge[i]));
        }

        Vec base = sage::matvec(w0, x);
        layer.set_b(sage::Matrix(d, static_cast<std::size_t>(r), 0.0));
        Vec zero_b = sage::lora::lora_forward(layer, x);
        sage::lora::LoraLayer zero_alpha(w0, r, 0.0);
        zero_alpha.set_a(a);
        zero_alpha.set_b(b);
        Vec zero_a = sage::lora::lora_forward(zero_alpha, x);
        for (std::size_t i = 0; i < d; ++i) {
            if (zero_b[i] != base[i] || zero_a[i] != base[i]) {
                return {false, "zeroed adapter diverges from the base map"};
            }
        }
    }

    sage::lora::ToyModel model(8, 2, 16.0, 0);
    std::vector<double> w0_before = model.layer.w0().data;
    std::vector<sage::lora::ToySample> data = {{{}, {1, 2, 3}}, {{}, {2, 3, 4, 5}}};
    sage::lora::ToyTrainOptions opts;
    opts.epochs = 50;
    opts.learning_rate = 0.1;
    sage::lora::train_lora_toy(model, data, opts);
    bool frozen = std::memcmp(model.layer.w0().data.data(), w0_before.data(),
                              w0_before.size() * sizeof(double)) == 0;

    return {max_diff < 1e-12 && frozen,
            "merge_vs_forward_max=" + num(max_diff) +
                (frozen ? " base_weights=frozen" : " base_weights=MOVED")};
}

// ---------------------------------------------------------------------------
// 7. Training on the curated subset beats an equal-size random subset on
//    held-out in-domain NLL across seeds.

Outcome check_curated_vs_random() {
    auto tokens_of = [](const std::string& text) {
        sage::lora::ToySample sample;
        const char* p = text.c_str();
        char* end = nullptr;
        while (*p) {
            long v = std::strtol(p, &end, 10);
            sample.tgt.push_back(v);
            p = end;
            while (*p == ' ') ++p;
        }
        return sample;
    };

    int wins = 0;
    double margin_sum = 0.0;
    const int seeds = 10;
    const std::size_t subset_k = 300;
    for (int s = 1; s <= seeds; ++s) {
        sagetest::SyntheticBench bench = sagetest::make_bench(static_cast<std::uint64_t>(s));
        sage::embed::EmbeddingStore store =
            sagetest::build_store(bench.corpus, 64, static_cast<std::uint64_t>(s));
        std::vector<Vec> expert_vecs;
        for (const std::string& target : bench.expert_targets) {
            expert_vecs.push_back(
                sage::embed::hash_embed(target, 64, static_cast<std::uint64_t>(s)));
        }
        sage::reward::ExpertReference ref =
            sage::reward::build_expert_reference(expert_vecs);
        std::vector<sage::policy::PoolItem> pool =
            sage::policy::build_pool(bench.corpus, store, ref);

        sage::policy::GrpoConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(s);
        sage::policy::TrainResult trained =
            sage::policy::train_policy(bench.corpus, store, ref, cfg);
        sage::curation::CurationConfig ccfg;
        ccfg.budget_k = static_cast<std::int64_t>(subset_k);
        sage::corpus::CuratedManifest manifest =
            sage::curation::curate(trained.params, pool, ccfg);

        std::unordered_map<std::string, std::size_t> by_id;
        for (std::size_t i = 0; i < bench.corpus.size(); ++i) {
            by_id.emplace(bench.corpus[i].id, i);
        }
        std::vector<sage::lora::ToySample> curated;
        curated.reserve(subset_k);
        for (const auto& entry : manifest.entries) {
            curated.push_back(
                sage::lora::parse_toy_sample(bench.corpus[by_id.at(entry.id)]));
        }

        Rng pick(sage::derive_seed(static_cast<std::uint64_t>(s), 9, 0));
        std::vector<sage::lora::ToySample> random_subset;
        random_subset.reserve(subset_k);
        for (std::size_t idx : pick.sample_indices(bench.corpus.size(), subset_k)) {
            random_subset.push_back(sage::lora::parse_toy_sample(bench.corpus[idx]));
        }

        std::vector<sage::lora::ToySample> heldout;
        heldout.reserve(bench.heldout_targets.size());
        for (const std::string& target : bench.heldout_targets) {
            heldout.push_back(tokens_of(target));
        }

        // The stock engine step size is sized for long schedules; this
        // benchmark budget needs a hotter one to move off the zero adapter.
        sage::lora::ToyTrainOptions opts;
        opts.epochs = 300;
        opts.learning_rate = 0.2;
        opts.seed = static_cast<std::uint64_t>(s);

        sage::lora::ToyModel curated_model(32, 4, 16.0, 0);
        sage::lora::train_lora_toy(curated_model, curated, opts);
        double curated_nll = sage::lora::nll_loss(curated_model, heldout);

        sage::lora::ToyModel random_model(32, 4, 16.0, 0);
        sage::lora::train_lora_toy(random_model, random_subset, opts);
        double random_nll = sage::lora::nll_loss(random_model, heldout);

        if (curated_nll < random_nll) ++wins;
        margin_sum += random_nll - curated_nll;
    }
    return {wins >= 9, "wins=" + std::to_string(wins) + "/" + std::to_string(seeds) +
                           " mean_nll_margin=" + num(margin_sum / seeds)};
}

// ---------------------------------------------------------------------------
// 8. Corpus scoring suite: identity, clipping, geometric mean, brevity
//    penalty branches, and agreement with the independent reference scorer
//    on the frozen 50-segment fixture.

Outcome check_bleu_suite(const fs::path& data_dir) {
    using sage::metrics::bleu_segment;
    auto toks = [](std::vector<std::string> v) { return v; };

    auto identity = bleu_segment(toks({"the", "cat", "sat", "on", "the", "mat"}),
                                 toks({"the", "cat", "sat", "on", "the", "mat"}));
    if (identity.score != 100.0) return {false, "identity != 100"};

    auto clipped = bleu_segment(toks({"the", "the", "the", "the"}), toks({"the", "cat"}));
    if (std::abs(clipped.precisions[0] - 0.25) > 1e-15 || clipped.score != 0.0) {
        return {false, "clipping fixture: p1=" + num(clipped.precisions[0]) +
                           " score=" + num(clipped.score)};
    }

    auto geo = bleu_segment(toks({"a", "b", "c", "d", "e"}), toks({"a", "b", "c", "d", "f"}));
    if (std::abs(geo.score - 66.874) > 0.01) {
        return {false, "geometric fixture score=" + num(geo.score)};
    }

    auto long_hyp = bleu_segment(toks({"a", "b", "c", "d", "e"}), toks({"a", "b", "c"}));
    if (long_hyp.brevity_penalty != 1.0) return {false, "BP != 1 for long hypothesis"};
    auto short_hyp = bleu_segment(toks({"a", "b", "c", "d"}), toks({"a", "b", "c", "d", "e"}));
    if (short_hyp.brevity_penalty != std::exp(1.0 - 5.0 / 4.0)) {
        return {false, "BP mismatch for short hypothesis"};
    }
    auto equal_len = bleu_segment(toks({"a", "b", "c"}), toks({"a", "b", "d"}));
    if (equal_len.brevity_penalty != 1.0) return {false, "BP != 1 at equal lengths"};

    auto load_segments = [](const fs::path& path) {
        std::ifstream in(path);
        if (!in) throw sage::IoError("cannot open " + path.string());
        std::vector<std::vector<std::string>> segments;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) segments.push_back(sage::metrics::tokenize_for_bleu(line));
        }
        return segments;
    };
    auto hyps = load_segments(data_dir / "bleu50" / "hyp.txt");
    auto refs = load_segments(data_dir / "bleu50" / "ref.txt");
    json golden = json::parse(sage::fsio::read_file(data_dir / "bleu50" / "golden.json"));
    double reference_score = golden.at("score").get<double>();

    auto corpus_report = sage::metrics::bleu_corpus(hyps, refs, {});
    double diff = std::abs(corpus_report.score - reference_score);
    if (hyps.size() != 50 || diff > 0.01) {
        return {false, "fixture segments=" + std::to_string(hyps.size()) +
                           " |score-golden|=" + num(diff)};
    }
    return {true, "golden_diff=" + num(diff) + " fixture_score=" + num(corpus_report.score)};
}

// ---------------------------------------------------------------------------
// 9. Regression-head math: mixing weights form a shift-invariant simplex
//    and fused features obey the 8d length law.

Outcome check_head_math() {
    double max_sum_dev = 0.0;
    double max_shift_dev = 0.0;
    Rng rng(909);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t layers = 1 + rng.next_below(8);

        // One-hot pooled layers read the softmax weights out directly.
        std::vector<Vec> basis(layers, Vec(layers, 0.0));
        for (std::size_t l = 0; l < layers; ++l) basis[l][l] = 1.0;
        Vec logits(layers);
        for (double& x : logits) x = rng.uniform(-6.0, 6.0);

        Vec weights = sage::metrics::layer_mix(basis, logits);
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0) return {false, "negative mixing weight"};
            sum += w;
        }
        max_sum_dev = std::max(max_sum_dev, std::abs(sum - 1.0));

        std::vector<Vec> pooled(layers);
        std::size_t dim = 1 + rng.next_below(12);
        for (Vec& v : pooled) v = random_vec(rng, dim);
        Vec mixed = sage::metrics::layer_mix(pooled, logits);
        Vec shifted_logits = logits;
        double shift = rng.uniform(-40.0, 40.0);
        for (double& x : shifted_logits) x += shift;
        Vec mixed_shifted = sage::metrics::layer_mix(pooled, shifted_logits);
        for (std::size_t i = 0; i < dim; ++i) {
            max_shift_dev = std::max(max_shift_dev, std::abs(mixed[i] - mixed_shifted[i]));
        }
    }

    for (std::size_t d = 1; d <= 16; ++d) {
        Vec h = random_vec(rng, d), s = random_vec(rng, d), r = random_vec(rng, d);
        Vec fused = sage::metrics::fuse_features(h, s, r);
        if (fused.size() != 8 * d) {
            return {false, "fused length " + std::to_string(fused.size()) + " at d=" +
                               std::to_string(d)};
        }
    }
    bool ok = max_sum_dev < 1e-12 && max_shift_dev < 1e-12;
    return {ok, "max_weight_sum_dev=" + num(max_sum_dev) +
                    " max_shift_dev=" + num(max_shift_dev)};
}

// ---------------------------------------------------------------------------
// 10. Emissions accounting: the documented hardware footprint, the headline
//     reduction rendering, and linearity in training hours.

Outcome check_carbon() {
    sage::carbon::EnergyProfile profile;
    profile.train_hours = 55.0;
    profile.num_gpus = 8;
    sage::carbon::EmissionsReport report = sage::carbon::estimate_emissions(profile);
    if (std::abs(report.co2_kg - 101.156) > 1e-9) {
        return {false, "8x55h footprint co2=" + num(report.co2_kg)};
    }

    double reduction = sage::carbon::percent_reduction(85.6, 4.2);
    if (std::abs(reduction - 95.1) > 0.05 ||
        sage::carbon::format_reduction(reduction) != "95.1") {
        return {false, "reduction=" + num(reduction) + " rendered=" +
                           sage::carbon::format_reduction(reduction)};
    }

    double max_rel = 0.0;
    Rng rng(1010);
    for (int trial = 0; trial < 100; ++trial) {
        sage::carbon::EnergyProfile p;
        p.train_hours = rng.uniform(0.1, 500.0);
        p.num_gpus = 1 + static_cast<std::int64_t>(rng.next_below(64));
        p.tdp_watts = rng.uniform(100.0, 700.0);
        double lambda = rng.uniform(0.01, 50.0);
        sage::carbon::EnergyProfile scaled = p;
        scaled.train_hours = lambda * p.train_hours;
        double direct = sage::carbon::estimate_emissions(scaled).co2_kg;
        double linear = lambda * sage::carbon::estimate_emissions(p).co2_kg;
        max_rel = std::max(max_rel, std::abs(direct - linear) / std::abs(linear));
    }
    return {max_rel <= 1e-12,
            "co2_8x55h=" + num(report.co2_kg) + " reduction=95.1 linearity_rel=" + num(max_rel)};
}

// ---------------------------------------------------------------------------
// 11. Rerunning every subcommand of the installed CLI rewrites each
//     artifact byte for byte.

Outcome check_cli_determinism(const std::string& cli) {
    if (cli.empty()) return {false, "no --cli binary supplied"};

    fs::path root = fs::temp_directory_path() /
                    ("sage_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    struct Cleanup {
        fs::path p;
        ~Cleanup() {
            std::error_code ec;
            fs::remove_all(p, ec);
        }
    } cleanup{root};

    sagetest::SyntheticBench bench = sagetest::make_bench(21, 160, 0.25, 40, 24);
    sage::corpus::write_corpus_file(bench.corpus, root / "corpus.jsonl");
    std::vector<sage::corpus::SentencePair> experts, heldout;
    for (std::size_t i = 0; i < bench.expert_targets.size(); ++i) {
        experts.push_back({"e" + std::to_string(i), "0", bench.expert_targets[i], {}});
    }
    for (std::size_t i = 0; i < bench.heldout_targets.size(); ++i) {
        heldout.push_back({"h" + std::to_string(i), "1", bench.heldout_targets[i], {}});
    }
    sage::corpus::write_corpus_file(experts, root / "experts.jsonl");
    sage::corpus::write_corpus_file(heldout, root / "heldout.jsonl");
    sage::fsio::atomic_write_file(root / "hyp.txt", "1 2 3 4 5 6\n2 3 4 5 6 7\n3 4 5 6\n");
    sage::fsio::atomic_write_file(root / "hyp_b.txt", "1 2 3 4 5 6\n2 3 9 5 6 7\n4 3 6 5\n");
    sage::fsio::atomic_write_file(root / "ref.txt", "1 2 3 4 5 6\n2 3 4 5 6 7\n3 4 5 6 7\n");

    json config{
        {"seed", 11},
        {"paths",
         {{"corpus", (root / "corpus.jsonl").string()},
          {"expert_corpus", (root / "experts.jsonl").string()},
          {"embedding_store", (root / "store.bin").string()},
          {"output_dir", (root / "out").string()}}},
        {"embedding", {{"dim", 16}}},
        {"grpo",
         {{"group_size", 4}, {"traj_len", 3}, {"pool_sample", 24}, {"iterations", 10}}},
        {"curation", {{"budget_K", 24}}},
        {"lora", {{"epochs", 5}, {"learning_rate", 0.05}}},
        {"carbon", {{"train_hours", 2.0}, {"num_gpus", 1}}}};
    sage::fsio::atomic_write_file(root / "config.json", config.dump(2) + "\n");

    const std::string cfg_flag = " -c " + (root / "config.json").string();
    const std::vector<std::string> commands = {
        cli + " embed" + cfg_flag,
        cli + " train-policy" + cfg_flag,
        cli + " curate" + cfg_flag + " --checkpoint " + (root / "out/policy.json").string(),
        cli + " finetune-toy" + cfg_flag + " --manifest " +
            (root / "out/manifest.jsonl").string() + " --eval-corpus " +
            (root / "heldout.jsonl").string(),
        cli + " eval" + cfg_flag + " --hyp " + (root / "hyp.txt").string() + " --hyp-b " +
            (root / "hyp_b.txt").string() + " --ref " + (root / "ref.txt").string(),
        cli + " carbon" + cfg_flag,
        cli + " report" + cfg_flag,
    };
    const std::vector<std::string> artifacts = {
        (root / "store.bin").string(),
        (root / "out/policy.json").string(),
        (root / "out/train_report.json").string(),
        (root / "out/manifest.jsonl").string(),
        (root / "out/curation_report.json").string(),
        (root / "out/adapter.json").string(),
        (root / "out/finetune_report.json").string(),
        (root / "out/eval_report.json").string(),
        (root / "out/emissions.json").string(),
        (root / "out/summary.json").string(),
    };

    auto run_all = [&](const char* tag) -> std::optional<std::string> {
        for (std::size_t i = 0; i < commands.size(); ++i) {
            std::string stdout_path =
                (root / (std::string(tag) + "_cmd" + std::to_string(i) + ".stdout")).string();
            std::string full = commands[i] + " > " + stdout_path + " 2> /dev/null";
            int rc = std::system(full.c_str());
            if (rc != 0) {
                return "subcommand " + std::to_string(i) + " exited with status " +
                       std::to_string(rc);
            }
        }
        return std::nullopt;
    };

    if (auto err = run_all("run1")) return {false, *err};
    std::vector<std::string> first;
    first.reserve(artifacts.size());
    for (const std::string& path : artifacts) {
        if (!fs::exists(path)) return {false, "missing artifact " + path};
        first.push_back(sage::fsio::read_file(path));
    }

    if (auto err = run_all("run2")) return {false, *err};
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        if (sage::fsio::read_file(artifacts[i]) != first[i]) {
            return {false, "artifact differs across reruns: " + artifacts[i]};
        }
    }
    for (std::size_t i = 0; i < commands.size(); ++i) {
        std::string a = sage::fsio::read_file(
            root / ("run1_cmd" + std::to_string(i) + ".stdout"));
        std::string b = sage::fsio::read_file(
            root / ("run2_cmd" + std::to_string(i) + ".stdout"));
        if (a != b) {
            return {false, "stdout differs across reruns for subcommand " + std::to_string(i)};
        }
    }
    return {true, std::to_string(commands.size()) + " subcommands, " +
                      std::to_string(artifacts.size()) + " artifacts byte-identical"};
}

// ---------------------------------------------------------------------------
// 12. Paired t-test fixture against a quadrature oracle for the Student
//     density with two degrees of freedom.

Outcome check_paired_t() {
    const Vec a = {2.0, 4.0, 6.0};
    const Vec b = {1.0, 2.0, 3.0};  // differences 1, 2, 3
    sage::metrics::TTestResult result = sage::metrics::paired_t_test(a, b);

    if (result.df != 2) return {false, "df=" + std::to_string(result.df)};
    if (std::abs(result.t_stat - 3.4641) > 1e-4) {
        return {false, "t=" + num(result.t_stat)};
    }

    // Two-tailed p via Simpson integration of the t density, nu = 2:
    // f(x) = (1 / (2 sqrt 2)) (1 + x^2/2)^(-3/2).
    auto density = [](double x) {
        return (1.0 / (2.0 * std::sqrt(2.0))) * std::pow(1.0 + x * x / 2.0, -1.5);
    };
    const int steps = 20000;  // even
    const double t = result.t_stat;
    const double h = t / steps;
    double integral = density(0.0) + density(t);
    for (int i = 1; i < steps; ++i) {
        integral += density(i * h) * (i % 2 == 0 ? 2.0 : 4.0);
    }
    integral *= h / 3.0;
    double p_oracle = 1.0 - 2.0 * integral;

    double oracle_diff = std::abs(result.p_two_tailed - p_oracle);
    bool ok = oracle_diff <= 1e-3 && std::abs(result.p_two_tailed - 0.0742) <= 1e-3;
    return {ok, "t=" + num(result.t_stat) + " p=" + num(result.p_two_tailed) +
                    " |p-oracle|=" + num(oracle_diff)};
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli;
    std::string data = "tests/data";
    for (int i = 1; i + 1 < argc; i += 2) {
        std::string flag = argv[i];
        if (flag == "--cli") {
            cli = argv[i + 1];
        } else if (flag == "--data") {
            data = argv[i + 1];
        } else {
            std::cerr << "unknown flag " << flag << "\n";
            return 2;
        }
    }

    struct Criterion {
        const char* name;
        double time_limit_s;  // 0 = no stated budget
        std::function<Outcome()> run;
    };
    const fs::path data_dir(data);
    const std::vector<Criterion> criteria = {
        {"reward centroid identity", 5.0, check_reward_centroid},
        {"policy gradient vs finite differences", 30.0, check_policy_gradient},
        {"preference loss anchors", 0.0, check_loss_anchors},
        {"curation equals top-K oracle", 60.0, check_curation_oracle},
        {"synthetic end-to-end curation", 300.0, check_synthetic_curation},
        {"adapter equivalences", 0.0, check_lora_equivalences},
        {"curated beats random fine-tuning", 180.0, check_curated_vs_random},
        {"corpus score suite", 0.0, [&] { return check_bleu_suite(data_dir); }},
        {"regression head math", 0.0, check_head_math},
        {"emissions accounting", 0.0, check_carbon},
        {"subcommand determinism", 0.0, [&] { return check_cli_determinism(cli); }},
        {"paired t-test vs quadrature", 0.0, check_paired_t},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Criterion& criterion = criteria[i];
        auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        bool in_budget = criterion.time_limit_s == 0.0 || elapsed < criterion.time_limit_s;
        bool pass = outcome.pass && in_budget;
        if (!pass) ++failures;

        char line[512];
        std::snprintf(line, sizeof line, "[%s] %02zu %s: %s [%.2fs%s]",
                      pass ? "PASS" : "FAIL", i + 1, criterion.name,
                      outcome.detail.c_str(), elapsed,
                      in_budget ? "" : " OVER BUDGET");
        std::cout << line << "\n";
    }

    std::cout << "acceptance: " << (criteria.size() - failures) << "/" << criteria.size()
              << " criteria passed\n";
    return failures == 0 ? 0 : 1;
}
