#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sage/linalg.hpp"

namespace sage::metrics {

// Tokenizer used for BLEU: Unicode whitespace becomes plain spaces,
// punctuation (ASCII plus common general/CJK/fullwidth punctuation ranges)
// is split into its own tokens, then the text is split on whitespace. No
// case folding.
std::vector<std::string> tokenize_for_bleu(std::string_view text);

bool is_bleu_punct(char32_t cp);

// N-gram occurrence counts; tokens are joined with single spaces to form
// keys (tokens cannot contain whitespace, so keys are unambiguous).
std::map<std::string, std::int64_t> ngram_counts(std::span<const std::string> tokens, int n);

struct BleuOptions {
    // Add-one smoothing on the n >= 2 precisions. Off by default: any zero
    // precision then zeroes the corpus score.
    bool smoothing = false;
};

struct BleuReport {
    double score = 0.0;  // 0..100
    std::array<double, 4> precisions{};
    double brevity_penalty = 1.0;
    std::int64_t hyp_len = 0;
    std::int64_t ref_len = 0;
};

// Corpus-level BLEU-4 with uniform 1/4 weights over clipped n-gram
// precisions and the short-hypothesis brevity penalty exp(1 - r/c).
// Mismatched segment counts -> DimError; no segments or zero hypothesis
// length -> EmptyInputError.
BleuReport bleu_corpus(const std::vector<std::vector<std::string>>& hyps,
                       const std::vector<std::vector<std::string>>& refs,
                       const BleuOptions& opts = {});

// Single-segment convenience (a corpus of one).
BleuReport bleu_segment(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref, const BleuOptions& opts = {});

// Softmax-weighted sum of per-layer pooled vectors. Sizes must agree ->
// DimError.
Vec layer_mix(std::span<const Vec> pooled_layers, std::span<const double> mix_logits);

// Feature fusion for (hypothesis, source, reference) sentence vectors:
// K(u, v) = [u; v; u*v; |u-v|] and the output is [K(h, s); K(h, r)], length
// 8 * dim.
Vec fuse_features(const Vec& e_h, const Vec& e_s, const Vec& e_r);

struct DenseLayer {
    Matrix weights;
    Vec bias;
};

// Regression head over frozen encoder states: scalar mixing logits for the
// embedding layer plus each encoder layer, then an MLP (tanh hidden
// activations, linear 1-unit output).
struct CometHeadConfig {
    std::int64_t dim = 0;         // pooled sentence vector width
    std::int64_t num_layers = 0;  // encoder layers; mix_logits has num_layers + 1
    Vec mix_logits;
    std::vector<DenseLayer> mlp;

    void validate() const;  // ConfigError on inconsistent shapes
};

// MLP forward pass on an already-fused feature vector.
double regress_score(const CometHeadConfig& cfg, const Vec& x_fuse);

// Full head: mix layers for each of the three inputs, fuse, regress. Each
// span holds num_layers + 1 pooled vectors.
double comet_score(const CometHeadConfig& cfg, std::span<const Vec> hyp_layers,
                   std::span<const Vec> src_layers, std::span<const Vec> ref_layers);

// Weights file: JSON {"dim", "num_layers", "mix_logits", "layers":
// [{"rows", "cols", "weights" (row-major flat), "bias"}, ...]}.
CometHeadConfig load_comet_head(const nlohmann::json& obj);
CometHeadConfig load_comet_head_file(const std::filesystem::path& path);
nlohmann::json comet_head_to_json(const CometHeadConfig& cfg);

struct TTestResult {
    double mean_diff = 0.0;
    double t_stat = 0.0;
    std::int64_t df = 0;
    double p_two_tailed = 1.0;
};

// Paired two-tailed t-test on matched score lists. Sizes must agree ->
// DimError; fewer than two pairs or zero-variance differences ->
// DegenerateInput.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation,
// |error| < 1e-9 over the needed domain. Exposed for direct testing.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace sage::metrics
