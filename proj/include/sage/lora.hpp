#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "sage/corpus_io.hpp"
#include "sage/linalg.hpp"

namespace sage::lora {

// Low-rank adapter around a frozen base weight W0 (d x k):
//   forward: h = W0 x + (alpha / r) B (A x)      A: r x k, B: d x r
//   merge:   W = W0 + (alpha / r) B A
// W0 is immutable after construction; only A and B train. alpha = 0 or
// B = 0 makes the layer exactly the base map.
class LoraLayer {
public:
    LoraLayer(Matrix w0, std::int64_t rank, double alpha);

    const Matrix& w0() const { return w0_; }
    const Matrix& a() const { return a_; }
    const Matrix& b() const { return b_; }
    void set_a(Matrix a);  // shape-checked -> DimError
    void set_b(Matrix b);

    std::int64_t rank() const { return rank_; }
    double alpha() const { return alpha_; }
    double scale() const { return alpha_ / static_cast<double>(rank_); }
    std::size_t d() const { return w0_.rows; }
    std::size_t k() const { return w0_.cols; }

private:
    Matrix w0_;
    Matrix a_;
    Matrix b_;
    std::int64_t rank_;
    double alpha_;
};

Vec lora_forward(const LoraLayer& layer, const Vec& x);
Matrix lora_merge(const LoraLayer& layer);

// r * (d + k) trainable parameters; the base has d * k.
std::int64_t adapter_param_count(const LoraLayer& layer);
std::int64_t base_param_count(const LoraLayer& layer);

struct ToySample {
    std::vector<std::int64_t> src;
    std::vector<std::int64_t> tgt;
};

// Integer-token corpus text -> sample. Tokens that are not plain base-10
// integers -> VocabError.
ToySample parse_toy_sample(const corpus::SentencePair& pair);

// Bigram next-token model over a vocab of size V with a square adapted
// weight: logits for the next token given context c are column c of the
// effective W. Contexts start at bos_id and then follow the target tokens.
struct ToyModel {
    ToyModel(Matrix w0, std::int64_t rank, double alpha, std::int64_t bos_id = 0);
    ToyModel(std::int64_t vocab, std::int64_t rank, double alpha, std::int64_t bos_id = 0);

    std::int64_t vocab() const { return static_cast<std::int64_t>(layer.d()); }

    LoraLayer layer;
    std::int64_t bos_id = 0;
};

// Mean negative log-likelihood of the target tokens. Out-of-range token ->
// VocabError; empty dataset or no target positions -> EmptyInputError /
// DegenerateInput.
double nll_loss(const ToyModel& model, std::span<const ToySample> dataset);

struct ToyTrainOptions {
    std::int64_t epochs = 200;
    double learning_rate = 2e-4;
    std::uint64_t seed = 0;
    double init_range = 0.01;  // A ~ U(-init_range, init_range); B = 0
};

struct ToyTrainResult {
    // epochs + 1 entries: loss before training, then after each epoch.
    std::vector<double> loss_trace;
};

// Full-batch gradient descent on A and B only. Deterministic for a fixed
// (dataset order, options).
ToyTrainResult train_lora_toy(ToyModel& model, std::span<const ToySample> dataset,
                              const ToyTrainOptions& opts);

// Adapter checkpoint: JSON {"d", "k", "rank", "alpha", "A", "B", "seed"}
// with row-major flat matrices.
void write_adapter(const LoraLayer& layer, std::uint64_t seed, std::ostream& out);
void write_adapter_file(const LoraLayer& layer, std::uint64_t seed,
                        const std::filesystem::path& path);
// Loads A/B into an existing layer; shape or hyperparameter mismatch ->
// FormatError.
void load_adapter_into(LoraLayer& layer, std::istream& in, std::uint64_t* seed_out = nullptr);
void load_adapter_file_into(LoraLayer& layer, const std::filesystem::path& path,
                            std::uint64_t* seed_out = nullptr);

}  // namespace sage::lora
