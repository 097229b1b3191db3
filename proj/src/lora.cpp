#include "sage/lora.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sage/fsio.hpp"
#include "sage/rng.hpp"
#include "sage/text.hpp"

namespace sage::lora {

using nlohmann::json;

LoraLayer::LoraLayer(Matrix w0, std::int64_t rank, double alpha)
    : w0_(std::move(w0)), rank_(rank), alpha_(alpha) {
    if (w0_.rows < 1 || w0_.cols < 1) throw ConfigError("lora: W0 must be non-empty");
    if (rank_ < 1) throw ConfigError("lora: rank must be at least 1");
    if (static_cast<std::size_t>(rank_) > std::min(w0_.rows, w0_.cols)) {
        throw ConfigError("lora: rank exceeds min(d, k)");
    }
    if (!(alpha_ >= 0.0) || !std::isfinite(alpha_)) {
        throw ConfigError("lora: alpha must be non-negative and finite");
    }
    for (double x : w0_.data) {
        if (!std::isfinite(x)) throw NumericalError("lora: non-finite W0");
    }
    a_ = Matrix(static_cast<std::size_t>(rank_), w0_.cols, 0.0);
    b_ = Matrix(w0_.rows, static_cast<std::size_t>(rank_), 0.0);
}

void LoraLayer::set_a(Matrix a) {
    if (a.rows != static_cast<std::size_t>(rank_) || a.cols != w0_.cols) {
        throw DimError("lora: A must be rank x k");
    }
    a_ = std::move(a);
}

void LoraLayer::set_b(Matrix b) {
    if (b.rows != w0_.rows || b.cols != static_cast<std::size_t>(rank_)) {
        throw DimError("lora: B must be d x rank");
    }
    b_ = std::move(b);
}

Vec lora_forward(const LoraLayer& layer, const Vec& x) {
    Vec base = matvec(layer.w0(), x);
    Vec ax = matvec(layer.a(), x);
    Vec bax = matvec(layer.b(), ax);
    double s = layer.scale();
    for (std::size_t i = 0; i < base.size(); ++i) base[i] += s * bax[i];
    return base;
}

Matrix lora_merge(const LoraLayer& layer) {
    Matrix ba = matmul(layer.b(), layer.a());
    Matrix merged = layer.w0();
    double s = layer.scale();
    for (std::size_t i = 0; i < merged.data.size(); ++i) merged.data[i] += s * ba.data[i];
    return merged;
}

std::int64_t adapter_param_count(const LoraLayer& layer) {
    return layer.rank() * static_cast<std::int64_t>(layer.d() + layer.k());
}

std::int64_t base_param_count(const LoraLayer& layer) {
    return static_cast<std::int64_t>(layer.d()) * static_cast<std::int64_t>(layer.k());
}

ToySample parse_toy_sample(const corpus::SentencePair& pair) {
    auto parse_tokens = [&](const std::string& side, const char* name) {
        std::vector<std::int64_t> out;
        for (std::string_view tok : text::split_ws(side)) {
            std::int64_t value = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
            if (ec != std::errc() || ptr != tok.data() + tok.size()) {
                throw VocabError("pair " + pair.id + ": " + name + " token is not an integer: " +
                                 std::string(tok));
            }
            out.push_back(value);
        }
        return out;
    };
    ToySample sample;
    sample.src = parse_tokens(pair.src, "src");
    sample.tgt = parse_tokens(pair.tgt, "tgt");
    return sample;
}

ToyModel::ToyModel(Matrix w0, std::int64_t rank, double alpha, std::int64_t bos)
    : layer(std::move(w0), rank, alpha), bos_id(bos) {
    if (layer.d() != layer.k()) throw ConfigError("toy model: W0 must be square");
    if (layer.d() < 2) throw ConfigError("toy model: vocab must be at least 2");
    if (bos_id < 0 || bos_id >= vocab()) throw ConfigError("toy model: bos_id out of range");
}

ToyModel::ToyModel(std::int64_t vocab_size, std::int64_t rank, double alpha, std::int64_t bos)
    : ToyModel(Matrix(static_cast<std::size_t>(vocab_size),
                      static_cast<std::size_t>(vocab_size), 0.0),
               rank, alpha, bos) {
    (void)vocab_size;
}

namespace {

// Aggregated bigram counts: counts.at(ctx, y) is how often token y follows
// context ctx across the dataset. All gradient math runs on this V x V
// summary instead of the raw sequences.
struct BigramCounts {
    Matrix counts;
    std::vector<double> row_totals;
    double total_positions = 0.0;
};

BigramCounts aggregate(const ToyModel& model, std::span<const ToySample> dataset) {
    if (dataset.empty()) throw EmptyInputError("toy dataset is empty");
    std::int64_t v = model.vocab();
    BigramCounts bc;
    bc.counts = Matrix(static_cast<std::size_t>(v), static_cast<std::size_t>(v), 0.0);
    bc.row_totals.assign(static_cast<std::size_t>(v), 0.0);
    for (const ToySample& sample : dataset) {
        std::int64_t ctx = model.bos_id;
        for (std::int64_t y : sample.tgt) {
            if (y < 0 || y >= v) {
                throw VocabError("token " + std::to_string(y) + " outside vocab of " +
                                 std::to_string(v));
            }
            bc.counts.at(static_cast<std::size_t>(ctx), static_cast<std::size_t>(y)) += 1.0;
            bc.row_totals[static_cast<std::size_t>(ctx)] += 1.0;
            bc.total_positions += 1.0;
            ctx = y;
        }
    }
    if (bc.total_positions == 0.0) {
        throw DegenerateInput("toy dataset has no target tokens");
    }
    return bc;
}

// Effective logits for one context column: W0[:, ctx] + scale * B (A[:, ctx]).
Vec context_logits(const LoraLayer& layer, std::size_t ctx) {
    std::size_t d = layer.d();
    std::size_t r = static_cast<std::size_t>(layer.rank());
    Vec acol(r);
    for (std::size_t i = 0; i < r; ++i) acol[i] = layer.a().at(i, ctx);
    Vec z(d);
    double s = layer.scale();
    for (std::size_t row = 0; row < d; ++row) {
        double delta = 0.0;
        for (std::size_t i = 0; i < r; ++i) delta += layer.b().at(row, i) * acol[i];
        z[row] = layer.w0().at(row, ctx) + s * delta;
    }
    return z;
}

double nll_from_counts(const ToyModel& model, const BigramCounts& bc) {
    std::size_t v = static_cast<std::size_t>(model.vocab());
    double loss = 0.0;
    for (std::size_t ctx = 0; ctx < v; ++ctx) {
        if (bc.row_totals[ctx] == 0.0) continue;
        Vec z = context_logits(model.layer, ctx);
        double mx = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double zi : z) sum += std::exp(zi - mx);
        double lse = mx + std::log(sum);
        for (std::size_t y = 0; y < v; ++y) {
            double cnt = bc.counts.at(ctx, y);
            if (cnt > 0.0) loss -= cnt * (z[y] - lse);
        }
    }
    loss /= bc.total_positions;
    if (!std::isfinite(loss)) throw NumericalError("toy nll is non-finite");
    return loss;
}

}  // namespace

double nll_loss(const ToyModel& model, std::span<const ToySample> dataset) {
    return nll_from_counts(model, aggregate(model, dataset));
}

ToyTrainResult train_lora_toy(ToyModel& model, std::span<const ToySample> dataset,
                              const ToyTrainOptions& opts) {
    if (opts.epochs < 1) throw ConfigError("toy train: epochs must be at least 1");
    if (!(opts.learning_rate > 0.0) || !std::isfinite(opts.learning_rate)) {
        throw ConfigError("toy train: learning_rate must be positive");
    }
    if (!(opts.init_range >= 0.0) || !std::isfinite(opts.init_range)) {
        throw ConfigError("toy train: init_range must be non-negative");
    }

    BigramCounts bc = aggregate(model, dataset);
    LoraLayer& layer = model.layer;
    std::size_t v = static_cast<std::size_t>(model.vocab());
    std::size_t r = static_cast<std::size_t>(layer.rank());

    // Fresh adapter: A uniform in [-init_range, init_range) filled
    // row-major from the seed stream, B at zero.
    Rng rng(opts.seed);
    Matrix a(r, v);
    for (double& x : a.data) x = rng.uniform(-opts.init_range, opts.init_range);
    layer.set_a(std::move(a));
    layer.set_b(Matrix(v, r, 0.0));

    ToyTrainResult result;
    result.loss_trace.reserve(static_cast<std::size_t>(opts.epochs) + 1);
    result.loss_trace.push_back(nll_from_counts(model, bc));

    double s = layer.scale();
    for (std::int64_t epoch = 0; epoch < opts.epochs; ++epoch) {
        Matrix grad_a(r, v, 0.0);
        Matrix grad_b(v, r, 0.0);
        for (std::size_t ctx = 0; ctx < v; ++ctx) {
            if (bc.row_totals[ctx] == 0.0) continue;
            Vec z = context_logits(layer, ctx);
            double mx = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (double zi : z) sum += std::exp(zi - mx);
            // g = (softmax(z) * N_ctx - counts[ctx, :]) / T
            Vec g(v);
            for (std::size_t y = 0; y < v; ++y) {
                double p = std::exp(z[y] - mx) / sum;
                g[y] = (p * bc.row_totals[ctx] - bc.counts.at(ctx, y)) / bc.total_positions;
            }
            Vec acol(r);
            for (std::size_t i = 0; i < r; ++i) acol[i] = layer.a().at(i, ctx);
            // dL/dB += s * g acol^T; dL/dA[:, ctx] = s * B^T g
            for (std::size_t row = 0; row < v; ++row) {
                if (g[row] == 0.0) continue;
                for (std::size_t i = 0; i < r; ++i) {
                    grad_b.at(row, i) += s * g[row] * acol[i];
                }
            }
            for (std::size_t i = 0; i < r; ++i) {
                double acc = 0.0;
                for (std::size_t row = 0; row < v; ++row) {
                    acc += layer.b().at(row, i) * g[row];
                }
                grad_a.at(i, ctx) += s * acc;
            }
        }
        Matrix new_a = layer.a();
        Matrix new_b = layer.b();
        for (std::size_t i = 0; i < new_a.data.size(); ++i) {
            new_a.data[i] -= opts.learning_rate * grad_a.data[i];
        }
        for (std::size_t i = 0; i < new_b.data.size(); ++i) {
            new_b.data[i] -= opts.learning_rate * grad_b.data[i];
        }
        layer.set_a(std::move(new_a));
        layer.set_b(std::move(new_b));
        result.loss_trace.push_back(nll_from_counts(model, bc));
    }
    return result;
}

void write_adapter(const LoraLayer& layer, std::uint64_t seed, std::ostream& out) {
    json obj{{"d", layer.d()},
             {"k", layer.k()},
             {"rank", layer.rank()},
             {"alpha", layer.alpha()},
             {"A", layer.a().data},
             {"B", layer.b().data},
             {"seed", seed}};
    out << obj.dump(2) << '\n';
    if (!out) throw IoError("adapter write failed");
}

void write_adapter_file(const LoraLayer& layer, std::uint64_t seed,
                        const std::filesystem::path& path) {
    std::ostringstream buf;
    write_adapter(layer, seed, buf);
    fsio::atomic_write_file(path, buf.view());
}

void load_adapter_into(LoraLayer& layer, std::istream& in, std::uint64_t* seed_out) {
    json obj = json::parse(in, nullptr, false);
    if (obj.is_discarded()) throw ParseError("adapter: invalid JSON");
    if (!obj.is_object()) throw SchemaError("adapter: expected a JSON object");
    try {
        auto d = obj.at("d").get<std::int64_t>();
        auto k = obj.at("k").get<std::int64_t>();
        auto rank = obj.at("rank").get<std::int64_t>();
        auto alpha = obj.at("alpha").get<double>();
        if (d != static_cast<std::int64_t>(layer.d()) ||
            k != static_cast<std::int64_t>(layer.k()) || rank != layer.rank()) {
            throw FormatError("adapter: shape does not match the target layer");
        }
        if (std::fabs(alpha - layer.alpha()) > 0.0) {
            throw FormatError("adapter: alpha does not match the target layer");
        }
        auto a_flat = obj.at("A").get<Vec>();
        auto b_flat = obj.at("B").get<Vec>();
        std::size_t r = static_cast<std::size_t>(rank);
        if (a_flat.size() != r * layer.k() || b_flat.size() != layer.d() * r) {
            throw FormatError("adapter: flat matrix lengths do not match shapes");
        }
        Matrix a(r, layer.k());
        a.data = std::move(a_flat);
        Matrix b(layer.d(), r);
        b.data = std::move(b_flat);
        layer.set_a(std::move(a));
        layer.set_b(std::move(b));
        if (seed_out) *seed_out = obj.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("adapter: ") + e.what());
    }
}

void load_adapter_file_into(LoraLayer& layer, const std::filesystem::path& path,
                            std::uint64_t* seed_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    load_adapter_into(layer, in, seed_out);
}

}  // namespace sage::lora
