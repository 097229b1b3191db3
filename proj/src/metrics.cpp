#include "sage/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "sage/errors.hpp"
#include "sage/fsio.hpp"
#include "sage/text.hpp"

namespace sage::metrics {

using nlohmann::json;

bool is_bleu_punct(char32_t cp) {
    if (cp < 128) {
        return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') ||
               (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
    }
    switch (cp) {
        case 0xA1:  // inverted exclamation
        case 0xA7:  // section sign
        case 0xAB:  // left guillemet
        case 0xB6:  // pilcrow
        case 0xB7:  // middle dot
        case 0xBB:  // right guillemet
        case 0xBF:  // inverted question mark
        case 0x30FB:  // katakana middle dot
            return true;
        default:
            break;
    }
    if (cp >= 0x2010 && cp <= 0x2027) return true;  // dashes, quotes, daggers
    if (cp >= 0x2030 && cp <= 0x205E) return true;  // permille..vertical ellipsis
    if (cp >= 0x3001 && cp <= 0x3011) return true;  // CJK comma..black lenticular
    if (cp >= 0x3014 && cp <= 0x301F) return true;  // CJK brackets and quotes
    if (cp >= 0xFF01 && cp <= 0xFF0F) return true;  // fullwidth !../
    if (cp >= 0xFF1A && cp <= 0xFF20) return true;  // fullwidth :..@
    if (cp >= 0xFF3B && cp <= 0xFF40) return true;  // fullwidth [..`
    if (cp >= 0xFF5B && cp <= 0xFF65) return true;  // fullwidth {..halfwidth middle dot
    return false;
}

std::vector<std::string> tokenize_for_bleu(std::string_view t) {
    std::string spaced;
    spaced.reserve(t.size() + 16);
    std::size_t i = 0;
    while (i < t.size()) {
        std::size_t start = i;
        char32_t cp = text::decode_utf8(t, i);
        if (cp != 0xFFFD && text::is_unicode_space(cp)) {
            spaced.push_back(' ');
        } else if (cp != 0xFFFD && is_bleu_punct(cp)) {
            spaced.push_back(' ');
            spaced.append(t.substr(start, i - start));
            spaced.push_back(' ');
        } else {
            spaced.append(t.substr(start, i - start));
        }
    }
    std::vector<std::string_view> views = text::split_ws(spaced);
    return std::vector<std::string>(views.begin(), views.end());
}

std::map<std::string, std::int64_t> ngram_counts(std::span<const std::string> tokens, int n) {
    if (n < 1) throw ConfigError("ngram_counts: n must be at least 1");
    std::map<std::string, std::int64_t> counts;
    if (static_cast<std::size_t>(n) > tokens.size()) return counts;
    std::string key;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        key.clear();
        for (int k = 0; k < n; ++k) {
            if (k) key.push_back(' ');
            key.append(tokens[i + static_cast<std::size_t>(k)]);
        }
        ++counts[key];
    }
    return counts;
}

BleuReport bleu_corpus(const std::vector<std::vector<std::string>>& hyps,
                       const std::vector<std::vector<std::string>>& refs,
                       const BleuOptions& opts) {
    if (hyps.size() != refs.size()) {
        throw DimError("bleu: " + std::to_string(hyps.size()) + " hypotheses vs " +
                       std::to_string(refs.size()) + " references");
    }
    if (hyps.empty()) throw EmptyInputError("bleu: no segments");

    std::array<std::int64_t, 4> matches{};
    std::array<std::int64_t, 4> totals{};
    std::int64_t c = 0, r = 0;
    for (std::size_t seg = 0; seg < hyps.size(); ++seg) {
        const auto& hyp = hyps[seg];
        const auto& ref = refs[seg];
        c += static_cast<std::int64_t>(hyp.size());
        r += static_cast<std::int64_t>(ref.size());
        for (int n = 1; n <= 4; ++n) {
            auto hyp_counts = ngram_counts(hyp, n);
            if (hyp_counts.empty()) continue;
            auto ref_counts = ngram_counts(ref, n);
            for (const auto& [gram, count] : hyp_counts) {
                totals[static_cast<std::size_t>(n - 1)] += count;
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) {
                    matches[static_cast<std::size_t>(n - 1)] += std::min(count, it->second);
                }
            }
        }
    }
    if (c == 0) throw EmptyInputError("bleu: zero hypothesis length");

    BleuReport report;
    report.hyp_len = c;
    report.ref_len = r;
    report.brevity_penalty =
        c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));

    bool any_zero = false;
    double log_sum = 0.0;
    for (int n = 0; n < 4; ++n) {
        double m = static_cast<double>(matches[static_cast<std::size_t>(n)]);
        double tot = static_cast<double>(totals[static_cast<std::size_t>(n)]);
        if (opts.smoothing && n >= 1) {
            m += 1.0;
            tot += 1.0;
        }
        double p = tot > 0.0 ? m / tot : 0.0;
        report.precisions[static_cast<std::size_t>(n)] = p;
        if (p <= 0.0) {
            any_zero = true;
        } else {
            log_sum += 0.25 * std::log(p);
        }
    }
    report.score = any_zero ? 0.0 : 100.0 * report.brevity_penalty * std::exp(log_sum);
    return report;
}

BleuReport bleu_segment(const std::vector<std::string>& hyp,
                        const std::vector<std::string>& ref, const BleuOptions& opts) {
    return bleu_corpus({hyp}, {ref}, opts);
}

Vec layer_mix(std::span<const Vec> pooled_layers, std::span<const double> mix_logits) {
    if (pooled_layers.empty()) throw DimError("layer_mix: no layers");
    if (pooled_layers.size() != mix_logits.size()) {
        throw DimError("layer_mix: " + std::to_string(pooled_layers.size()) + " layers vs " +
                       std::to_string(mix_logits.size()) + " logits");
    }
    std::size_t dim = pooled_layers.front().size();
    double mx = -std::numeric_limits<double>::infinity();
    for (double l : mix_logits) {
        if (!std::isfinite(l)) throw NumericalError("layer_mix: non-finite logit");
        mx = std::max(mx, l);
    }
    double denom = 0.0;
    std::vector<double> w(mix_logits.size());
    for (std::size_t i = 0; i < mix_logits.size(); ++i) {
        w[i] = std::exp(mix_logits[i] - mx);
        denom += w[i];
    }
    Vec out(dim, 0.0);
    for (std::size_t i = 0; i < pooled_layers.size(); ++i) {
        const Vec& layer = pooled_layers[i];
        if (layer.size() != dim) throw DimError("layer_mix: layer width mismatch");
        double weight = w[i] / denom;
        for (std::size_t k = 0; k < dim; ++k) out[k] += weight * layer[k];
    }
    return out;
}

Vec fuse_features(const Vec& e_h, const Vec& e_s, const Vec& e_r) {
    std::size_t d = e_h.size();
    if (e_s.size() != d || e_r.size() != d) {
        throw DimError("fuse_features: input widths disagree");
    }
    if (d == 0) throw DimError("fuse_features: empty inputs");
    Vec out;
    out.reserve(8 * d);
    auto block = [&](const Vec& u, const Vec& v) {
        out.insert(out.end(), u.begin(), u.end());
        out.insert(out.end(), v.begin(), v.end());
        for (std::size_t i = 0; i < d; ++i) out.push_back(u[i] * v[i]);
        for (std::size_t i = 0; i < d; ++i) out.push_back(std::fabs(u[i] - v[i]));
    };
    block(e_h, e_s);
    block(e_h, e_r);
    return out;
}

void CometHeadConfig::validate() const {
    if (dim < 1) throw ConfigError("head: dim must be positive");
    if (num_layers < 1) throw ConfigError("head: num_layers must be positive");
    if (mix_logits.size() != static_cast<std::size_t>(num_layers) + 1) {
        throw ConfigError("head: mix_logits must have num_layers + 1 entries");
    }
    if (mlp.empty()) throw ConfigError("head: empty MLP");
    std::size_t expect = 8 * static_cast<std::size_t>(dim);
    for (std::size_t i = 0; i < mlp.size(); ++i) {
        const DenseLayer& layer = mlp[i];
        if (layer.weights.cols != expect) {
            throw ConfigError("head: layer " + std::to_string(i) + " expects input " +
                              std::to_string(layer.weights.cols) + ", got " +
                              std::to_string(expect));
        }
        if (layer.bias.size() != layer.weights.rows) {
            throw ConfigError("head: layer " + std::to_string(i) + " bias size mismatch");
        }
        expect = layer.weights.rows;
    }
    if (expect != 1) throw ConfigError("head: final layer must have one output");
}

double regress_score(const CometHeadConfig& cfg, const Vec& x_fuse) {
    cfg.validate();
    Vec h = x_fuse;
    for (std::size_t i = 0; i < cfg.mlp.size(); ++i) {
        h = matvec(cfg.mlp[i].weights, h);
        for (std::size_t k = 0; k < h.size(); ++k) {
            h[k] += cfg.mlp[i].bias[k];
            if (i + 1 < cfg.mlp.size()) h[k] = std::tanh(h[k]);
        }
    }
    if (!std::isfinite(h[0])) throw NumericalError("regress_score: non-finite output");
    return h[0];
}

double comet_score(const CometHeadConfig& cfg, std::span<const Vec> hyp_layers,
                   std::span<const Vec> src_layers, std::span<const Vec> ref_layers) {
    Vec e_h = layer_mix(hyp_layers, cfg.mix_logits);
    Vec e_s = layer_mix(src_layers, cfg.mix_logits);
    Vec e_r = layer_mix(ref_layers, cfg.mix_logits);
    return regress_score(cfg, fuse_features(e_h, e_s, e_r));
}

CometHeadConfig load_comet_head(const json& obj) {
    if (!obj.is_object()) throw SchemaError("head: expected a JSON object");
    CometHeadConfig cfg;
    try {
        cfg.dim = obj.at("dim").get<std::int64_t>();
        cfg.num_layers = obj.at("num_layers").get<std::int64_t>();
        cfg.mix_logits = obj.at("mix_logits").get<Vec>();
        for (const auto& layer : obj.at("layers")) {
            DenseLayer dense;
            auto rows = layer.at("rows").get<std::int64_t>();
            auto cols = layer.at("cols").get<std::int64_t>();
            if (rows < 1 || cols < 1) throw ConfigError("head: layer shape must be positive");
            auto weights = layer.at("weights").get<Vec>();
            if (weights.size() != static_cast<std::size_t>(rows * cols)) {
                throw ConfigError("head: weights length does not match rows*cols");
            }
            dense.weights.rows = static_cast<std::size_t>(rows);
            dense.weights.cols = static_cast<std::size_t>(cols);
            dense.weights.data = std::move(weights);
            dense.bias = layer.at("bias").get<Vec>();
            cfg.mlp.push_back(std::move(dense));
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("head: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

CometHeadConfig load_comet_head_file(const std::filesystem::path& path) {
    json obj = json::parse(fsio::read_file(path), nullptr, false);
    if (obj.is_discarded()) throw ParseError("head: invalid JSON in " + path.string());
    return load_comet_head(obj);
}

json comet_head_to_json(const CometHeadConfig& cfg) {
    json layers = json::array();
    for (const DenseLayer& layer : cfg.mlp) {
        layers.push_back(json{{"rows", layer.weights.rows},
                              {"cols", layer.weights.cols},
                              {"weights", layer.weights.data},
                              {"bias", layer.bias}});
    }
    return json{{"dim", cfg.dim},
                {"num_layers", cfg.num_layers},
                {"mix_logits", cfg.mix_logits},
                {"layers", std::move(layers)}};
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("incomplete beta: a, b must be positive");
    if (x < 0.0 || x > 1.0) throw ConfigError("incomplete beta: x must be in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    // I_x(a,b) = x^a (1-x)^b / (a B(a,b)) * 1/CF; use the symmetry
    // I_x(a,b) = 1 - I_{1-x}(b,a) to keep the continued fraction in its
    // fast-converging region.
    if (x > (a + 1.0) / (a + b + 2.0)) {
        return 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
    }

    double log_front = a * std::log(x) + b * std::log1p(-x) - std::log(a) -
                       (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));

    // Modified Lentz evaluation of the standard continued fraction.
    const double tiny = 1e-300;
    const double eps = 1e-15;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return std::exp(log_front) * h;
    }
    throw NumericalError("incomplete beta: continued fraction did not converge");
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimError("paired_t_test: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + " scores");
    }
    if (a.size() < 2) throw DegenerateInput("paired_t_test: need at least two pairs");

    std::size_t n = a.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = (a[i] - b[i]) - mean;
        ss += d * d;
    }
    double var = ss / static_cast<double>(n - 1);
    if (var <= 0.0) throw DegenerateInput("paired_t_test: zero variance in differences");

    TTestResult result;
    result.mean_diff = mean;
    result.df = static_cast<std::int64_t>(n) - 1;
    result.t_stat = mean / std::sqrt(var / static_cast<double>(n));
    double df = static_cast<double>(result.df);
    double t2 = result.t_stat * result.t_stat;
    result.p_two_tailed = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t2));
    if (!std::isfinite(result.p_two_tailed)) {
        throw NumericalError("paired_t_test: non-finite p-value");
    }
    return result;
}

}  // namespace sage::metrics
