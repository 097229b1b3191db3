#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "sage/corpus_io.hpp"
#include "sage/curation.hpp"
#include "sage/embedding.hpp"
#include "sage/errors.hpp"
#include "sage/lora.hpp"
#include "sage/metrics.hpp"
#include "sage/policy.hpp"
#include "sage/reward.hpp"
#include "sage/sustainability.hpp"

namespace py = pybind11;
using nlohmann::json;
using sage::Matrix;
using sage::Vec;

namespace {

Matrix matrix_from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) throw sage::DimError("matrix: no rows");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols) throw sage::DimError("matrix: ragged rows");
        for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
    }
    return m;
}

std::vector<Vec> matrix_to_rows(const Matrix& m) {
    std::vector<Vec> rows(m.rows, Vec(m.cols));
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) rows[r][c] = m.at(r, c);
    }
    return rows;
}

py::dict bleu_to_dict(const sage::metrics::BleuReport& r) {
    py::dict d;
    d["score"] = r.score;
    d["precisions"] = r.precisions;
    d["brevity_penalty"] = r.brevity_penalty;
    d["hyp_len"] = r.hyp_len;
    d["ref_len"] = r.ref_len;
    return d;
}

}  // namespace

PYBIND11_MODULE(_sage, m) {
    m.doc() = "Core corpus-curation operations: hashing embeddings, expert-similarity "
              "rewards, budgeted selection, BLEU, regression-head scoring, adapters, and "
              "emissions accounting";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const sage::Error& e) {
            if (e.category() == sage::ErrorCategory::config) {
                PyErr_SetString(PyExc_ValueError, e.what());
            } else {
                PyErr_SetString(PyExc_RuntimeError, e.what());
            }
        }
    });

    m.def("hash_embed", &sage::embed::hash_embed, py::arg("text"), py::arg("dim"),
          py::arg("seed") = 0,
          "Deterministic L2-normalized bag-of-ngrams embedding of the text");
    m.def("normalize", &sage::embed::normalize, py::arg("v"));
    m.def("cosine", &sage::embed::cosine, py::arg("u"), py::arg("v"));

    py::class_<sage::reward::ExpertReference>(m, "ExpertReference")
        .def_readonly("expert_count", &sage::reward::ExpertReference::expert_count)
        .def_readonly("centroid", &sage::reward::ExpertReference::centroid)
        .def_property_readonly("dim", &sage::reward::ExpertReference::dim);
    m.def(
        "build_expert_reference",
        [](const std::vector<Vec>& experts) {
            return sage::reward::build_expert_reference(experts);
        },
        py::arg("expert_vectors"));
    m.def("semantic_reward", &sage::reward::semantic_reward, py::arg("candidate"),
          py::arg("reference"),
          "Mean cosine similarity of the candidate against the expert set");
    m.def(
        "semantic_reward_batch",
        [](const std::vector<std::pair<std::string, Vec>>& candidates,
           const sage::reward::ExpertReference& ref) {
            return sage::reward::semantic_reward_batch(candidates, ref);
        },
        py::arg("candidates"), py::arg("reference"));

    m.def("tokenize_for_bleu", &sage::metrics::tokenize_for_bleu, py::arg("text"));
    m.def(
        "bleu_corpus",
        [](const std::vector<std::vector<std::string>>& hyps,
           const std::vector<std::vector<std::string>>& refs, bool smoothing) {
            sage::metrics::BleuOptions opts;
            opts.smoothing = smoothing;
            return bleu_to_dict(sage::metrics::bleu_corpus(hyps, refs, opts));
        },
        py::arg("hyps"), py::arg("refs"), py::arg("smoothing") = false);
    m.def(
        "bleu_segment",
        [](const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
           bool smoothing) {
            sage::metrics::BleuOptions opts;
            opts.smoothing = smoothing;
            return bleu_to_dict(sage::metrics::bleu_segment(hyp, ref, opts));
        },
        py::arg("hyp"), py::arg("ref"), py::arg("smoothing") = false);

    m.def(
        "layer_mix",
        [](const std::vector<Vec>& layers, const Vec& logits) {
            return sage::metrics::layer_mix(layers, logits);
        },
        py::arg("pooled_layers"), py::arg("mix_logits"));
    m.def("fuse_features", &sage::metrics::fuse_features, py::arg("e_hyp"), py::arg("e_src"),
          py::arg("e_ref"));

    py::class_<sage::metrics::CometHeadConfig>(m, "CometHead")
        .def_static(
            "from_json",
            [](const std::string& text) {
                json obj = json::parse(text, nullptr, false);
                if (obj.is_discarded()) throw sage::ParseError("head: invalid JSON");
                return sage::metrics::load_comet_head(obj);
            },
            py::arg("text"))
        .def_readonly("dim", &sage::metrics::CometHeadConfig::dim)
        .def_readonly("num_layers", &sage::metrics::CometHeadConfig::num_layers)
        .def("regress", &sage::metrics::regress_score, py::arg("x_fuse"))
        .def(
            "score",
            [](const sage::metrics::CometHeadConfig& cfg, const std::vector<Vec>& h,
               const std::vector<Vec>& s, const std::vector<Vec>& r) {
                return sage::metrics::comet_score(cfg, h, s, r);
            },
            py::arg("hyp_layers"), py::arg("src_layers"), py::arg("ref_layers"));

    m.def(
        "paired_t_test",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            sage::metrics::TTestResult t = sage::metrics::paired_t_test(a, b);
            py::dict d;
            d["mean_diff"] = t.mean_diff;
            d["t_stat"] = t.t_stat;
            d["df"] = t.df;
            d["p_two_tailed"] = t.p_two_tailed;
            return d;
        },
        py::arg("a"), py::arg("b"));
    m.def("regularized_incomplete_beta", &sage::metrics::regularized_incomplete_beta,
          py::arg("a"), py::arg("b"), py::arg("x"));

    m.def("pair_loss", &sage::policy::pair_loss, py::arg("margin"), py::arg("beta"),
          "-ln sigmoid(beta * margin)");

    m.def(
        "topk_select",
        [](const std::vector<std::pair<std::string, double>>& scored, std::int64_t k) {
            return sage::curation::brute_force_topk(scored, k);
        },
        py::arg("scored"), py::arg("k"),
        "Top-k ids by (score desc, id asc); the curation tie-break order");

    py::class_<sage::lora::LoraLayer>(m, "LoraLayer")
        .def(py::init([](const std::vector<Vec>& w0, std::int64_t rank, double alpha) {
                 return sage::lora::LoraLayer(matrix_from_rows(w0), rank, alpha);
             }),
             py::arg("w0"), py::arg("rank"), py::arg("alpha"))
        .def_property(
            "a",
            [](const sage::lora::LoraLayer& l) { return matrix_to_rows(l.a()); },
            [](sage::lora::LoraLayer& l, const std::vector<Vec>& rows) {
                l.set_a(matrix_from_rows(rows));
            })
        .def_property(
            "b",
            [](const sage::lora::LoraLayer& l) { return matrix_to_rows(l.b()); },
            [](sage::lora::LoraLayer& l, const std::vector<Vec>& rows) {
                l.set_b(matrix_from_rows(rows));
            })
        .def_property_readonly("rank", &sage::lora::LoraLayer::rank)
        .def_property_readonly("alpha", &sage::lora::LoraLayer::alpha)
        .def_property_readonly(
            "w0", [](const sage::lora::LoraLayer& l) { return matrix_to_rows(l.w0()); })
        .def("forward",
             [](const sage::lora::LoraLayer& l, const Vec& x) {
                 return sage::lora::lora_forward(l, x);
             },
             py::arg("x"))
        .def("merge", [](const sage::lora::LoraLayer& l) {
            return matrix_to_rows(sage::lora::lora_merge(l));
        })
        .def_property_readonly("adapter_params", &sage::lora::adapter_param_count)
        .def_property_readonly("base_params", &sage::lora::base_param_count);

    m.def(
        "estimate_emissions",
        [](double train_hours, std::int64_t num_gpus, double tdp_watts, double sys_overhead,
           double pue, double carbon_intensity) {
            sage::carbon::EnergyProfile p;
            p.train_hours = train_hours;
            p.num_gpus = num_gpus;
            p.tdp_watts = tdp_watts;
            p.sys_overhead = sys_overhead;
            p.pue = pue;
            p.carbon_intensity = carbon_intensity;
            sage::carbon::EmissionsReport r = sage::carbon::estimate_emissions(p);
            py::dict d;
            d["p_sys_kw"] = r.p_sys_kw;
            d["energy_kwh"] = r.energy_kwh;
            d["co2_kg"] = r.co2_kg;
            return d;
        },
        py::arg("train_hours"), py::arg("num_gpus"), py::arg("tdp_watts") = 400.0,
        py::arg("sys_overhead") = 1.1, py::arg("pue") = 1.1,
        py::arg("carbon_intensity") = 0.475);
    m.def("percent_reduction", &sage::carbon::percent_reduction, py::arg("baseline_kg"),
          py::arg("treatment_kg"));
    m.def("format_reduction", &sage::carbon::format_reduction, py::arg("percent"));

    m.def(
        "parse_corpus_line",
        [](const std::string& line) {
            sage::corpus::SentencePair p = sage::corpus::parse_corpus_line(line);
            py::dict d;
            d["id"] = p.id;
            d["src"] = p.src;
            d["tgt"] = p.tgt;
            d["meta"] = p.meta;
            return d;
        },
        py::arg("line"));
}
