#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "omni/audio.hpp"
#include "omni/corpus.hpp"
#include "omni/lm.hpp"
#include "omni/tokenizer.hpp"
#include "omni/trainplan.hpp"
#include "omni/vision.hpp"
#include "omni/websearch.hpp"

namespace py = pybind11;

namespace {

py::dict plan_slices_py(int width, int height) {
  auto plan = omni::vision::plan_slices(width, height);
  py::dict d;
  d["rows"] = plan.rows;
  d["cols"] = plan.cols;
  d["include_global"] = plan.include_global;
  d["tokens"] = omni::vision::token_budget(width, height);
  return d;
}

py::dict count_params_py(int vocab, int hidden, int heads, int kv_heads, int head_dim, int ffn,
                         int layers) {
  omni::lm::LmConfig cfg;
  cfg.vocab = vocab;
  cfg.hidden = hidden;
  cfg.heads = heads;
  cfg.kv_heads = kv_heads;
  cfg.head_dim = head_dim;
  cfg.ffn = ffn;
  cfg.layers = layers;
  auto r = omni::lm::count_params(cfg);
  py::dict d;
  d["embedding"] = r.embedding;
  d["softmax_head"] = r.softmax_head;
  d["backbone"] = r.backbone;
  d["total"] = r.total;
  return d;
}

py::list builtin_stages_py() {
  py::list out;
  for (const auto& s : omni::train::builtin_stages()) {
    py::dict d;
    d["name"] = s.name;
    d["context_len"] = s.context_len;
    d["trainable"] = std::vector<std::string>(s.trainable.begin(), s.trainable.end());
    d["lr_init"] = s.schedule.lr_init;
    d["lr_peak"] = s.schedule.lr_peak;
    d["lr_final"] = s.schedule.lr_final;
    out.append(d);
  }
  return out;
}

std::vector<size_t> lsh_dedup_texts(const std::vector<std::string>& texts, int k, int bands,
                                    int rows, double threshold, uint64_t seed) {
  std::vector<omni::corpus::Document> docs;
  for (size_t i = 0; i < texts.size(); ++i)
    docs.push_back({std::to_string(i), texts[i], "", ""});
  omni::corpus::LshParams params;
  params.k = k;
  params.bands = bands;
  params.rows = rows;
  params.jaccard_threshold = threshold;
  params.seed = seed;
  auto result = omni::corpus::lsh_dedup(docs, params);
  std::vector<size_t> kept;
  for (const auto& d : result.kept) kept.push_back(std::stoul(d.id));
  return kept;
}

py::dict toposort_py(const std::vector<std::string>& nodes,
                     const std::vector<std::pair<std::string, std::string>>& edges) {
  auto result = omni::corpus::topo_sort_repo({nodes, edges});
  py::dict d;
  d["order"] = result.order;
  d["has_cycle"] = result.has_cycle;
  d["cycle_nodes"] = result.cycle_nodes;
  return d;
}

std::vector<std::vector<float>> mel_py(const std::vector<float>& samples, int sample_rate) {
  omni::audio::AudioConfig cfg;
  auto clips = omni::audio::segment_clips(samples, sample_rate, cfg);
  std::vector<std::vector<float>> out;
  for (const auto& clip : clips) {
    auto mel = omni::audio::mel_spectrogram(clip, cfg);
    for (int64_t t = 0; t < mel.frames(); ++t)
      out.emplace_back(mel.values.row(t), mel.values.row(t) + cfg.mel_bins);
  }
  return out;
}

py::dict run_search_py(const std::string& query, const std::vector<std::string>& script, int k) {
  omni::websearch::ScriptedBackend backend(script);
  omni::websearch::MockSearchClient client;
  auto result = omni::websearch::run_pipeline(query, backend, client, k);
  py::dict d;
  d["answer"] = result.answer;
  std::vector<std::string> states;
  for (const auto& s : result.transcript.steps) states.push_back(s.state);
  d["states"] = states;
  d["degraded"] = result.transcript.degraded;
  d["parse_failure"] = result.transcript.parse_failure;
  return d;
}

}  // namespace

PYBIND11_MODULE(_omnikit, m) {
  m.doc() = "toy-scale multimodal LLM pipeline: tokenizer, dedup, slicing, "
            "mel front-end, schedules, packing, and the search pipeline";

  py::class_<omni::tok::Tokenizer>(m, "Tokenizer")
      .def_static(
          "train",
          [](const std::string& corpus, int target_vocab, std::vector<std::string> specials) {
            return omni::tok::Tokenizer::train(corpus, target_vocab, std::move(specials));
          },
          py::arg("corpus"), py::arg("target_vocab"),
          py::arg("specials") = omni::tok::default_specials())
      .def_static("load", &omni::tok::Tokenizer::load)
      .def("save", &omni::tok::Tokenizer::save)
      .def("encode",
           [](const omni::tok::Tokenizer& t, const std::string& text) { return t.encode(text); })
      .def("decode",
           [](const omni::tok::Tokenizer& t, const std::vector<int>& ids) {
             return py::bytes(t.decode(ids));
           })
      .def("vocab_size", &omni::tok::Tokenizer::vocab_size)
      .def("merge_count",
           [](const omni::tok::Tokenizer& t) { return t.merges().size(); })
      .def("special_id", &omni::tok::Tokenizer::special_id);

  m.def(
      "compression_rate",
      [](const omni::tok::Tokenizer& model,
         const std::vector<std::pair<std::string, std::string>>& corpora) {
        auto report = omni::tok::compression_rate(model, corpora);
        py::dict d;
        py::dict domains;
        for (const auto& row : report.rows) {
          py::dict e;
          e["bytes"] = row.corpus_bytes;
          e["tokens"] = row.token_count;
          e["rate"] = row.rate();
          e["empty"] = row.empty_corpus;
          domains[py::str(row.domain)] = e;
        }
        d["domains"] = domains;
        d["average"] = report.average();
        return d;
      },
      py::arg("model"), py::arg("corpora"));

  m.def("normalize", [](const std::string& s) { return omni::corpus::normalize(s); });
  m.def("shingle_jaccard",
        [](const std::string& a, const std::string& b, int width) {
          return omni::corpus::shingle_jaccard({"a", a, "", ""}, {"b", b, "", ""}, width);
        },
        py::arg("a"), py::arg("b"), py::arg("width") = 5);
  m.def("lsh_dedup", &lsh_dedup_texts, py::arg("texts"), py::arg("k") = 128,
        py::arg("bands") = 16, py::arg("rows") = 8, py::arg("threshold") = 0.8,
        py::arg("seed") = 0);
  m.def("topo_sort", &toposort_py, py::arg("nodes"), py::arg("edges"));

  m.def("plan_slices", &plan_slices_py, py::arg("width"), py::arg("height"));
  m.def("vision_token_budget",
        [](int w, int h) { return omni::vision::token_budget(w, h); });

  m.def("audio_token_count",
        [](int64_t samples) { return omni::audio::token_count_for_samples(samples); },
        py::arg("samples_at_16khz"));
  m.def("mel_spectrogram", &mel_py, py::arg("samples"), py::arg("sample_rate") = 16000);

  m.def("count_params", &count_params_py, py::arg("vocab"), py::arg("hidden"), py::arg("heads"),
        py::arg("kv_heads"), py::arg("head_dim"), py::arg("ffn"), py::arg("layers"));
  m.def("pretrain_lr", &omni::train::pretrain_lr, py::arg("step"), py::arg("total_steps"),
        py::arg("decay_frac") = 0.1);
  m.def("builtin_stages", &builtin_stages_py);

  m.def("run_search_pipeline", &run_search_py, py::arg("query"), py::arg("script"),
        py::arg("k") = 3);
}
