#include "omni/cli.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "omni/bench.hpp"
#include "omni/bundle.hpp"
#include "omni/corpus.hpp"
#include "omni/sequencer.hpp"
#include "omni/tokenizer.hpp"
#include "omni/trainplan.hpp"
#include "omni/vision.hpp"
#include "omni/wav.hpp"
#include "omni/websearch.hpp"

namespace omni::cli {

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// a corpus argument may be one file or a directory of files
std::vector<std::pair<std::string, std::string>> read_corpora(const fs::path& p) {
  std::vector<std::pair<std::string, std::string>> out;
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.emplace_back(f.stem().string(), read_file(f));
  } else {
    out.emplace_back(p.stem().string(), read_file(p));
  }
  if (out.empty()) throw std::runtime_error("no corpus files under " + p.string());
  return out;
}

void write_raw_f32(const fs::path& p, const Tensor& t) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(float)));
}

struct TokenizeTrainArgs {
  std::string corpus, out = "tokenizer.json";
  int vocab = 0;
  bool no_specials = false;
};

struct RateArgs {
  std::string model, corpora;
  bool json = false;
};

void run_rate(const RateArgs& a, std::ostream& out) {
  auto model = tok::Tokenizer::load(a.model);
  auto report = tok::compression_rate(model, read_corpora(a.corpora));
  out << (a.json ? report.to_json_string() + "\n" : report.render_table());
}

bundle::ModelBundle load_bundle(const std::string& dir) {
  if (dir.empty()) throw std::runtime_error("this subcommand needs --ckpt <dir>");
  return bundle::ModelBundle::load(dir);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"toy-scale multimodal LLM pipeline tools"};
  app.require_subcommand(1);

  // ---- tokenize -------------------------------------------------------
  auto* tokenize = app.add_subcommand("tokenize", "train or evaluate the byte-level tokenizer");
  tokenize->require_subcommand(1);

  TokenizeTrainArgs tta;
  auto* tok_train = tokenize->add_subcommand("train", "train a BPE merge table");
  tok_train->add_option("--corpus", tta.corpus, "corpus file or directory")->required();
  tok_train->add_option("--vocab", tta.vocab, "target vocab size")->required();
  tok_train->add_option("--out", tta.out, "output model file");
  tok_train->add_flag("--no-specials", tta.no_specials, "reserve no special tokens");
  tok_train->callback([&] {
    std::string corpus;
    for (auto& [name, text] : read_corpora(tta.corpus)) corpus += text;
    auto specials = tta.no_specials ? std::vector<std::string>{} : tok::default_specials();
    auto model = tok::Tokenizer::train(corpus, tta.vocab, specials);
    model.save(tta.out);
    out << "trained " << model.merges().size() << " merges, vocab " << model.vocab_size()
        << ", saved to " << tta.out << "\n";
  });

  RateArgs rate_args;
  for (auto* parent : {tokenize, &app}) {
    auto* rate = parent->add_subcommand("rate", "bytes-per-token compression benchmark");
    rate->add_option("--model", rate_args.model, "tokenizer model file")->required();
    rate->add_option("--corpora", rate_args.corpora, "corpus file or directory")->required();
    rate->add_flag("--json", rate_args.json, "emit JSON");
    rate->callback([&] { run_rate(rate_args, out); });
  }

  // ---- dedup ----------------------------------------------------------
  auto* dedup = app.add_subcommand("dedup", "corpus deduplication");
  dedup->require_subcommand(1);
  struct {
    std::string in, out_path, report;
    corpus::LshParams lsh;
    bool json = false;
  } dd;

  auto* dexact = dedup->add_subcommand("exact", "exact-match dedup after normalization");
  dexact->add_option("--in", dd.in, "input JSONL")->required();
  dexact->add_option("--out", dd.out_path, "output JSONL")->required();
  dexact->add_option("--report", dd.report, "duplicate-group report file");
  dexact->add_flag("--json", dd.json, "emit JSON summary");
  dexact->callback([&] {
    auto docs = corpus::read_jsonl(dd.in);
    auto result = corpus::exact_dedup(docs);
    corpus::write_jsonl(dd.out_path, result.kept);
    nlohmann::json report{{"schema_version", 1},
                          {"input", docs.size()},
                          {"kept", result.kept.size()},
                          {"groups", nlohmann::json::array()}};
    for (const auto& g : result.groups) report["groups"].push_back(g.ids);
    if (!dd.report.empty()) std::ofstream(dd.report) << report.dump(2) << "\n";
    if (dd.json)
      out << report.dump(2) << "\n";
    else
      out << "kept " << result.kept.size() << " of " << docs.size() << " documents ("
          << result.groups.size() << " duplicate groups)\n";
  });

  auto* dfuzzy = dedup->add_subcommand("fuzzy", "MinHash + LSH near-duplicate dedup");
  dfuzzy->add_option("--in", dd.in, "input JSONL")->required();
  dfuzzy->add_option("--out", dd.out_path, "output JSONL")->required();
  dfuzzy->add_option("--report", dd.report, "candidate-pair report file");
  dfuzzy->add_option("--k", dd.lsh.k, "hash count");
  dfuzzy->add_option("--bands", dd.lsh.bands, "LSH bands");
  dfuzzy->add_option("--rows", dd.lsh.rows, "rows per band");
  dfuzzy->add_option("--jaccard", dd.lsh.jaccard_threshold, "merge threshold");
  dfuzzy->add_option("--shingle", dd.lsh.shingle_width, "words per shingle");
  dfuzzy->add_option("--seed", dd.lsh.seed, "hash seed");
  dfuzzy->add_flag("--json", dd.json, "emit JSON summary");
  dfuzzy->callback([&] {
    auto docs = corpus::read_jsonl(dd.in);
    auto result = corpus::lsh_dedup(docs, dd.lsh);
    corpus::write_jsonl(dd.out_path, result.kept);
    nlohmann::json report{{"schema_version", 1},
                          {"input", docs.size()},
                          {"kept", result.kept.size()},
                          {"candidates", nlohmann::json::array()}};
    for (const auto& c : result.candidates)
      report["candidates"].push_back(
          {{"a", c.a}, {"b", c.b}, {"jaccard", c.jaccard}, {"merged", c.merged}});
    if (!dd.report.empty()) std::ofstream(dd.report) << report.dump(2) << "\n";
    if (dd.json)
      out << report.dump(2) << "\n";
    else
      out << "kept " << result.kept.size() << " of " << docs.size() << " documents ("
          << result.candidates.size() << " candidate pairs)\n";
  });

  // ---- code -----------------------------------------------------------
  auto* code = app.add_subcommand("code", "code corpus tooling");
  code->require_subcommand(1);
  struct {
    std::string graph;
    bool json = false;
  } cg;
  auto* toposort = code->add_subcommand("toposort", "order files so imports come first");
  toposort->add_option("--graph", cg.graph, "JSON file {nodes, edges}")->required();
  toposort->add_flag("--json", cg.json, "emit JSON");
  toposort->callback([&] {
    auto j = nlohmann::json::parse(read_file(cg.graph));
    corpus::CodeRepoGraph graph;
    graph.nodes = j.at("nodes").get<std::vector<std::string>>();
    for (const auto& e : j.at("edges"))
      graph.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    auto result = corpus::topo_sort_repo(graph);
    if (cg.json) {
      nlohmann::json rj{{"schema_version", 1},
                        {"order", result.order},
                        {"has_cycle", result.has_cycle},
                        {"cycle_nodes", result.cycle_nodes}};
      out << rj.dump(2) << "\n";
    } else {
      for (const auto& n : result.order) out << n << "\n";
      if (result.has_cycle) out << "# cycle detected; flagged nodes kept input order\n";
    }
  });

  // ---- vision ---------------------------------------------------------
  auto* vision_cmd = app.add_subcommand("vision", "image slicing and encoding");
  vision_cmd->require_subcommand(1);
  struct {
    std::string image, ckpt, out_path;
    bool json = false;
  } vc;
  auto* vplan = vision_cmd->add_subcommand("plan", "show the slice plan and token budget");
  vplan->add_option("--image", vc.image, "PNG/JPEG/PPM image")->required();
  vplan->add_flag("--json", vc.json, "emit JSON");
  vplan->callback([&] {
    auto image = img::load_image(vc.image);
    auto plan = vision::plan_slices(image.width, image.height);
    int64_t tokens = vision::token_budget(image.width, image.height);
    if (vc.json) {
      auto j = nlohmann::json::parse(plan.to_json_string());
      j["schema_version"] = 1;
      j["image_w"] = image.width;
      j["image_h"] = image.height;
      j["tokens"] = tokens;
      out << j.dump(2) << "\n";
    } else {
      out << image.width << "x" << image.height << " -> " << plan.rows << "x" << plan.cols
          << " slices + global, " << tokens << " tokens\n";
    }
  });
  auto* vencode = vision_cmd->add_subcommand("encode", "emit vision tokens for an image");
  vencode->add_option("--image", vc.image, "PNG/JPEG/PPM image")->required();
  vencode->add_option("--ckpt", vc.ckpt, "model bundle directory")->required();
  vencode->add_option("--out", vc.out_path, "raw f32 tensor output")->required();
  vencode->callback([&] {
    auto model = load_bundle(vc.ckpt);
    auto image = img::load_image(vc.image);
    auto tokens = vision::encode_image(model.vision_config, model.vision, image);
    write_raw_f32(vc.out_path, tokens.embeddings);
    out << "wrote " << tokens.embeddings.dim(0) << " x " << tokens.embeddings.dim(1)
        << " f32 tokens to " << vc.out_path << "\n";
  });

  // ---- audio ----------------------------------------------------------
  auto* audio_cmd = app.add_subcommand("audio", "audio tokenization");
  audio_cmd->require_subcommand(1);
  struct {
    std::string wav, ckpt, dump;
    bool json = false;
  } ac;
  auto* atokens = audio_cmd->add_subcommand("tokens", "clip plan and audio token counts");
  atokens->add_option("--wav", ac.wav, "PCM16 WAV input")->required();
  atokens->add_option("--ckpt", ac.ckpt, "model bundle directory")->required();
  atokens->add_option("--dump", ac.dump, "optionally dump embeddings (raw f32)");
  atokens->add_flag("--json", ac.json, "emit JSON");
  atokens->callback([&] {
    auto model = load_bundle(ac.ckpt);
    auto wav_data = wav::read_wav(ac.wav);
    auto clips = audio::segment_clips(wav_data.samples, wav_data.sample_rate, model.audio_config);
    Tensor tokens = audio::encode_audio(model.audio_config, model.audio, wav_data.samples,
                                        wav_data.sample_rate);
    if (!ac.dump.empty()) write_raw_f32(ac.dump, tokens);
    if (ac.json) {
      nlohmann::json j{{"schema_version", 1},
                       {"clips", nlohmann::json::array()},
                       {"tokens", tokens.dim(0)},
                       {"hidden", tokens.dim(1)}};
      for (const auto& c : clips) j["clips"].push_back(c.duration_s());
      out << j.dump(2) << "\n";
    } else {
      out << clips.size() << " clip(s), " << tokens.dim(0) << " audio tokens\n";
    }
  });

  // ---- pack -----------------------------------------------------------
  struct {
    std::string manifest, ckpt, report;
    int64_t max_len = 4096;
    uint64_t seed = 0;
    bool json = false;
  } pk;
  auto* pack = app.add_subcommand("pack", "shuffle and concatenate samples to fixed-length rows");
  pack->add_option("--manifest", pk.manifest, "JSONL sample manifest")->required();
  pack->add_option("--ckpt", pk.ckpt, "model bundle directory")->required();
  pack->add_option("--max-len", pk.max_len, "row length budget");
  pack->add_option("--seed", pk.seed, "shuffle seed");
  pack->add_option("--report", pk.report, "packing report file");
  pack->add_flag("--json", pk.json, "emit the report to stdout");
  pack->callback([&] {
    auto model = load_bundle(pk.ckpt);
    auto samples = seq::read_manifest(pk.manifest, model.tokenizer);
    std::vector<seq::OmniSequence> sequences;
    for (auto& s : samples) sequences.push_back(seq::assemble(model, s.segments, s.doc_id));
    auto batch = seq::pack_training(sequences, pk.max_len, pk.seed);
    if (!pk.report.empty()) std::ofstream(pk.report) << batch.report_json() << "\n";
    if (pk.json)
      out << batch.report_json() << "\n";
    else
      out << "packed " << sequences.size() << " samples into " << batch.rows.size() << " row(s), "
          << batch.truncations.size() << " truncated\n";
  });

  // ---- infer ----------------------------------------------------------
  struct {
    std::string ckpt, prompt, manifest;
    int max_new = 32;
    bool json = false;
  } inf;
  auto* infer = app.add_subcommand("infer", "greedy text continuation");
  infer->add_option("--ckpt", inf.ckpt, "model bundle directory")->required();
  infer->add_option("--prompt", inf.prompt, "prompt text")->required();
  infer->add_option("--max-new", inf.max_new, "token budget");
  infer->add_flag("--json", inf.json, "emit JSON");
  infer->callback([&] {
    auto model = load_bundle(inf.ckpt);
    auto ids = model.tokenizer.encode(inf.prompt);
    auto new_ids = lm::decode_greedy(model.lm_config, model.lm, ids, inf.max_new,
                                     model.tokenizer.special_id("<eos>"));
    std::vector<int> printable;
    for (int id : new_ids)
      if (!model.tokenizer.is_special(id)) printable.push_back(id);
    std::string text = model.tokenizer.decode(printable);
    if (inf.json) {
      nlohmann::json j{{"schema_version", 1}, {"prompt_tokens", ids.size()},
                       {"new_tokens", new_ids}, {"text", text}};
      out << j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << "\n";
    } else {
      out << text << "\n";
    }
  });

  auto* infer_omni = app.add_subcommand("infer-omni", "greedy continuation of a mixed-modality sample");
  infer_omni->add_option("--ckpt", inf.ckpt, "model bundle directory")->required();
  infer_omni->add_option("--manifest", inf.manifest, "JSONL manifest; first sample is the prompt")
      ->required();
  infer_omni->add_option("--max-new", inf.max_new, "token budget");
  infer_omni->add_flag("--json", inf.json, "emit JSON");
  infer_omni->callback([&] {
    auto model = load_bundle(inf.ckpt);
    auto samples = seq::read_manifest(inf.manifest, model.tokenizer);
    if (samples.empty()) throw std::runtime_error("infer-omni: manifest has no samples");
    auto sequence = seq::assemble(model, samples[0].segments, samples[0].doc_id);
    auto new_ids = lm::decode_greedy_embed(model.lm_config, model.lm, sequence.embeds, inf.max_new,
                                           model.tokenizer.special_id("<eos>"));
    std::vector<int> printable;
    for (int id : new_ids)
      if (!model.tokenizer.is_special(id)) printable.push_back(id);
    std::string text = model.tokenizer.decode(printable);
    if (inf.json) {
      nlohmann::json j{{"schema_version", 1}, {"prompt_positions", sequence.length()},
                       {"new_tokens", new_ids}, {"text", text}};
      out << j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << "\n";
    } else {
      out << text << "\n";
    }
  });

  // ---- stages ---------------------------------------------------------
  auto* stages = app.add_subcommand("stages", "training stage plans");
  stages->require_subcommand(1);
  struct {
    std::string stage = "pretrain", plot;
    int64_t total = 1000;
    bool json = false;
  } st;
  auto* slist = stages->add_subcommand("list", "print the nine builtin stages");
  slist->add_flag("--json", st.json, "emit JSON");
  slist->callback([&] {
    if (st.json) {
      nlohmann::json j{{"schema_version", 1}, {"stages", nlohmann::json::array()}};
      for (const auto& s : train::builtin_stages()) {
        j["stages"].push_back({{"name", s.name},
                               {"context_len", s.context_len},
                               {"trainable", std::vector<std::string>(s.trainable.begin(),
                                                                      s.trainable.end())},
                               {"schedule", s.schedule.describe()},
                               {"lr_init", s.schedule.lr_init},
                               {"lr_peak", s.schedule.lr_peak},
                               {"lr_final", s.schedule.lr_final}});
      }
      out << j.dump(2) << "\n";
    } else {
      out << train::stages_table();
    }
  });
  auto* slr = stages->add_subcommand("lr", "dump a stage's LR curve");
  slr->add_option("--stage", st.stage, "stage name");
  slr->add_option("--total", st.total, "total steps");
  slr->add_option("--plot", st.plot, "CSV output file");
  slr->callback([&] {
    const auto all = train::builtin_stages();
    const train::StagePlan* plan = nullptr;
    for (const auto& s : all)
      if (s.name == st.stage) plan = &s;
    if (!plan) throw std::runtime_error("unknown stage " + st.stage);
    std::ostringstream csv;
    csv << "step,lr\n";
    for (int64_t s = 0; s <= st.total; ++s)
      csv << s << "," << plan->schedule.at(s, st.total) << "\n";
    if (st.plot.empty())
      out << csv.str();
    else {
      std::ofstream(st.plot) << csv.str();
      out << "wrote " << (st.total + 1) << " points to " << st.plot << "\n";
    }
  });

  // ---- bench ----------------------------------------------------------
  struct {
    std::string ckpt;
    bench::BenchParams params;
    uint64_t seed = 7;
    bool json = false;
  } bn;
  auto* bench_cmd = app.add_subcommand("bench", "prefill + decode throughput protocol");
  bench_cmd->add_option("--ckpt", bn.ckpt, "model bundle directory (default: seeded toy model)");
  bench_cmd->add_option("--in", bn.params.input_tokens, "input tokens per request");
  bench_cmd->add_option("--out", bn.params.output_tokens, "output tokens per request");
  bench_cmd->add_option("--batch", bn.params.batch, "concurrent requests");
  bench_cmd->add_option("--warmup", bn.params.warmup, "discarded iterations");
  bench_cmd->add_option("--iters", bn.params.iters, "timed iterations");
  bench_cmd->add_option("--threads", bn.params.threads, "worker threads (0 = hardware)");
  bench_cmd->add_option("--seed", bn.seed, "weight seed for the default toy model");
  bench_cmd->add_flag("--json", bn.json, "emit JSON");
  bench_cmd->callback([&] {
    bench::MonotonicClock clock;
    bench::BenchReport report;
    if (bn.ckpt.empty()) {
      lm::LmConfig cfg;
      auto weights = lm::LmWeights::init(cfg, bn.seed);
      report = bench::speed_bench(cfg, weights, bn.params, clock);
    } else {
      auto model = load_bundle(bn.ckpt);
      report = bench::speed_bench(model.lm_config, model.lm, bn.params, clock);
    }
    out << (bn.json ? report.to_json_string() + "\n" : report.render());
  });

  // ---- search-chat ----------------------------------------------------
  struct {
    std::string query, backend = "scripted", client = "mock", script, transcript, ckpt;
    std::string host = "127.0.0.1", path = "/search";
    int port = 8080, k = 3, max_new = 48;
    bool json = false;
  } sc;
  auto* search_chat = app.add_subcommand("search-chat", "web-search function-calling pipeline");
  search_chat->add_option("--query", sc.query, "user query")->required();
  search_chat->add_option("--backend", sc.backend, "scripted | toy")
      ->check(CLI::IsMember({"scripted", "toy"}));
  search_chat->add_option("--client", sc.client, "mock | http")
      ->check(CLI::IsMember({"mock", "http"}));
  search_chat->add_option("--script", sc.script, "JSON list of scripted backend responses");
  search_chat->add_option("--ckpt", sc.ckpt, "bundle directory for the toy backend");
  search_chat->add_option("--host", sc.host, "http client host");
  search_chat->add_option("--port", sc.port, "http client port");
  search_chat->add_option("--path", sc.path, "http client path");
  search_chat->add_option("--k", sc.k, "sources to read");
  search_chat->add_option("--max-new", sc.max_new, "toy backend token budget");
  search_chat->add_option("--transcript", sc.transcript, "transcript JSON output file");
  search_chat->add_flag("--json", sc.json, "print the transcript as JSON");
  search_chat->callback([&] {
    std::unique_ptr<websearch::LlmBackend> backend;
    std::unique_ptr<bundle::ModelBundle> model;
    if (sc.backend == "scripted") {
      std::vector<std::string> script;
      if (sc.script.empty())
        script = {R"({"action": "answer"})", "(scripted answer)"};
      else
        script = nlohmann::json::parse(read_file(sc.script)).get<std::vector<std::string>>();
      backend = std::make_unique<websearch::ScriptedBackend>(std::move(script));
    } else {
      model = std::make_unique<bundle::ModelBundle>(load_bundle(sc.ckpt));
      struct ToyBackend : websearch::LlmBackend {
        bundle::ModelBundle* m;
        int max_new;
        std::string complete(const std::string& prompt) override {
          auto ids = m->tokenizer.encode(prompt);
          if (static_cast<int>(ids.size()) + max_new > m->lm_config.max_context)
            ids.erase(ids.begin(),
                      ids.end() - (m->lm_config.max_context - max_new));
          auto new_ids = lm::decode_greedy(m->lm_config, m->lm, ids, max_new,
                                           m->tokenizer.special_id("<eos>"));
          std::vector<int> printable;
          for (int id : new_ids)
            if (!m->tokenizer.is_special(id)) printable.push_back(id);
          return m->tokenizer.decode(printable);
        }
      };
      auto toy = std::make_unique<ToyBackend>();
      toy->m = model.get();
      toy->max_new = sc.max_new;
      backend = std::move(toy);
    }

    std::unique_ptr<websearch::SearchClient> client;
    if (sc.client == "mock")
      client = std::make_unique<websearch::MockSearchClient>();
    else
      client = std::make_unique<websearch::HttpSearchClient>(sc.host, sc.port, sc.path);

    auto result = websearch::run_pipeline(sc.query, *backend, *client, sc.k);
    if (!sc.transcript.empty())
      std::ofstream(sc.transcript) << result.transcript.to_json_string() << "\n";
    if (sc.json)
      out << result.transcript.to_json_string() << "\n";
    else
      out << result.answer << "\n";
  });

  // ---- init-ckpt ------------------------------------------------------
  struct {
    std::string out_dir, preset = "toy";
    uint64_t seed = 0;
  } ic;
  auto* init_ckpt = app.add_subcommand("init-ckpt", "write a seeded toy model bundle");
  init_ckpt->add_option("--out", ic.out_dir, "output directory")->required();
  init_ckpt->add_option("--seed", ic.seed, "weight seed");
  init_ckpt->add_option("--preset", ic.preset, "toy | tiny")
      ->check(CLI::IsMember({"toy", "tiny"}));
  init_ckpt->callback([&] {
    auto model = ic.preset == "toy" ? bundle::ModelBundle::init_toy(ic.seed)
                                    : bundle::ModelBundle::init_tiny(ic.seed);
    model.save(ic.out_dir);
    out << "wrote " << ic.preset << " bundle (vocab " << model.lm_config.vocab << ", hidden "
        << model.lm_config.hidden << ") to " << ic.out_dir << "\n";
  });

  // ---- parse ----------------------------------------------------------
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* deepest = &app;
    while (!deepest->get_subcommands().empty()) deepest = deepest->get_subcommands().back();
    out << deepest->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace omni::cli
