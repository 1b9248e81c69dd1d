#include "omni/bundle.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "omni/checkpoint.hpp"

namespace omni::bundle {

ModelBundle ModelBundle::init_toy(uint64_t seed, tok::Tokenizer tokenizer) {
  ModelBundle b;
  b.tokenizer = std::move(tokenizer);
  b.lm_config.hidden = 128;
  b.lm_config.layers = 4;
  b.lm_config.heads = 8;
  b.lm_config.kv_heads = 2;
  b.lm_config.head_dim = 16;
  b.lm_config.ffn = 384;
  b.lm_config.vocab = b.tokenizer.vocab_size();
  b.lm = lm::LmWeights::init(b.lm_config, seed);
  b.vision_config.hidden = b.lm_config.hidden;
  b.vision = vision::VisionWeights::init(b.vision_config, seed + 101);
  b.audio_config.hidden = b.lm_config.hidden;
  b.audio = audio::AudioWeights::init(b.audio_config, seed + 202);
  return b;
}

ModelBundle ModelBundle::init_toy(uint64_t seed) {
  const char* corpus =
      "a small mixed corpus for the toy tokenizer: words repeat, words repeat, "
      "短い混在コーパス 中文语料 code { return 0; } and some more repeated words";
  return init_toy(seed, tok::Tokenizer::train(corpus, 320, tok::default_specials()));
}

ModelBundle ModelBundle::init_tiny(uint64_t seed) {
  ModelBundle b;
  b.tokenizer = tok::Tokenizer::train("tiny fixture corpus, tiny fixture corpus", 280,
                                      tok::default_specials());
  b.lm_config.hidden = 16;
  b.lm_config.layers = 2;
  b.lm_config.heads = 4;
  b.lm_config.kv_heads = 2;
  b.lm_config.head_dim = 4;
  b.lm_config.ffn = 32;
  b.lm_config.vocab = b.tokenizer.vocab_size();
  b.lm = lm::LmWeights::init(b.lm_config, seed);
  b.vision_config.feat = 16;
  b.vision_config.enc_mlp = 32;
  b.vision_config.query_dim = 8;
  b.vision_config.max_patches = 196;
  b.vision_config.hidden = b.lm_config.hidden;
  b.vision = vision::VisionWeights::init(b.vision_config, seed + 101);
  b.audio_config.feat = 16;
  b.audio_config.enc_mlp = 32;
  b.audio_config.hidden = b.lm_config.hidden;
  b.audio = audio::AudioWeights::init(b.audio_config, seed + 202);
  return b;
}

void ModelBundle::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  tokenizer.save(dir / "tokenizer.json");

  nlohmann::json cfg;
  cfg["schema_version"] = 1;
  cfg["lm"] = nlohmann::json::parse(lm_config.to_json_string());
  cfg["vision"] = nlohmann::json::parse(vision_config.to_json_string());
  cfg["audio"] = nlohmann::json::parse(audio_config.to_json_string());
  std::ofstream(dir / "config.json") << cfg.dump(2) << "\n";

  std::vector<std::pair<std::string, const Tensor*>> tensors;
  auto* self = const_cast<ModelBundle*>(this);
  for (auto& ref : self->registry()) tensors.emplace_back(ref.name, ref.tensor);
  ckpt::save_tensors(dir, tensors);
}

ModelBundle ModelBundle::load(const std::filesystem::path& dir) {
  std::ifstream cfg_in(dir / "config.json");
  if (!cfg_in) throw std::runtime_error("bundle: cannot open " + (dir / "config.json").string());
  nlohmann::json cfg = nlohmann::json::parse(cfg_in);

  ModelBundle b;
  b.tokenizer = tok::Tokenizer::load(dir / "tokenizer.json");
  b.lm_config = lm::LmConfig::from_json_string(cfg.at("lm").dump());
  b.vision_config = vision::VisionConfig::from_json_string(cfg.at("vision").dump());
  b.audio_config = audio::AudioConfig::from_json_string(cfg.at("audio").dump());
  if (b.lm_config.vocab != b.tokenizer.vocab_size())
    throw std::runtime_error("bundle: lm vocab does not match tokenizer vocab");

  // allocate with the right shapes, then overwrite from the checkpoint
  b.lm = lm::LmWeights::init(b.lm_config, 0);
  b.vision = vision::VisionWeights::init(b.vision_config, 0);
  b.audio = audio::AudioWeights::init(b.audio_config, 0);

  auto loaded = ckpt::load_tensors(dir);
  for (auto& ref : b.registry())
    *ref.tensor = ckpt::take_tensor(loaded, ref.name, ref.tensor->shape());
  if (!loaded.empty())
    throw std::runtime_error("bundle: checkpoint has unexpected tensor " + loaded.begin()->first);
  return b;
}

std::vector<ModelBundle::ParamRef> ModelBundle::registry() {
  std::vector<ParamRef> refs;
  lm.for_each([&](const std::string& name, Tensor& t) {
    refs.push_back({"lm." + name, "lm", &t});
  });
  vision.encoder.for_each("vision.encoder.", [&](const std::string& name, Tensor& t) {
    refs.push_back({name, "vision.encoder", &t});
  });
  vision.resampler.for_each("vision.connector.", [&](const std::string& name, Tensor& t) {
    refs.push_back({name, "vision.connector", &t});
  });
  audio.encoder.for_each("audio.encoder.", [&](const std::string& name, Tensor& t) {
    refs.push_back({name, "audio.encoder", &t});
  });
  audio.projector.for_each("audio.connector.", [&](const std::string& name, Tensor& t) {
    refs.push_back({name, "audio.connector", &t});
  });
  return refs;
}

int64_t ModelBundle::param_count_for_tag(const std::string& tag) {
  int64_t n = 0;
  for (auto& ref : registry())
    if (ref.tag == tag) n += ref.tensor->numel();
  return n;
}

}  // namespace omni::bundle
