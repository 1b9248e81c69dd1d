#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "omni/audio.hpp"
#include "omni/lm.hpp"
#include "omni/tokenizer.hpp"
#include "omni/vision.hpp"

namespace omni::bundle {

// Everything needed to run the mixed-modality pipeline: tokenizer, decoder
// LM, vision encoder + resampler, audio encoder + projector.
struct ModelBundle {
  tok::Tokenizer tokenizer;
  lm::LmConfig lm_config;
  lm::LmWeights lm;
  vision::VisionConfig vision_config;
  vision::VisionWeights vision;
  audio::AudioConfig audio_config;
  audio::AudioWeights audio;

  // toy-scale bundle with consistent widths; vocab comes from the tokenizer
  static ModelBundle init_toy(uint64_t seed, tok::Tokenizer tokenizer);
  static ModelBundle init_toy(uint64_t seed);  // trains a small built-in tokenizer
  // minimal bundle under the train_toy parameter cap
  static ModelBundle init_tiny(uint64_t seed);

  void save(const std::filesystem::path& dir) const;
  static ModelBundle load(const std::filesystem::path& dir);

  struct ParamRef {
    std::string name;
    std::string tag;  // lm | vision.encoder | vision.connector | audio.encoder | audio.connector
    Tensor* tensor;
  };
  // every trainable tensor, each tagged with exactly one module tag
  std::vector<ParamRef> registry();

  int64_t param_count_for_tag(const std::string& tag);
};

}  // namespace omni::bundle
