#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "omni/image.hpp"
#include "omni/nn.hpp"
#include "omni/tensor.hpp"

namespace omni::vision {

struct VisionConfig {
  int base = 448;        // square view edge
  int patch = 32;        // patch edge -> (448/32)^2 = 196 patches per view
  int feat = 48;         // encoder width
  int enc_heads = 4;
  int enc_mlp = 96;
  int query_dim = 32;    // resampler attention width
  int num_queries = 64;  // tokens emitted per view
  int max_slices = 9;
  int max_patches = 400; // key position table size
  int hidden = 128;      // LLM embedding width
  bool key_positions = true;  // add learned 2-D offsets to resampler keys
  float mean[3] = {0.5f, 0.5f, 0.5f};
  float stdev[3] = {0.5f, 0.5f, 0.5f};

  int patches_per_view() const { return (base / patch) * (base / patch); }
  std::string to_json_string() const;
  static VisionConfig from_json_string(const std::string& text);
};

struct SliceRect {
  int x = 0, y = 0, w = 0, h = 0;
};

struct SlicePlan {
  int rows = 0;  // 0 rows/cols means no slicing (small image)
  int cols = 0;
  bool include_global = true;
  std::vector<SliceRect> rects;  // row-major, empty when rows == 0
  int global_w = 448, global_h = 448;

  int slice_count() const { return rows * cols; }
  int view_count() const { return slice_count() + (include_global ? 1 : 0); }
  std::string to_json_string() const;
};

// grid choice: target count from area ratio, then least aspect distortion
SlicePlan plan_slices(int width, int height, int max_slices = 9, int base = 448);

// token budget for an image of the given size, markers excluded
int64_t token_budget(int width, int height, const VisionConfig& cfg = {});

struct EncoderWeights {
  Tensor patch_proj;  // [patch*patch*3, feat]
  Tensor patch_bias;  // [feat]
  Tensor pos_embed;   // [patches_per_view, feat]
  std::vector<nn::EncoderBlock> blocks;

  static EncoderWeights init(const VisionConfig& cfg, uint64_t seed);
  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, Tensor&)>& fn);
  int64_t param_count();
};

struct ResamplerWeights {
  Tensor queries;  // [num_queries, query_dim]
  Tensor wk;       // [feat, query_dim]
  Tensor wv;       // [feat, query_dim]
  Tensor wo;       // [query_dim, hidden]
  Tensor key_pos;  // [max_patches, query_dim]

  static ResamplerWeights init(const VisionConfig& cfg, uint64_t seed);
  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, Tensor&)>& fn);
  int64_t param_count();
};

struct VisionWeights {
  EncoderWeights encoder;
  ResamplerWeights resampler;
  static VisionWeights init(const VisionConfig& cfg, uint64_t seed);
};

// patch features for one pre-resized base x base view
Tensor encode_view(const VisionConfig& cfg, const EncoderWeights& w, const img::Image& view);

// fixed-length resampling: any [p, feat] input becomes [num_queries, hidden]
Tensor resample(const VisionConfig& cfg, const ResamplerWeights& w, const Tensor& patch_feats);

struct VisionTokens {
  SlicePlan plan;
  Tensor embeddings;  // [64 * views, hidden], slices row-major then global
};

VisionTokens encode_image(const VisionConfig& cfg, const VisionWeights& w, const img::Image& image);

}  // namespace omni::vision
