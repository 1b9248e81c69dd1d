#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "omni/tensor.hpp"

namespace omni::lm {

struct LmConfig {
  int hidden = 128;
  int layers = 4;
  int heads = 8;
  int kv_heads = 2;
  int head_dim = 16;
  int ffn = 384;
  int vocab = 512;
  double rope_base = 5'000'000.0;
  int max_context = 4096;
  double norm_eps = 1e-5;

  void validate() const;
  std::string to_json_string() const;
  static LmConfig from_json_string(const std::string& text);
};

// decoder block: RMS pre-norm, GQA attention, SiLU-gated FFN, no biases
struct LayerWeights {
  Tensor attn_norm;  // [hidden]
  Tensor wq;         // [hidden, heads*head_dim]
  Tensor wk;         // [hidden, kv_heads*head_dim]
  Tensor wv;         // [hidden, kv_heads*head_dim]
  Tensor wo;         // [heads*head_dim, hidden]
  Tensor ffn_norm;   // [hidden]
  Tensor w_gate;     // [hidden, ffn]
  Tensor w_up;       // [hidden, ffn]
  Tensor w_down;     // [ffn, hidden]
};

struct LmWeights {
  Tensor embed;  // [vocab, hidden]
  std::vector<LayerWeights> layers;
  Tensor final_norm;  // [hidden]
  Tensor head;        // [hidden, vocab]  (untied from embed)

  static LmWeights init(const LmConfig& cfg, uint64_t seed);
  // visits every tensor as ("embed", "layers.3.wq", ...)
  void for_each(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const;
  int64_t param_count() const;
};

struct ParamReport {
  int64_t embedding = 0;
  int64_t softmax_head = 0;
  int64_t backbone = 0;
  int64_t total = 0;
  std::string to_json_string() const;
};

// closed-form parameter counts by role
ParamReport count_params(const LmConfig& cfg);

// In-place rotation of consecutive dim pairs by pos * base^(-2i/head_dim).
// x is [seq, heads, head_dim]; positions has seq entries.
void rope_apply(Tensor& x, std::span<const int> positions, double base);

// Attention masking for packed rows: position j is visible from i only when
// j <= i and both share a document id. Empty doc list means plain causal.
struct AttnMask {
  std::vector<int> doc_ids;
  bool allowed(int64_t i, int64_t j) const {
    if (j > i) return false;
    return doc_ids.empty() || doc_ids[static_cast<size_t>(i)] == doc_ids[static_cast<size_t>(j)];
  }
};

// one attention sublayer (projections + RoPE + grouped heads + output proj)
Tensor gqa_attention(const LmConfig& cfg, const LayerWeights& w, const Tensor& x,
                     std::span<const int> positions, const AttnMask& mask = {});

// full forward to logits [seq, vocab]; either entry point may be used, and
// the embedding entry point is how vision/audio tokens are spliced in
Tensor forward_ids(const LmConfig& cfg, const LmWeights& w, std::span<const int> ids,
                   std::span<const int> positions = {}, const AttnMask& mask = {});
Tensor forward_embed(const LmConfig& cfg, const LmWeights& w, const Tensor& embeds,
                     std::span<const int> positions = {}, const AttnMask& mask = {});

// embedding-table lookup [n, hidden]
Tensor embed_rows(const LmConfig& cfg, const LmWeights& w, std::span<const int> ids);

// rolling K/V state for incremental decoding
struct KvCache {
  explicit KvCache(const LmConfig& cfg, int capacity);
  int len = 0;
  int capacity = 0;
  std::vector<Tensor> k;  // per layer [capacity, kv_heads*head_dim]
  std::vector<Tensor> v;
};

// appends one token/embedding at `position` and returns its logits row
Tensor forward_step(const LmConfig& cfg, const LmWeights& w, const float* embed_row,
                    int position, KvCache& cache);

// argmax continuation; stops at eos_id (pass -1 to disable) or max_new
std::vector<int> decode_greedy(const LmConfig& cfg, const LmWeights& w,
                               std::span<const int> prompt, int max_new, int eos_id = -1);
// same, over a prebuilt embedding sequence (prompt part), returning new ids
std::vector<int> decode_greedy_embed(const LmConfig& cfg, const LmWeights& w,
                                     const Tensor& prompt_embeds, int max_new, int eos_id = -1);

}  // namespace omni::lm
