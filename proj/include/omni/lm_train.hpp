#pragma once

#include <functional>
#include <string>
#include <vector>

#include "omni/lm.hpp"

namespace omni::lm {

// One training row. Positions with token_ids[t] >= 0 are embedded from the
// current embedding table (and receive embedding gradients); positions with
// token_ids[t] < 0 read the matching row of `injected` (vision/audio tokens),
// which is treated as a constant input.
struct TrainRow {
  std::vector<int> token_ids;
  Tensor injected;            // [T, hidden] or empty when the row is pure text
  std::vector<int> positions; // empty means 0..T-1
  std::vector<int> doc_ids;   // empty means a single document
  std::vector<int> targets;   // -1 marks positions without loss
};

struct LayerGrads {
  std::vector<double> attn_norm, wq, wk, wv, wo, ffn_norm, w_gate, w_up, w_down;
};

struct LmGrads {
  std::vector<double> embed, final_norm, head;
  std::vector<LayerGrads> layers;

  static LmGrads zeros(const LmConfig& cfg);
  void for_each(const std::function<void(const std::string&, std::vector<double>&)>& fn);
};

// Mean cross-entropy over positions with a target. Weights stay in 32-bit
// storage; activations and gradient accumulation run in 64-bit so the
// finite-difference check is meaningful.
double ce_loss(const LmConfig& cfg, const LmWeights& w, const TrainRow& row);

// same loss, plus gradient accumulation into `grads`
double ce_loss_and_grads(const LmConfig& cfg, const LmWeights& w, const TrainRow& row,
                         LmGrads& grads);

// w -= lr * g on every LM tensor
void sgd_apply(LmWeights& w, const LmGrads& grads, double lr);

}  // namespace omni::lm
