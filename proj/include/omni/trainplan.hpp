#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "omni/bundle.hpp"
#include "omni/sequencer.hpp"

namespace omni::train {

enum class ScheduleKind { WarmupConstantCosine, Cosine, Constant };

struct LrSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double lr_init = 0.0;
  double lr_peak = 0.0;
  double lr_final = 0.0;
  double warmup_frac = 0.0;  // fraction of total steps spent ramping up
  double decay_frac = 0.0;   // fraction of total steps in the final decay

  double at(int64_t step, int64_t total_steps) const;
  std::string describe() const;
};

// the pretraining schedule: linear 3e-5 -> 3e-4 over the first 3% of steps,
// constant, then cosine back down to 3e-5 over the final decay fraction
double pretrain_lr(int64_t step, int64_t total_steps, double decay_frac = 0.1);

struct StagePlan {
  std::string name;
  std::set<std::string> trainable;  // module tags, see ModelBundle::registry
  LrSchedule schedule;
  int context_len = 4096;

  void validate() const;  // trainable non-empty, context_len in {4096, 32768}
};

// the nine training stages in order, with their published learning rates
std::vector<StagePlan> builtin_stages();
std::string stages_table();

struct FreezeGroups {
  std::vector<bundle::ModelBundle::ParamRef> trainable;
  std::vector<bundle::ModelBundle::ParamRef> frozen;
  int64_t trainable_params = 0;
  int64_t frozen_params = 0;
};

FreezeGroups apply_freeze(const std::vector<bundle::ModelBundle::ParamRef>& registry,
                          const StagePlan& plan);

struct TrainReport {
  std::vector<double> loss_trace;  // loss per step, before that step's update
};

// SGD over the packed rows with the plan's schedule; tensors outside the
// trainable set stay bitwise untouched. Gradients flow through the LM;
// injected media embeddings enter as constant inputs.
TrainReport train_toy(bundle::ModelBundle& model, const seq::PackedBatch& batch,
                      const StagePlan& plan, int steps);

}  // namespace omni::train
