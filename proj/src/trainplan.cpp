#include "omni/trainplan.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "omni/lm_train.hpp"

namespace omni::train {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double LrSchedule::at(int64_t step, int64_t total_steps) const {
  if (total_steps < 1) throw std::invalid_argument("schedule: total_steps must be >= 1");
  if (step < 0 || step > total_steps)
    throw std::invalid_argument("schedule: step " + std::to_string(step) + " outside [0, " +
                                std::to_string(total_steps) + "]");
  double t = static_cast<double>(step);
  double T = static_cast<double>(total_steps);
  switch (kind) {
    case ScheduleKind::Constant:
      return lr_peak;
    case ScheduleKind::Cosine:
      return lr_final + (lr_init - lr_final) * (1.0 + std::cos(kPi * t / T)) / 2.0;
    case ScheduleKind::WarmupConstantCosine: {
      double warm_end = warmup_frac * T;
      double decay_start = T * (1.0 - decay_frac);
      if (t <= warm_end && warm_end > 0)
        return lr_init + (lr_peak - lr_init) * t / warm_end;
      if (t < decay_start) return lr_peak;
      double span = T - decay_start;
      double p = span > 0 ? (t - decay_start) / span : 1.0;
      return lr_final + (lr_peak - lr_final) * (1.0 + std::cos(kPi * p)) / 2.0;
    }
  }
  throw std::logic_error("schedule: unhandled kind");
}

std::string LrSchedule::describe() const {
  char buf[128];
  switch (kind) {
    case ScheduleKind::Constant:
      std::snprintf(buf, sizeof buf, "constant %.0e", lr_peak);
      break;
    case ScheduleKind::Cosine:
      std::snprintf(buf, sizeof buf, "cosine %.0e -> %.0e", lr_init, lr_final);
      break;
    case ScheduleKind::WarmupConstantCosine:
      std::snprintf(buf, sizeof buf, "warmup %.0e -> %.0e, cosine -> %.0e", lr_init, lr_peak,
                    lr_final);
      break;
  }
  return buf;
}

double pretrain_lr(int64_t step, int64_t total_steps, double decay_frac) {
  LrSchedule s{ScheduleKind::WarmupConstantCosine, 3e-5, 3e-4, 3e-5, 0.03, decay_frac};
  return s.at(step, total_steps);
}

void StagePlan::validate() const {
  if (trainable.empty()) throw std::invalid_argument("stage plan: trainable set is empty");
  if (context_len != 4096 && context_len != 32768)
    throw std::invalid_argument("stage plan: context_len must be 4096 or 32768");
  static const std::set<std::string> known = {"lm", "vision.encoder", "vision.connector",
                                              "audio.encoder", "audio.connector"};
  for (const auto& tag : trainable)
    if (!known.count(tag)) throw std::invalid_argument("stage plan: unknown tag " + tag);
}

std::vector<StagePlan> builtin_stages() {
  auto constant = [](double lr) { return LrSchedule{ScheduleKind::Constant, lr, lr, lr, 0, 0}; };
  std::vector<StagePlan> stages;
  stages.push_back({"pretrain",
                    {"lm"},
                    {ScheduleKind::WarmupConstantCosine, 3e-5, 3e-4, 3e-5, 0.03, 0.1},
                    4096});
  stages.push_back(
      {"continue-pretrain", {"lm"}, {ScheduleKind::Cosine, 3e-5, 3e-5, 3e-6, 0, 0}, 32768});
  stages.push_back({"sft-4k", {"lm"}, constant(1e-5), 4096});
  stages.push_back({"sft-32k", {"lm"}, constant(5e-6), 32768});
  stages.push_back({"vision-align-1", {"vision.connector"}, constant(3e-4), 4096});
  stages.push_back(
      {"vision-align-2", {"vision.encoder", "vision.connector"}, constant(1e-4), 4096});
  stages.push_back({"audio-align-1", {"audio.connector"}, constant(3e-4), 4096});
  stages.push_back({"audio-align-2", {"audio.encoder", "audio.connector"}, constant(3e-5), 4096});
  stages.push_back({"omni-tune",
                    {"lm", "vision.encoder", "vision.connector", "audio.encoder",
                     "audio.connector"},
                    constant(1e-5),
                    4096});
  for (const auto& s : stages) s.validate();
  return stages;
}

std::string stages_table() {
  std::ostringstream os;
  os << "stage              context  schedule                            trainable\n";
  for (const auto& s : builtin_stages()) {
    std::string tags;
    for (const auto& t : s.trainable) tags += (tags.empty() ? "" : ",") + t;
    char line[256];
    std::snprintf(line, sizeof line, "%-18s %-8d %-35s %s\n", s.name.c_str(), s.context_len,
                  s.schedule.describe().c_str(), tags.c_str());
    os << line;
  }
  return os.str();
}

FreezeGroups apply_freeze(const std::vector<bundle::ModelBundle::ParamRef>& registry,
                          const StagePlan& plan) {
  plan.validate();
  FreezeGroups out;
  for (const auto& ref : registry) {
    if (ref.tag.empty()) throw std::invalid_argument("apply_freeze: untagged tensor " + ref.name);
    if (plan.trainable.count(ref.tag)) {
      out.trainable.push_back(ref);
      out.trainable_params += ref.tensor->numel();
    } else {
      out.frozen.push_back(ref);
      out.frozen_params += ref.tensor->numel();
    }
  }
  return out;
}

TrainReport train_toy(bundle::ModelBundle& model, const seq::PackedBatch& batch,
                      const StagePlan& plan, int steps) {
  plan.validate();
  if (steps < 1) throw std::invalid_argument("train_toy: steps must be >= 1");
  if (batch.rows.empty()) throw std::invalid_argument("train_toy: empty batch");
  int64_t lm_params = model.lm.param_count();
  if (lm_params > 100'000)
    throw std::invalid_argument("train_toy: model has " + std::to_string(lm_params) +
                                " parameters; the toy loop is capped at 1e5");
  for (const auto& row : batch.rows)
    if (row.length() > plan.context_len)
      throw std::invalid_argument("train_toy: packed row exceeds the stage context length");

  std::vector<lm::TrainRow> rows;
  rows.reserve(batch.rows.size());
  for (const auto& row : batch.rows) rows.push_back(seq::to_train_row(row));

  bool lm_trainable = plan.trainable.count("lm") > 0;
  TrainReport report;
  for (int step = 0; step < steps; ++step) {
    lm::LmGrads grads = lm::LmGrads::zeros(model.lm_config);
    double loss = 0.0;
    for (const auto& row : rows) loss += lm::ce_loss_and_grads(model.lm_config, model.lm, row, grads);
    loss /= static_cast<double>(rows.size());
    if (!std::isfinite(loss))
      throw std::runtime_error("train_toy: non-finite loss at step " + std::to_string(step));
    report.loss_trace.push_back(loss);

    double lr = plan.schedule.at(step, steps);
    if (lm_trainable && lr != 0.0) {
      // scale: grads were accumulated over rows, loss is their mean
      lm::LmGrads scaled = std::move(grads);
      if (rows.size() > 1) {
        scaled.for_each([&](const std::string&, std::vector<double>& g) {
          for (auto& v : g) v /= static_cast<double>(rows.size());
        });
      }
      lm::sgd_apply(model.lm, scaled, lr);
    }
  }
  return report;
}

}  // namespace omni::train
