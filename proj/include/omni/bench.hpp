#pragma once

#include <cstdint>
#include <string>

#include "omni/lm.hpp"

namespace omni::bench {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;  // monotonic seconds
};

class MonotonicClock : public Clock {
 public:
  double now() const override;
};

// every call advances by a fixed interval, so each measured phase reads as
// exactly that interval; report arithmetic becomes testable without time
class FakeClock : public Clock {
 public:
  explicit FakeClock(double interval_s) : interval_(interval_s) {}
  double now() const override { return t_ += interval_; }

 private:
  double interval_;
  mutable double t_ = 0.0;
};

struct BenchParams {
  int input_tokens = 128;
  int output_tokens = 128;
  int batch = 8;
  int warmup = 2;
  int iters = 5;
  int threads = 0;  // 0 = hardware concurrency
  uint64_t prompt_seed = 1234;
};

struct BenchReport {
  std::string config_summary;
  BenchParams params;
  double prefill_s = 0.0;  // medians over the timed iterations
  double decode_s = 0.0;
  double decode_tokens_per_s = 0.0;  // batch * output_tokens / decode_s
  double requests_per_s = 0.0;       // batch / (prefill_s + decode_s)
  bool decode_na = false;            // output_tokens == 0
  std::string environment;

  std::string render() const;
  std::string to_json_string() const;
};

// prefill + greedy decode at fixed token counts, deterministic seeded
// prompts, warmup discarded, median of the remaining iterations
BenchReport speed_bench(const lm::LmConfig& cfg, const lm::LmWeights& weights,
                        const BenchParams& params, const Clock& clock);

}  // namespace omni::bench
