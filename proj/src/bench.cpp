#include "omni/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "omni/rng.hpp"

namespace omni::bench {

double MonotonicClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string BenchReport::render() const {
  std::ostringstream os;
  os << "speed bench: " << config_summary << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "  input=%d output=%d batch=%d warmup=%d iters=%d\n",
                params.input_tokens, params.output_tokens, params.batch, params.warmup,
                params.iters);
  os << line;
  std::snprintf(line, sizeof line, "  prefill: %.4f s\n", prefill_s);
  os << line;
  if (decode_na) {
    os << "  decode: n/a (no output tokens requested)\n";
  } else {
    std::snprintf(line, sizeof line, "  decode: %.4f s (%.1f tokens/s)\n", decode_s,
                  decode_tokens_per_s);
    os << line;
  }
  std::snprintf(line, sizeof line, "  requests/s: %.2f\n", requests_per_s);
  os << line;
  os << "  environment: " << environment << "\n";
  return os.str();
}

std::string BenchReport::to_json_string() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = config_summary;
  j["input_tokens"] = params.input_tokens;
  j["output_tokens"] = params.output_tokens;
  j["batch"] = params.batch;
  j["warmup"] = params.warmup;
  j["iters"] = params.iters;
  j["prefill_s"] = prefill_s;
  if (decode_na) {
    j["decode_tokens_per_s"] = nullptr;
  } else {
    j["decode_s"] = decode_s;
    j["decode_tokens_per_s"] = decode_tokens_per_s;
  }
  j["requests_per_s"] = requests_per_s;
  j["environment"] = environment;
  return j.dump(2);
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// run fn(row) for rows [0, batch) across a small thread pool
void parallel_rows(int batch, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || batch <= 1) {
    for (int r = 0; r < batch; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  int workers = std::min(threads, batch);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < batch; r = next.fetch_add(1)) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

BenchReport speed_bench(const lm::LmConfig& cfg, const lm::LmWeights& weights,
                        const BenchParams& params, const Clock& clock) {
  cfg.validate();
  if (params.batch < 1 || params.input_tokens < 1 || params.iters < 1 || params.warmup < 0)
    throw std::invalid_argument("speed_bench: bad protocol parameters");
  if (params.input_tokens + params.output_tokens > cfg.max_context)
    throw std::invalid_argument("speed_bench: input + output exceeds max_context");

  int threads = params.threads > 0
                    ? params.threads
                    : std::max(1u, std::thread::hardware_concurrency());

  // deterministic prompts per batch row
  std::vector<std::vector<int>> prompts(static_cast<size_t>(params.batch));
  for (int r = 0; r < params.batch; ++r) {
    Rng rng(params.prompt_seed + static_cast<uint64_t>(r));
    for (int i = 0; i < params.input_tokens; ++i)
      prompts[static_cast<size_t>(r)].push_back(static_cast<int>(rng.below(cfg.vocab)));
  }

  std::vector<double> prefill_times, decode_times;
  for (int iter = 0; iter < params.warmup + params.iters; ++iter) {
    std::vector<lm::KvCache> caches;
    caches.reserve(static_cast<size_t>(params.batch));
    for (int r = 0; r < params.batch; ++r)
      caches.emplace_back(cfg, params.input_tokens + params.output_tokens);
    std::vector<Tensor> last_logits(static_cast<size_t>(params.batch));

    double t0 = clock.now();
    parallel_rows(params.batch, threads, [&](int r) {
      auto& cache = caches[static_cast<size_t>(r)];
      for (int i = 0; i < params.input_tokens; ++i) {
        int id = prompts[static_cast<size_t>(r)][static_cast<size_t>(i)];
        last_logits[static_cast<size_t>(r)] = lm::forward_step(cfg, weights, weights.embed.row(id), i, cache);
      }
    });
    double t1 = clock.now();

    double t2 = clock.now();
    parallel_rows(params.batch, threads, [&](int r) {
      auto& cache = caches[static_cast<size_t>(r)];
      Tensor logits = last_logits[static_cast<size_t>(r)];
      for (int step = 0; step < params.output_tokens; ++step) {
        const float* row = logits.row(0);
        int best = 0;
        for (int j = 1; j < cfg.vocab; ++j)
          if (row[j] > row[best]) best = j;
        if (step + 1 == params.output_tokens) break;
        logits = lm::forward_step(cfg, weights, weights.embed.row(best), cache.len, cache);
      }
    });
    double t3 = clock.now();

    if (iter >= params.warmup) {
      prefill_times.push_back(t1 - t0);
      decode_times.push_back(t3 - t2);
    }
  }

  BenchReport report;
  report.params = params;
  report.config_summary = "hidden=" + std::to_string(cfg.hidden) +
                          " layers=" + std::to_string(cfg.layers) +
                          " heads=" + std::to_string(cfg.heads) + "/" +
                          std::to_string(cfg.kv_heads) + " vocab=" + std::to_string(cfg.vocab);
  report.prefill_s = median(prefill_times);
  report.decode_s = median(decode_times);
  report.decode_na = params.output_tokens == 0;
  if (report.prefill_s <= 0 || (!report.decode_na && report.decode_s <= 0))
    throw std::runtime_error("speed_bench: clock reported a non-positive phase time");
  if (!report.decode_na)
    report.decode_tokens_per_s =
        static_cast<double>(params.batch) * params.output_tokens / report.decode_s;
  report.requests_per_s = static_cast<double>(params.batch) / (report.prefill_s + report.decode_s);
  report.environment = std::to_string(threads) + " worker thread(s), " +
                       std::to_string(std::thread::hardware_concurrency()) + " hardware thread(s)";
  return report;
}

}  // namespace omni::bench
