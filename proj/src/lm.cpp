#include "omni/lm.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "omni/nn.hpp"

namespace omni::lm {

void LmConfig::validate() const {
  if (hidden <= 0 || layers <= 0 || heads <= 0 || kv_heads <= 0 || ffn <= 0 || vocab <= 0)
    throw std::invalid_argument("lm config: dimensions must be positive");
  if (heads % kv_heads != 0)
    throw std::invalid_argument("lm config: heads must be a multiple of kv_heads");
  if (hidden != heads * head_dim)
    throw std::invalid_argument("lm config: hidden must equal heads * head_dim");
  if (head_dim % 2 != 0) throw std::invalid_argument("lm config: head_dim must be even for RoPE");
  if (max_context < 1) throw std::invalid_argument("lm config: max_context must be >= 1");
  if (rope_base <= 0) throw std::invalid_argument("lm config: rope_base must be positive");
  if (norm_eps <= 0) throw std::invalid_argument("lm config: norm_eps must be positive");
}

std::string LmConfig::to_json_string() const {
  nlohmann::json j{{"hidden", hidden},     {"layers", layers},
                   {"heads", heads},       {"kv_heads", kv_heads},
                   {"head_dim", head_dim}, {"ffn", ffn},
                   {"vocab", vocab},       {"rope_base", rope_base},
                   {"max_context", max_context}, {"norm_eps", norm_eps}};
  return j.dump(2);
}

LmConfig LmConfig::from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  LmConfig c;
  c.hidden = j.at("hidden");
  c.layers = j.at("layers");
  c.heads = j.at("heads");
  c.kv_heads = j.at("kv_heads");
  c.head_dim = j.at("head_dim");
  c.ffn = j.at("ffn");
  c.vocab = j.at("vocab");
  c.rope_base = j.value("rope_base", 5'000'000.0);
  c.max_context = j.value("max_context", 4096);
  c.norm_eps = j.value("norm_eps", 1e-5);
  c.validate();
  return c;
}

LmWeights LmWeights::init(const LmConfig& cfg, uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const float scale = 0.02f;
  LmWeights w;
  w.embed = Tensor::randn({cfg.vocab, cfg.hidden}, rng, scale);
  w.layers.resize(static_cast<size_t>(cfg.layers));
  for (auto& l : w.layers) {
    l.attn_norm = Tensor::full({cfg.hidden}, 1.0f);
    l.wq = Tensor::randn({cfg.hidden, cfg.heads * cfg.head_dim}, rng, scale);
    l.wk = Tensor::randn({cfg.hidden, cfg.kv_heads * cfg.head_dim}, rng, scale);
    l.wv = Tensor::randn({cfg.hidden, cfg.kv_heads * cfg.head_dim}, rng, scale);
    l.wo = Tensor::randn({cfg.heads * cfg.head_dim, cfg.hidden}, rng, scale);
    l.ffn_norm = Tensor::full({cfg.hidden}, 1.0f);
    l.w_gate = Tensor::randn({cfg.hidden, cfg.ffn}, rng, scale);
    l.w_up = Tensor::randn({cfg.hidden, cfg.ffn}, rng, scale);
    l.w_down = Tensor::randn({cfg.ffn, cfg.hidden}, rng, scale);
  }
  w.final_norm = Tensor::full({cfg.hidden}, 1.0f);
  w.head = Tensor::randn({cfg.hidden, cfg.vocab}, rng, scale);
  return w;
}

void LmWeights::for_each(const std::function<void(const std::string&, Tensor&)>& fn) {
  fn("embed", embed);
  for (size_t i = 0; i < layers.size(); ++i) {
    auto p = "layers." + std::to_string(i) + ".";
    fn(p + "attn_norm", layers[i].attn_norm);
    fn(p + "wq", layers[i].wq);
    fn(p + "wk", layers[i].wk);
    fn(p + "wv", layers[i].wv);
    fn(p + "wo", layers[i].wo);
    fn(p + "ffn_norm", layers[i].ffn_norm);
    fn(p + "w_gate", layers[i].w_gate);
    fn(p + "w_up", layers[i].w_up);
    fn(p + "w_down", layers[i].w_down);
  }
  fn("final_norm", final_norm);
  fn("head", head);
}

void LmWeights::for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<LmWeights*>(this)->for_each(
      [&fn](const std::string& name, Tensor& t) { fn(name, t); });
}

int64_t LmWeights::param_count() const {
  int64_t n = 0;
  for_each([&n](const std::string&, const Tensor& t) { n += t.numel(); });
  return n;
}

std::string ParamReport::to_json_string() const {
  nlohmann::json j{{"schema_version", 1},
                   {"embedding", embedding},
                   {"softmax_head", softmax_head},
                   {"backbone", backbone},
                   {"total", total}};
  return j.dump(2);
}

ParamReport count_params(const LmConfig& cfg) {
  cfg.validate();
  ParamReport r;
  int64_t h = cfg.hidden, v = cfg.vocab, f = cfg.ffn;
  int64_t qo = static_cast<int64_t>(cfg.heads) * cfg.head_dim;
  int64_t kv = static_cast<int64_t>(cfg.kv_heads) * cfg.head_dim;
  r.embedding = v * h;
  r.softmax_head = h * v;
  int64_t per_layer = h             // attn_norm
                      + h * qo      // wq
                      + 2 * h * kv  // wk, wv
                      + qo * h      // wo
                      + h           // ffn_norm
                      + 2 * h * f   // w_gate, w_up
                      + f * h;      // w_down
  r.backbone = per_layer * cfg.layers + h;  // + final_norm
  r.total = r.embedding + r.softmax_head + r.backbone;
  return r;
}

void rope_apply(Tensor& x, std::span<const int> positions, double base) {
  if (x.rank() != 3) throw std::invalid_argument("rope_apply: expected [seq, heads, head_dim]");
  int64_t seq = x.dim(0), heads = x.dim(1), hd = x.dim(2);
  if (hd % 2 != 0) throw std::invalid_argument("rope_apply: head_dim must be even");
  if (static_cast<int64_t>(positions.size()) != seq)
    throw std::invalid_argument("rope_apply: positions size mismatch");
  for (int64_t t = 0; t < seq; ++t) {
    if (positions[static_cast<size_t>(t)] < 0)
      throw std::invalid_argument("rope_apply: negative position");
    double pos = positions[static_cast<size_t>(t)];
    for (int64_t i = 0; i < hd; i += 2) {
      double theta = pos * std::pow(base, -static_cast<double>(i) / static_cast<double>(hd));
      double c = std::cos(theta), s = std::sin(theta);
      for (int64_t h = 0; h < heads; ++h) {
        float a = x(t, h, i), b = x(t, h, i + 1);
        x(t, h, i) = static_cast<float>(a * c - b * s);
        x(t, h, i + 1) = static_cast<float>(a * s + b * c);
      }
    }
  }
}

namespace {

using nn::matmul;
using nn::rmsnorm;
using nn::check_finite;

std::vector<int> default_positions(int64_t n) {
  std::vector<int> p(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) p[static_cast<size_t>(i)] = static_cast<int>(i);
  return p;
}

}  // namespace

Tensor gqa_attention(const LmConfig& cfg, const LayerWeights& w, const Tensor& x,
                     std::span<const int> positions, const AttnMask& mask) {
  int64_t seq = x.dim(0);
  if (seq > cfg.max_context) throw std::invalid_argument("attention: sequence exceeds max_context");
  std::vector<int> defpos;
  if (positions.empty()) {
    defpos = default_positions(seq);
    positions = defpos;
  }

  Tensor q({seq, cfg.heads * cfg.head_dim});
  Tensor k({seq, cfg.kv_heads * cfg.head_dim});
  Tensor v({seq, cfg.kv_heads * cfg.head_dim});
  matmul(x, w.wq, q);
  matmul(x, w.wk, k);
  matmul(x, w.wv, v);

  Tensor q3({seq, cfg.heads, cfg.head_dim});
  Tensor k3({seq, cfg.kv_heads, cfg.head_dim});
  q3.vec() = q.vec();
  k3.vec() = k.vec();
  rope_apply(q3, positions, cfg.rope_base);
  rope_apply(k3, positions, cfg.rope_base);

  int group = cfg.heads / cfg.kv_heads;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim));

  Tensor attn_out({seq, cfg.heads * cfg.head_dim});
  std::vector<double> scores(static_cast<size_t>(seq));
  for (int h = 0; h < cfg.heads; ++h) {
    int kvh = h / group;
    for (int64_t t = 0; t < seq; ++t) {
      double max_score = -1e300;
      for (int64_t j = 0; j <= t; ++j) {
        if (!mask.allowed(t, j)) continue;
        double dot = 0.0;
        for (int d = 0; d < cfg.head_dim; ++d)
          dot += static_cast<double>(q3(t, h, d)) * k3(j, kvh, d);
        scores[static_cast<size_t>(j)] = dot * inv_sqrt;
        max_score = std::max(max_score, scores[static_cast<size_t>(j)]);
      }
      double denom = 0.0;
      for (int64_t j = 0; j <= t; ++j) {
        if (!mask.allowed(t, j)) continue;
        denom += std::exp(scores[static_cast<size_t>(j)] - max_score);
      }
      float* out = attn_out.row(t) + static_cast<int64_t>(h) * cfg.head_dim;
      for (int d = 0; d < cfg.head_dim; ++d) out[d] = 0.0f;
      for (int64_t j = 0; j <= t; ++j) {
        if (!mask.allowed(t, j)) continue;
        double p = std::exp(scores[static_cast<size_t>(j)] - max_score) / denom;
        const float* vr = v.row(j) + static_cast<int64_t>(kvh) * cfg.head_dim;
        for (int d = 0; d < cfg.head_dim; ++d) out[d] = static_cast<float>(out[d] + p * vr[d]);
      }
    }
  }

  Tensor out({seq, cfg.hidden});
  matmul(attn_out, w.wo, out);
  return out;
}

Tensor embed_rows(const LmConfig& cfg, const LmWeights& w, std::span<const int> ids) {
  Tensor x({static_cast<int64_t>(ids.size()), cfg.hidden});
  for (size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || ids[t] >= cfg.vocab)
      throw std::out_of_range("forward: token id " + std::to_string(ids[t]) +
                              " outside vocab of " + std::to_string(cfg.vocab));
    const float* src = w.embed.row(ids[t]);
    std::copy(src, src + cfg.hidden, x.row(static_cast<int64_t>(t)));
  }
  return x;
}

Tensor forward_embed(const LmConfig& cfg, const LmWeights& w, const Tensor& embeds,
                     std::span<const int> positions, const AttnMask& mask) {
  if (embeds.rank() != 2 || embeds.dim(1) != cfg.hidden)
    throw std::invalid_argument("forward: embeddings must be [seq, hidden]");
  int64_t seq = embeds.dim(0);
  if (seq > cfg.max_context) throw std::invalid_argument("forward: sequence exceeds max_context");
  check_finite(embeds, "input embedding");
  std::vector<int> defpos;
  if (positions.empty()) {
    defpos = default_positions(seq);
    positions = defpos;
  }

  Tensor x = embeds;
  Tensor normed({seq, cfg.hidden});
  for (const auto& layer : w.layers) {
    rmsnorm(x, layer.attn_norm, cfg.norm_eps, normed);
    Tensor att = gqa_attention(cfg, layer, normed, positions, mask);
    for (int64_t i = 0; i < x.numel(); ++i) x(i) += att(i);

    rmsnorm(x, layer.ffn_norm, cfg.norm_eps, normed);
    Tensor gate({seq, cfg.ffn}), up({seq, cfg.ffn});
    matmul(normed, layer.w_gate, gate);
    matmul(normed, layer.w_up, up);
    for (int64_t i = 0; i < gate.numel(); ++i) {
      double g = gate(i);
      gate(i) = static_cast<float>(g / (1.0 + std::exp(-g)) * up(i));  // SiLU(g) * up
    }
    Tensor ffn({seq, cfg.hidden});
    matmul(gate, layer.w_down, ffn);
    for (int64_t i = 0; i < x.numel(); ++i) x(i) += ffn(i);
  }

  rmsnorm(x, w.final_norm, cfg.norm_eps, normed);
  Tensor logits({seq, cfg.vocab});
  matmul(normed, w.head, logits);
  check_finite(logits, "logits");
  return logits;
}

Tensor forward_ids(const LmConfig& cfg, const LmWeights& w, std::span<const int> ids,
                   std::span<const int> positions, const AttnMask& mask) {
  return forward_embed(cfg, w, embed_rows(cfg, w, ids), positions, mask);
}

KvCache::KvCache(const LmConfig& cfg, int cap) : capacity(cap) {
  for (int i = 0; i < cfg.layers; ++i) {
    k.emplace_back(Tensor({cap, cfg.kv_heads * cfg.head_dim}));
    v.emplace_back(Tensor({cap, cfg.kv_heads * cfg.head_dim}));
  }
}

Tensor forward_step(const LmConfig& cfg, const LmWeights& w, const float* embed_row, int position,
                    KvCache& cache) {
  if (cache.len >= cache.capacity) throw std::runtime_error("forward_step: cache full");

  Tensor x({1, cfg.hidden});
  std::copy(embed_row, embed_row + cfg.hidden, x.row(0));
  check_finite(x, "input embedding");
  Tensor normed({1, cfg.hidden});
  std::vector<int> pos1{position};
  int group = cfg.heads / cfg.kv_heads;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(cfg.head_dim));

  for (int li = 0; li < cfg.layers; ++li) {
    const auto& layer = w.layers[static_cast<size_t>(li)];
    rmsnorm(x, layer.attn_norm, cfg.norm_eps, normed);

    Tensor q({1, cfg.heads * cfg.head_dim});
    Tensor k({1, cfg.kv_heads * cfg.head_dim});
    Tensor v({1, cfg.kv_heads * cfg.head_dim});
    matmul(normed, layer.wq, q);
    matmul(normed, layer.wk, k);
    matmul(normed, layer.wv, v);
    Tensor q3({1, cfg.heads, cfg.head_dim}), k3({1, cfg.kv_heads, cfg.head_dim});
    q3.vec() = q.vec();
    k3.vec() = k.vec();
    rope_apply(q3, pos1, cfg.rope_base);
    rope_apply(k3, pos1, cfg.rope_base);

    Tensor& ck = cache.k[static_cast<size_t>(li)];
    Tensor& cv = cache.v[static_cast<size_t>(li)];
    std::copy(k3.vec().begin(), k3.vec().end(), ck.row(cache.len));
    std::copy(v.vec().begin(), v.vec().end(), cv.row(cache.len));
    int64_t n = cache.len + 1;

    Tensor attn_out({1, cfg.heads * cfg.head_dim});
    std::vector<double> scores(static_cast<size_t>(n));
    for (int h = 0; h < cfg.heads; ++h) {
      int kvh = h / group;
      double max_score = -1e300;
      for (int64_t j = 0; j < n; ++j) {
        double dot = 0.0;
        const float* kr = ck.row(j) + static_cast<int64_t>(kvh) * cfg.head_dim;
        for (int d = 0; d < cfg.head_dim; ++d) dot += static_cast<double>(q3(0, h, d)) * kr[d];
        scores[static_cast<size_t>(j)] = dot * inv_sqrt;
        max_score = std::max(max_score, scores[static_cast<size_t>(j)]);
      }
      double denom = 0.0;
      for (int64_t j = 0; j < n; ++j) denom += std::exp(scores[static_cast<size_t>(j)] - max_score);
      float* out = attn_out.row(0) + static_cast<int64_t>(h) * cfg.head_dim;
      for (int d = 0; d < cfg.head_dim; ++d) out[d] = 0.0f;
      for (int64_t j = 0; j < n; ++j) {
        double p = std::exp(scores[static_cast<size_t>(j)] - max_score) / denom;
        const float* vr = cv.row(j) + static_cast<int64_t>(kvh) * cfg.head_dim;
        for (int d = 0; d < cfg.head_dim; ++d) out[d] = static_cast<float>(out[d] + p * vr[d]);
      }
    }
    Tensor att({1, cfg.hidden});
    matmul(attn_out, layer.wo, att);
    for (int64_t i = 0; i < cfg.hidden; ++i) x(0, i) += att(0, i);

    rmsnorm(x, layer.ffn_norm, cfg.norm_eps, normed);
    Tensor gate({1, cfg.ffn}), up({1, cfg.ffn});
    matmul(normed, layer.w_gate, gate);
    matmul(normed, layer.w_up, up);
    for (int64_t i = 0; i < cfg.ffn; ++i) {
      double g = gate(0, i);
      gate(0, i) = static_cast<float>(g / (1.0 + std::exp(-g)) * up(0, i));
    }
    Tensor ffn({1, cfg.hidden});
    matmul(gate, layer.w_down, ffn);
    for (int64_t i = 0; i < cfg.hidden; ++i) x(0, i) += ffn(0, i);
  }
  ++cache.len;

  rmsnorm(x, w.final_norm, cfg.norm_eps, normed);
  Tensor logits({1, cfg.vocab});
  matmul(normed, w.head, logits);
  return logits;
}

namespace {

int argmax_row(const Tensor& logits, int64_t row) {
  const float* r = logits.row(row);
  int best = 0;
  for (int64_t j = 1; j < logits.dim(1); ++j)
    if (r[j] > r[best]) best = static_cast<int>(j);
  return best;
}

}  // namespace

std::vector<int> decode_greedy_embed(const LmConfig& cfg, const LmWeights& w,
                                     const Tensor& prompt_embeds, int max_new, int eos_id) {
  int64_t prompt_len = prompt_embeds.dim(0);
  if (prompt_len == 0) throw std::invalid_argument("decode: empty prompt");
  if (prompt_len + max_new > cfg.max_context)
    throw std::invalid_argument("decode: prompt + max_new exceeds max_context budget");
  if (max_new == 0) return {};

  KvCache cache(cfg, static_cast<int>(prompt_len) + max_new);
  Tensor logits;
  for (int64_t t = 0; t < prompt_len; ++t)
    logits = forward_step(cfg, w, prompt_embeds.row(t), static_cast<int>(t), cache);

  std::vector<int> out;
  for (int step = 0; step < max_new; ++step) {
    int next = argmax_row(logits, 0);
    out.push_back(next);
    if (next == eos_id) break;
    if (step + 1 == max_new) break;
    logits = forward_step(cfg, w, w.embed.row(next), cache.len, cache);
  }
  return out;
}

std::vector<int> decode_greedy(const LmConfig& cfg, const LmWeights& w, std::span<const int> prompt,
                               int max_new, int eos_id) {
  if (prompt.empty()) throw std::invalid_argument("decode: empty prompt");
  Tensor embeds = embed_rows(cfg, w, prompt);
  return decode_greedy_embed(cfg, w, embeds, max_new, eos_id);
}

}  // namespace omni::lm
