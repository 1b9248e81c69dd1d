#include "omni/vision.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace omni::vision {

std::string VisionConfig::to_json_string() const {
  nlohmann::json j{{"base", base},
                   {"patch", patch},
                   {"feat", feat},
                   {"enc_heads", enc_heads},
                   {"enc_mlp", enc_mlp},
                   {"query_dim", query_dim},
                   {"num_queries", num_queries},
                   {"max_slices", max_slices},
                   {"max_patches", max_patches},
                   {"hidden", hidden},
                   {"key_positions", key_positions}};
  return j.dump(2);
}

VisionConfig VisionConfig::from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  VisionConfig c;
  c.base = j.value("base", 448);
  c.patch = j.value("patch", 32);
  c.feat = j.value("feat", 48);
  c.enc_heads = j.value("enc_heads", 4);
  c.enc_mlp = j.value("enc_mlp", 96);
  c.query_dim = j.value("query_dim", 32);
  c.num_queries = j.value("num_queries", 64);
  c.max_slices = j.value("max_slices", 9);
  c.max_patches = j.value("max_patches", 400);
  c.hidden = j.value("hidden", 128);
  c.key_positions = j.value("key_positions", true);
  return c;
}

std::string SlicePlan::to_json_string() const {
  nlohmann::json j{{"rows", rows},
                   {"cols", cols},
                   {"include_global", include_global},
                   {"global_w", global_w},
                   {"global_h", global_h}};
  auto& r = j["rects"] = nlohmann::json::array();
  for (const auto& rect : rects) r.push_back({rect.x, rect.y, rect.w, rect.h});
  return j.dump(2);
}

SlicePlan plan_slices(int width, int height, int max_slices, int base) {
  if (width < 1 || height < 1) throw std::invalid_argument("plan_slices: non-positive image size");

  SlicePlan plan;
  plan.global_w = base;
  plan.global_h = base;
  if (width <= base && height <= base) return plan;  // global view only

  double ratio = static_cast<double>(width) * height / (static_cast<double>(base) * base);
  int target = std::clamp(static_cast<int>(std::llround(ratio)), 1, max_slices);

  int best_rows = 0, best_cols = 0;
  double best_score = 1e300;
  for (int rows = 1; rows <= max_slices; ++rows) {
    for (int cols = 1; cols <= max_slices; ++cols) {
      int count = rows * cols;
      if (count > max_slices) continue;
      if (count < target - 1 || count > target + 1) continue;
      double slice_aspect = (static_cast<double>(width) / cols) / (static_cast<double>(height) / rows);
      double score = std::abs(std::log(slice_aspect));
      bool take;
      if (best_rows == 0) {
        take = true;
      } else if (std::abs(score - best_score) > 1e-12) {
        take = score < best_score;
      } else {
        // ties: fewer slices, then more rows
        int best_count = best_rows * best_cols;
        take = count < best_count || (count == best_count && rows > best_rows);
      }
      if (take) {
        best_rows = rows;
        best_cols = cols;
        best_score = score;
      }
    }
  }

  plan.rows = best_rows;
  plan.cols = best_cols;
  for (int r = 0; r < best_rows; ++r) {
    int y0 = static_cast<int>(static_cast<int64_t>(r) * height / best_rows);
    int y1 = static_cast<int>(static_cast<int64_t>(r + 1) * height / best_rows);
    for (int c = 0; c < best_cols; ++c) {
      int x0 = static_cast<int>(static_cast<int64_t>(c) * width / best_cols);
      int x1 = static_cast<int>(static_cast<int64_t>(c + 1) * width / best_cols);
      plan.rects.push_back({x0, y0, x1 - x0, y1 - y0});
    }
  }
  return plan;
}

int64_t token_budget(int width, int height, const VisionConfig& cfg) {
  SlicePlan plan = plan_slices(width, height, cfg.max_slices, cfg.base);
  return static_cast<int64_t>(plan.view_count()) * cfg.num_queries;
}

EncoderWeights EncoderWeights::init(const VisionConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  EncoderWeights w;
  w.patch_proj = Tensor::randn({static_cast<int64_t>(cfg.patch) * cfg.patch * 3, cfg.feat}, rng, 0.05f);
  w.patch_bias = Tensor({cfg.feat});
  w.pos_embed = Tensor::randn({cfg.patches_per_view(), cfg.feat}, rng, 0.02f);
  w.blocks.push_back(nn::EncoderBlock::init(cfg.feat, cfg.enc_mlp, rng));
  w.blocks.push_back(nn::EncoderBlock::init(cfg.feat, cfg.enc_mlp, rng));
  return w;
}

void EncoderWeights::for_each(const std::string& prefix,
                              const std::function<void(const std::string&, Tensor&)>& fn) {
  fn(prefix + "patch_proj", patch_proj);
  fn(prefix + "patch_bias", patch_bias);
  fn(prefix + "pos_embed", pos_embed);
  for (size_t i = 0; i < blocks.size(); ++i)
    blocks[i].for_each(prefix + "block" + std::to_string(i) + ".", fn);
}

int64_t EncoderWeights::param_count() {
  int64_t n = 0;
  for_each("", [&n](const std::string&, Tensor& t) { n += t.numel(); });
  return n;
}

ResamplerWeights ResamplerWeights::init(const VisionConfig& cfg, uint64_t seed) {
  Rng rng(seed ^ 0x5eedf00dull);
  ResamplerWeights w;
  w.queries = Tensor::randn({cfg.num_queries, cfg.query_dim}, rng, 0.1f);
  w.wk = Tensor::randn({cfg.feat, cfg.query_dim}, rng, 0.1f);
  w.wv = Tensor::randn({cfg.feat, cfg.query_dim}, rng, 0.1f);
  w.wo = Tensor::randn({cfg.query_dim, cfg.hidden}, rng, 0.1f);
  w.key_pos = Tensor::randn({cfg.max_patches, cfg.query_dim}, rng, 0.05f);
  return w;
}

void ResamplerWeights::for_each(const std::string& prefix,
                                const std::function<void(const std::string&, Tensor&)>& fn) {
  fn(prefix + "queries", queries);
  fn(prefix + "wk", wk);
  fn(prefix + "wv", wv);
  fn(prefix + "wo", wo);
  fn(prefix + "key_pos", key_pos);
}

int64_t ResamplerWeights::param_count() {
  int64_t n = 0;
  for_each("", [&n](const std::string&, Tensor& t) { n += t.numel(); });
  return n;
}

VisionWeights VisionWeights::init(const VisionConfig& cfg, uint64_t seed) {
  return {EncoderWeights::init(cfg, seed), ResamplerWeights::init(cfg, seed + 1)};
}

Tensor encode_view(const VisionConfig& cfg, const EncoderWeights& w, const img::Image& view) {
  if (view.width != cfg.base || view.height != cfg.base)
    throw std::invalid_argument("encode_view: view must be pre-resized to base x base");
  int grid = cfg.base / cfg.patch;
  int64_t p = static_cast<int64_t>(grid) * grid;
  int64_t patch_len = static_cast<int64_t>(cfg.patch) * cfg.patch * 3;

  // normalized pixels, one flattened row per patch
  Tensor patches({p, patch_len});
  for (int gy = 0; gy < grid; ++gy)
    for (int gx = 0; gx < grid; ++gx) {
      float* row = patches.row(static_cast<int64_t>(gy) * grid + gx);
      int64_t off = 0;
      for (int y = 0; y < cfg.patch; ++y)
        for (int x = 0; x < cfg.patch; ++x)
          for (int c = 0; c < 3; ++c)
            row[off++] =
                (view.at(gx * cfg.patch + x, gy * cfg.patch + y, c) - cfg.mean[c]) / cfg.stdev[c];
    }

  Tensor feats({p, cfg.feat});
  nn::matmul(patches, w.patch_proj, feats);
  nn::add_row_bias(feats, w.patch_bias);
  for (int64_t i = 0; i < p; ++i)
    for (int64_t j = 0; j < cfg.feat; ++j) feats(i, j) += w.pos_embed(i, j);

  for (const auto& block : w.blocks) block.apply(feats, cfg.enc_heads);
  nn::check_finite(feats, "vision patch features");
  return feats;
}

Tensor resample(const VisionConfig& cfg, const ResamplerWeights& w, const Tensor& patch_feats) {
  if (patch_feats.rank() != 2 || patch_feats.dim(0) < 1)
    throw std::invalid_argument("resample: need at least one patch feature");
  if (patch_feats.dim(1) != cfg.feat)
    throw std::invalid_argument("resample: feature width mismatch");
  int64_t p = patch_feats.dim(0);

  Tensor keys({p, cfg.query_dim}), values({p, cfg.query_dim});
  nn::matmul(patch_feats, w.wk, keys);
  nn::matmul(patch_feats, w.wv, values);
  if (cfg.key_positions)
    for (int64_t j = 0; j < p; ++j) {
      const float* pos = w.key_pos.row(j % cfg.max_patches);
      float* kr = keys.row(j);
      for (int64_t d = 0; d < cfg.query_dim; ++d) kr[d] += pos[d];
    }

  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(cfg.query_dim));
  Tensor ctx({cfg.num_queries, cfg.query_dim});
  std::vector<double> scores(static_cast<size_t>(p));
  for (int64_t qi = 0; qi < cfg.num_queries; ++qi) {
    const float* q = w.queries.row(qi);
    for (int64_t j = 0; j < p; ++j) {
      const float* kr = keys.row(j);
      double dot = 0.0;
      for (int64_t d = 0; d < cfg.query_dim; ++d) dot += static_cast<double>(q[d]) * kr[d];
      scores[static_cast<size_t>(j)] = dot * inv_sqrt;
    }
    nn::softmax_inplace(scores.data(), p);
    float* out = ctx.row(qi);
    for (int64_t d = 0; d < cfg.query_dim; ++d) {
      double acc = 0.0;
      for (int64_t j = 0; j < p; ++j) acc += scores[static_cast<size_t>(j)] * values(j, d);
      out[d] = static_cast<float>(acc);
    }
  }

  Tensor tokens({cfg.num_queries, cfg.hidden});
  nn::matmul(ctx, w.wo, tokens);
  return tokens;
}

VisionTokens encode_image(const VisionConfig& cfg, const VisionWeights& w, const img::Image& image) {
  VisionTokens out;
  out.plan = plan_slices(image.width, image.height, cfg.max_slices, cfg.base);
  int views = out.plan.view_count();
  out.embeddings = Tensor({static_cast<int64_t>(views) * cfg.num_queries, cfg.hidden});

  int64_t row = 0;
  auto emit_view = [&](const img::Image& view) {
    Tensor feats = encode_view(cfg, w.encoder, img::resize_bilinear(view, cfg.base, cfg.base));
    Tensor tokens = resample(cfg, w.resampler, feats);
    std::copy(tokens.vec().begin(), tokens.vec().end(), out.embeddings.row(row));
    row += cfg.num_queries;
  };

  for (const auto& rect : out.plan.rects)
    emit_view(img::crop(image, rect.x, rect.y, rect.w, rect.h));
  if (out.plan.include_global) emit_view(image);
  return out;
}

}  // namespace omni::vision
