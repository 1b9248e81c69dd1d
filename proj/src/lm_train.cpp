#include "omni/lm_train.hpp"

#include <cmath>
#include <stdexcept>

namespace omni::lm {

namespace {

using dvec = std::vector<double>;

// row-major [rows, cols] matrix of doubles
struct DMat {
  int64_t rows = 0, cols = 0;
  dvec v;
  DMat() = default;
  DMat(int64_t r, int64_t c) : rows(r), cols(c), v(static_cast<size_t>(r * c), 0.0) {}
  double* row(int64_t r) { return v.data() + r * cols; }
  const double* row(int64_t r) const { return v.data() + r * cols; }
};

// y = x * W, W given as an f32 tensor [inner, cols]
void matmul_f(const DMat& x, const Tensor& w, DMat& y) {
  for (int64_t t = 0; t < x.rows; ++t) {
    const double* xr = x.row(t);
    double* yr = y.row(t);
    for (int64_t j = 0; j < y.cols; ++j) yr[j] = 0.0;
    for (int64_t i = 0; i < x.cols; ++i) {
      double xv = xr[i];
      if (xv == 0.0) continue;
      const float* wr = w.row(i);
      for (int64_t j = 0; j < y.cols; ++j) yr[j] += xv * wr[j];
    }
  }
}

// dx += dy * W^T
void matmul_back_input(const DMat& dy, const Tensor& w, DMat& dx) {
  for (int64_t t = 0; t < dy.rows; ++t) {
    const double* dyr = dy.row(t);
    double* dxr = dx.row(t);
    for (int64_t i = 0; i < dx.cols; ++i) {
      const float* wr = w.row(i);
      double acc = 0.0;
      for (int64_t j = 0; j < dy.cols; ++j) acc += dyr[j] * wr[j];
      dxr[i] += acc;
    }
  }
}

// dW += x^T * dy, with dW flat row-major [inner, cols]
void matmul_back_weight(const DMat& x, const DMat& dy, dvec& dw) {
  for (int64_t t = 0; t < x.rows; ++t) {
    const double* xr = x.row(t);
    const double* dyr = dy.row(t);
    for (int64_t i = 0; i < x.cols; ++i) {
      double xv = xr[i];
      if (xv == 0.0) continue;
      double* dwr = dw.data() + i * dy.cols;
      for (int64_t j = 0; j < dy.cols; ++j) dwr[j] += xv * dyr[j];
    }
  }
}

void rmsnorm_fwd(const DMat& x, const Tensor& g, double eps, DMat& y, dvec& inv_rms) {
  for (int64_t t = 0; t < x.rows; ++t) {
    const double* xr = x.row(t);
    double ss = 0.0;
    for (int64_t i = 0; i < x.cols; ++i) ss += xr[i] * xr[i];
    double inv = 1.0 / std::sqrt(ss / static_cast<double>(x.cols) + eps);
    inv_rms[static_cast<size_t>(t)] = inv;
    double* yr = y.row(t);
    for (int64_t i = 0; i < x.cols; ++i) yr[i] = xr[i] * inv * g(i);
  }
}

// dx += backward of y = x * g * inv_rms(x); also accumulates dg
void rmsnorm_bwd(const DMat& x, const Tensor& g, const dvec& inv_rms, const DMat& dy, DMat& dx,
                 dvec& dg) {
  int64_t h = x.cols;
  for (int64_t t = 0; t < x.rows; ++t) {
    const double* xr = x.row(t);
    const double* dyr = dy.row(t);
    double inv = inv_rms[static_cast<size_t>(t)];
    double dot = 0.0;  // sum_j dy_j * g_j * x_j
    for (int64_t i = 0; i < h; ++i) {
      dg[static_cast<size_t>(i)] += dyr[i] * xr[i] * inv;
      dot += dyr[i] * g(i) * xr[i];
    }
    double scale = dot * inv * inv * inv / static_cast<double>(h);
    double* dxr = dx.row(t);
    for (int64_t i = 0; i < h; ++i) dxr[i] += dyr[i] * g(i) * inv - xr[i] * scale;
  }
}

double silu(double z) { return z / (1.0 + std::exp(-z)); }
double silu_grad(double z) {
  double s = 1.0 / (1.0 + std::exp(-z));
  return s * (1.0 + z * (1.0 - s));
}

// rotate pairs of x (organized [T, heads, head_dim]) by sign * theta(pos, i)
void rope_rows(DMat& x, int heads, int head_dim, const std::vector<int>& positions, double base,
               double sign) {
  for (int64_t t = 0; t < x.rows; ++t) {
    double pos = positions[static_cast<size_t>(t)];
    double* xr = x.row(t);
    for (int i = 0; i < head_dim; i += 2) {
      double theta = sign * pos * std::pow(base, -static_cast<double>(i) / head_dim);
      double c = std::cos(theta), s = std::sin(theta);
      for (int h = 0; h < heads; ++h) {
        double* p = xr + static_cast<int64_t>(h) * head_dim + i;
        double a = p[0], b = p[1];
        p[0] = a * c - b * s;
        p[1] = a * s + b * c;
      }
    }
  }
}

struct LayerTrace {
  DMat x;           // block input [T, H]
  dvec inv_rms1;    // rmsnorm stats
  DMat n1;          // normed input [T, H]
  DMat qr, kr, vv;  // post-rope q [T, heads*hd], k/v [T, kvh*hd]
  dvec probs;       // [heads, T, T] attention probabilities (0 where masked)
  DMat ctx;         // attention context [T, heads*hd]
  DMat x_mid;       // after attention residual
  dvec inv_rms2;
  DMat n2;
  DMat gpre, upre, act;  // ffn intermediates [T, F]
};

struct Trace {
  DMat x0;
  std::vector<LayerTrace> layers;
  dvec inv_rms_final;
  DMat nf;
  DMat logits;
  std::vector<int> positions;
};

bool mask_allows(const TrainRow& row, int64_t i, int64_t j) {
  if (j > i) return false;
  if (row.doc_ids.empty()) return true;
  return row.doc_ids[static_cast<size_t>(i)] == row.doc_ids[static_cast<size_t>(j)];
}

double forward_trace(const LmConfig& cfg, const LmWeights& w, const TrainRow& row, Trace& tr) {
  int64_t T = static_cast<int64_t>(row.token_ids.size());
  if (T == 0) throw std::invalid_argument("train forward: empty row");
  if (T > cfg.max_context) throw std::invalid_argument("train forward: row exceeds max_context");
  if (row.targets.size() != static_cast<size_t>(T))
    throw std::invalid_argument("train forward: targets size mismatch");
  int64_t H = cfg.hidden;

  tr.positions.resize(static_cast<size_t>(T));
  for (int64_t t = 0; t < T; ++t)
    tr.positions[static_cast<size_t>(t)] =
        row.positions.empty() ? static_cast<int>(t) : row.positions[static_cast<size_t>(t)];

  tr.x0 = DMat(T, H);
  for (int64_t t = 0; t < T; ++t) {
    int id = row.token_ids[static_cast<size_t>(t)];
    if (id >= cfg.vocab) throw std::out_of_range("train forward: token id outside vocab");
    if (id >= 0) {
      const float* er = w.embed.row(id);
      for (int64_t i = 0; i < H; ++i) tr.x0.row(t)[i] = er[i];
    } else {
      if (tr.x0.rows > row.injected.dim(0))
        throw std::invalid_argument("train forward: injected embeddings missing for media row");
      const float* er = row.injected.row(t);
      for (int64_t i = 0; i < H; ++i) tr.x0.row(t)[i] = er[i];
    }
  }

  int heads = cfg.heads, kvh = cfg.kv_heads, hd = cfg.head_dim;
  int group = heads / kvh;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));

  tr.layers.assign(static_cast<size_t>(cfg.layers), {});
  DMat x = tr.x0;
  for (int li = 0; li < cfg.layers; ++li) {
    LayerTrace& L = tr.layers[static_cast<size_t>(li)];
    const LayerWeights& lw = w.layers[static_cast<size_t>(li)];
    L.x = x;
    L.inv_rms1.resize(static_cast<size_t>(T));
    L.n1 = DMat(T, H);
    rmsnorm_fwd(L.x, lw.attn_norm, cfg.norm_eps, L.n1, L.inv_rms1);

    L.qr = DMat(T, static_cast<int64_t>(heads) * hd);
    L.kr = DMat(T, static_cast<int64_t>(kvh) * hd);
    L.vv = DMat(T, static_cast<int64_t>(kvh) * hd);
    matmul_f(L.n1, lw.wq, L.qr);
    matmul_f(L.n1, lw.wk, L.kr);
    matmul_f(L.n1, lw.wv, L.vv);
    rope_rows(L.qr, heads, hd, tr.positions, cfg.rope_base, +1.0);
    rope_rows(L.kr, kvh, hd, tr.positions, cfg.rope_base, +1.0);

    L.probs.assign(static_cast<size_t>(heads) * T * T, 0.0);
    L.ctx = DMat(T, static_cast<int64_t>(heads) * hd);
    dvec scores(static_cast<size_t>(T));
    for (int h = 0; h < heads; ++h) {
      int kg = h / group;
      for (int64_t t = 0; t < T; ++t) {
        double mx = -1e300;
        for (int64_t j = 0; j <= t; ++j) {
          if (!mask_allows(row, t, j)) continue;
          const double* qp = L.qr.row(t) + static_cast<int64_t>(h) * hd;
          const double* kp = L.kr.row(j) + static_cast<int64_t>(kg) * hd;
          double dot = 0.0;
          for (int d = 0; d < hd; ++d) dot += qp[d] * kp[d];
          scores[static_cast<size_t>(j)] = dot * inv_sqrt;
          mx = std::max(mx, scores[static_cast<size_t>(j)]);
        }
        double denom = 0.0;
        for (int64_t j = 0; j <= t; ++j)
          if (mask_allows(row, t, j)) denom += std::exp(scores[static_cast<size_t>(j)] - mx);
        double* ctx = L.ctx.row(t) + static_cast<int64_t>(h) * hd;
        for (int64_t j = 0; j <= t; ++j) {
          if (!mask_allows(row, t, j)) continue;
          double p = std::exp(scores[static_cast<size_t>(j)] - mx) / denom;
          L.probs[(static_cast<size_t>(h) * T + static_cast<size_t>(t)) * T +
                  static_cast<size_t>(j)] = p;
          const double* vp = L.vv.row(j) + static_cast<int64_t>(kg) * hd;
          for (int d = 0; d < hd; ++d) ctx[d] += p * vp[d];
        }
      }
    }

    L.x_mid = DMat(T, H);
    matmul_f(L.ctx, lw.wo, L.x_mid);
    for (int64_t i = 0; i < T * H; ++i) L.x_mid.v[static_cast<size_t>(i)] += x.v[static_cast<size_t>(i)];

    L.inv_rms2.resize(static_cast<size_t>(T));
    L.n2 = DMat(T, H);
    rmsnorm_fwd(L.x_mid, lw.ffn_norm, cfg.norm_eps, L.n2, L.inv_rms2);

    L.gpre = DMat(T, cfg.ffn);
    L.upre = DMat(T, cfg.ffn);
    matmul_f(L.n2, lw.w_gate, L.gpre);
    matmul_f(L.n2, lw.w_up, L.upre);
    L.act = DMat(T, cfg.ffn);
    for (size_t i = 0; i < L.act.v.size(); ++i) L.act.v[i] = silu(L.gpre.v[i]) * L.upre.v[i];

    DMat ffn_out(T, H);
    matmul_f(L.act, lw.w_down, ffn_out);
    x = L.x_mid;
    for (int64_t i = 0; i < T * H; ++i) x.v[static_cast<size_t>(i)] += ffn_out.v[static_cast<size_t>(i)];
  }

  tr.inv_rms_final.resize(static_cast<size_t>(T));
  tr.nf = DMat(T, H);
  // x is the last block's output; stash it in x0 slot? keep separate
  tr.layers.emplace_back();           // sentinel slot holding final x
  tr.layers.back().x = std::move(x);  // block L input == final hidden state
  rmsnorm_fwd(tr.layers.back().x, w.final_norm, cfg.norm_eps, tr.nf, tr.inv_rms_final);

  tr.logits = DMat(T, cfg.vocab);
  matmul_f(tr.nf, w.head, tr.logits);

  double loss = 0.0;
  int64_t counted = 0;
  for (int64_t t = 0; t < T; ++t) {
    int target = row.targets[static_cast<size_t>(t)];
    if (target < 0) continue;
    if (target >= cfg.vocab) throw std::out_of_range("train forward: target outside vocab");
    const double* lr = tr.logits.row(t);
    double mx = lr[0];
    for (int64_t j = 1; j < cfg.vocab; ++j) mx = std::max(mx, lr[j]);
    double denom = 0.0;
    for (int64_t j = 0; j < cfg.vocab; ++j) denom += std::exp(lr[j] - mx);
    loss += -(lr[target] - mx - std::log(denom));
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("train forward: row has no loss positions");
  return loss / static_cast<double>(counted);
}

}  // namespace

LmGrads LmGrads::zeros(const LmConfig& cfg) {
  LmGrads g;
  auto sz = [](int64_t a, int64_t b = 1) { return static_cast<size_t>(a * b); };
  g.embed.assign(sz(cfg.vocab, cfg.hidden), 0.0);
  g.final_norm.assign(sz(cfg.hidden), 0.0);
  g.head.assign(sz(cfg.hidden, cfg.vocab), 0.0);
  g.layers.resize(static_cast<size_t>(cfg.layers));
  for (auto& l : g.layers) {
    l.attn_norm.assign(sz(cfg.hidden), 0.0);
    l.wq.assign(sz(cfg.hidden, cfg.heads * cfg.head_dim), 0.0);
    l.wk.assign(sz(cfg.hidden, cfg.kv_heads * cfg.head_dim), 0.0);
    l.wv.assign(sz(cfg.hidden, cfg.kv_heads * cfg.head_dim), 0.0);
    l.wo.assign(sz(cfg.heads * cfg.head_dim, cfg.hidden), 0.0);
    l.ffn_norm.assign(sz(cfg.hidden), 0.0);
    l.w_gate.assign(sz(cfg.hidden, cfg.ffn), 0.0);
    l.w_up.assign(sz(cfg.hidden, cfg.ffn), 0.0);
    l.w_down.assign(sz(cfg.ffn, cfg.hidden), 0.0);
  }
  return g;
}

void LmGrads::for_each(const std::function<void(const std::string&, std::vector<double>&)>& fn) {
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

double ce_loss(const LmConfig& cfg, const LmWeights& w, const TrainRow& row) {
  Trace tr;
  return forward_trace(cfg, w, row, tr);
}

double ce_loss_and_grads(const LmConfig& cfg, const LmWeights& w, const TrainRow& row,
                         LmGrads& grads) {
  Trace tr;
  double loss = forward_trace(cfg, w, row, tr);

  int64_t T = static_cast<int64_t>(row.token_ids.size());
  int64_t H = cfg.hidden, V = cfg.vocab, F = cfg.ffn;
  int heads = cfg.heads, kvh = cfg.kv_heads, hd = cfg.head_dim;
  int group = heads / kvh;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));

  int64_t counted = 0;
  for (int t : row.targets) counted += t >= 0;

  // d loss / d logits
  DMat dlogits(T, V);
  for (int64_t t = 0; t < T; ++t) {
    int target = row.targets[static_cast<size_t>(t)];
    if (target < 0) continue;
    const double* lr = tr.logits.row(t);
    double mx = lr[0];
    for (int64_t j = 1; j < V; ++j) mx = std::max(mx, lr[j]);
    double denom = 0.0;
    for (int64_t j = 0; j < V; ++j) denom += std::exp(lr[j] - mx);
    double* dl = dlogits.row(t);
    for (int64_t j = 0; j < V; ++j) dl[j] = std::exp(lr[j] - mx) / denom / counted;
    dl[target] -= 1.0 / counted;
  }

  // head and final norm
  matmul_back_weight(tr.nf, dlogits, grads.head);
  DMat dnf(T, H);
  matmul_back_input(dlogits, w.head, dnf);
  const DMat& x_final = tr.layers.back().x;  // sentinel slot
  DMat dx(T, H);
  rmsnorm_bwd(x_final, w.final_norm, tr.inv_rms_final, dnf, dx, grads.final_norm);

  for (int li = cfg.layers - 1; li >= 0; --li) {
    const LayerTrace& L = tr.layers[static_cast<size_t>(li)];
    const LayerWeights& lw = w.layers[static_cast<size_t>(li)];
    LayerGrads& lg = grads.layers[static_cast<size_t>(li)];

    // ffn half: x_out = x_mid + act * w_down
    matmul_back_weight(L.act, dx, lg.w_down);
    DMat dact(T, F);
    matmul_back_input(dx, lw.w_down, dact);

    DMat dgpre(T, F), dupre(T, F);
    for (size_t i = 0; i < dact.v.size(); ++i) {
      dgpre.v[i] = dact.v[i] * L.upre.v[i] * silu_grad(L.gpre.v[i]);
      dupre.v[i] = dact.v[i] * silu(L.gpre.v[i]);
    }
    matmul_back_weight(L.n2, dgpre, lg.w_gate);
    matmul_back_weight(L.n2, dupre, lg.w_up);
    DMat dn2(T, H);
    matmul_back_input(dgpre, lw.w_gate, dn2);
    matmul_back_input(dupre, lw.w_up, dn2);

    // dx currently holds d/d x_out; x_out = x_mid + ffn, so dx_mid starts at dx
    DMat dx_mid = dx;
    rmsnorm_bwd(L.x_mid, lw.ffn_norm, L.inv_rms2, dn2, dx_mid, lg.ffn_norm);

    // attention half: x_mid = x + ctx * wo
    matmul_back_weight(L.ctx, dx_mid, lg.wo);
    DMat dctx(T, static_cast<int64_t>(heads) * hd);
    matmul_back_input(dx_mid, lw.wo, dctx);

    DMat dqr(T, static_cast<int64_t>(heads) * hd);
    DMat dkr(T, static_cast<int64_t>(kvh) * hd);
    DMat dvv(T, static_cast<int64_t>(kvh) * hd);
    dvec dp(static_cast<size_t>(T));
    for (int h = 0; h < heads; ++h) {
      int kg = h / group;
      for (int64_t t = 0; t < T; ++t) {
        const double* dc = dctx.row(t) + static_cast<int64_t>(h) * hd;
        const double* probs =
            &L.probs[(static_cast<size_t>(h) * T + static_cast<size_t>(t)) * T];
        double pdp = 0.0;
        for (int64_t j = 0; j <= t; ++j) {
          double p = probs[j];
          if (p == 0.0) {
            dp[static_cast<size_t>(j)] = 0.0;
            continue;
          }
          const double* vp = L.vv.row(j) + static_cast<int64_t>(kg) * hd;
          double d = 0.0;
          for (int dd = 0; dd < hd; ++dd) d += dc[dd] * vp[dd];
          dp[static_cast<size_t>(j)] = d;
          pdp += p * d;
          double* dvp = dvv.row(j) + static_cast<int64_t>(kg) * hd;
          for (int dd = 0; dd < hd; ++dd) dvp[dd] += p * dc[dd];
        }
        const double* qp = L.qr.row(t) + static_cast<int64_t>(h) * hd;
        double* dqp = dqr.row(t) + static_cast<int64_t>(h) * hd;
        for (int64_t j = 0; j <= t; ++j) {
          double p = probs[j];
          if (p == 0.0) continue;
          double ds = p * (dp[static_cast<size_t>(j)] - pdp) * inv_sqrt;
          const double* kp = L.kr.row(j) + static_cast<int64_t>(kg) * hd;
          double* dkp = dkr.row(j) + static_cast<int64_t>(kg) * hd;
          for (int dd = 0; dd < hd; ++dd) {
            dqp[dd] += ds * kp[dd];
            dkp[dd] += ds * qp[dd];
          }
        }
      }
    }

    // undo rope (inverse rotation) to reach the projection outputs
    rope_rows(dqr, heads, hd, tr.positions, cfg.rope_base, -1.0);
    rope_rows(dkr, kvh, hd, tr.positions, cfg.rope_base, -1.0);

    matmul_back_weight(L.n1, dqr, lg.wq);
    matmul_back_weight(L.n1, dkr, lg.wk);
    matmul_back_weight(L.n1, dvv, lg.wv);
    DMat dn1(T, H);
    matmul_back_input(dqr, lw.wq, dn1);
    matmul_back_input(dkr, lw.wk, dn1);
    matmul_back_input(dvv, lw.wv, dn1);

    dx = dx_mid;  // residual into the block input
    rmsnorm_bwd(L.x, lw.attn_norm, L.inv_rms1, dn1, dx, lg.attn_norm);
  }

  // scatter into embedding rows for token positions
  for (int64_t t = 0; t < T; ++t) {
    int id = row.token_ids[static_cast<size_t>(t)];
    if (id < 0) continue;  // injected media embedding: constant input
    double* ge = grads.embed.data() + static_cast<int64_t>(id) * H;
    const double* dxr = dx.row(t);
    for (int64_t i = 0; i < H; ++i) ge[i] += dxr[i];
  }
  return loss;
}

void sgd_apply(LmWeights& w, const LmGrads& grads, double lr) {
  if (lr == 0.0) return;
  auto apply = [lr](Tensor& t, const dvec& g) {
    for (int64_t i = 0; i < t.numel(); ++i)
      t(i) = static_cast<float>(t(i) - lr * g[static_cast<size_t>(i)]);
  };
  apply(w.embed, grads.embed);
  for (size_t i = 0; i < w.layers.size(); ++i) {
    apply(w.layers[i].attn_norm, grads.layers[i].attn_norm);
    apply(w.layers[i].wq, grads.layers[i].wq);
    apply(w.layers[i].wk, grads.layers[i].wk);
    apply(w.layers[i].wv, grads.layers[i].wv);
    apply(w.layers[i].wo, grads.layers[i].wo);
    apply(w.layers[i].ffn_norm, grads.layers[i].ffn_norm);
    apply(w.layers[i].w_gate, grads.layers[i].w_gate);
    apply(w.layers[i].w_up, grads.layers[i].w_up);
    apply(w.layers[i].w_down, grads.layers[i].w_down);
  }
  apply(w.final_norm, grads.final_norm);
  apply(w.head, grads.head);
}

}  // namespace omni::lm
