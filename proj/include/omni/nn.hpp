#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "omni/tensor.hpp"

// Shared float-storage building blocks. Reductions accumulate in double.
namespace omni::nn {

// y = x * W for [rows, inner] x [inner, cols]
inline void matmul(const Tensor& x, const Tensor& w, Tensor& y) {
  int64_t rows = x.dim(0), inner = x.dim(1), cols = w.dim(1);
  std::vector<double> acc(static_cast<size_t>(cols));
  for (int64_t t = 0; t < rows; ++t) {
    const float* xr = x.row(t);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int64_t i = 0; i < inner; ++i) {
      double xv = xr[i];
      if (xv == 0.0) continue;
      const float* wr = w.row(i);
      for (int64_t j = 0; j < cols; ++j) acc[static_cast<size_t>(j)] += xv * wr[j];
    }
    float* yr = y.row(t);
    for (int64_t j = 0; j < cols; ++j) yr[j] = static_cast<float>(acc[static_cast<size_t>(j)]);
  }
}

inline void add_row_bias(Tensor& x, const Tensor& bias) {
  for (int64_t t = 0; t < x.dim(0); ++t) {
    float* xr = x.row(t);
    for (int64_t j = 0; j < x.dim(1); ++j) xr[j] += bias(j);
  }
}

inline void rmsnorm(const Tensor& x, const Tensor& scale, double eps, Tensor& y) {
  int64_t rows = x.dim(0), h = x.dim(1);
  for (int64_t t = 0; t < rows; ++t) {
    const float* xr = x.row(t);
    double ss = 0.0;
    for (int64_t i = 0; i < h; ++i) ss += static_cast<double>(xr[i]) * xr[i];
    double inv = 1.0 / std::sqrt(ss / static_cast<double>(h) + eps);
    float* yr = y.row(t);
    for (int64_t i = 0; i < h; ++i) yr[i] = static_cast<float>(xr[i] * inv * scale(i));
  }
}

inline float silu(float z) { return static_cast<float>(z / (1.0 + std::exp(-static_cast<double>(z)))); }

inline float gelu(float z) {
  return static_cast<float>(0.5 * z * (1.0 + std::erf(static_cast<double>(z) / std::sqrt(2.0))));
}

// in-place softmax over a contiguous span
inline void softmax_inplace(double* v, int64_t n) {
  double mx = v[0];
  for (int64_t i = 1; i < n; ++i) mx = std::max(mx, v[i]);
  double denom = 0.0;
  for (int64_t i = 0; i < n; ++i) denom += std::exp(v[i] - mx);
  for (int64_t i = 0; i < n; ++i) v[i] = std::exp(v[i] - mx) / denom;
}

inline void check_finite(const Tensor& x, const char* what) {
  for (float v : x.vec())
    if (!std::isfinite(v)) throw std::runtime_error(std::string("non-finite ") + what);
}

// plain bidirectional multi-head self-attention block used by the toy
// vision/audio encoders: pre-norm, equal q/k/v heads, no rope
struct EncoderBlock {
  Tensor norm1, wq, wk, wv, wo;  // norms [d], projections [d, d]
  Tensor norm2, w_in, w_out;     // mlp [d, m], [m, d]

  static EncoderBlock init(int d, int mlp, Rng& rng, float scale = 0.05f) {
    EncoderBlock b;
    b.norm1 = Tensor::full({d}, 1.0f);
    b.wq = Tensor::randn({d, d}, rng, scale);
    b.wk = Tensor::randn({d, d}, rng, scale);
    b.wv = Tensor::randn({d, d}, rng, scale);
    b.wo = Tensor::randn({d, d}, rng, scale);
    b.norm2 = Tensor::full({d}, 1.0f);
    b.w_in = Tensor::randn({d, mlp}, rng, scale);
    b.w_out = Tensor::randn({mlp, d}, rng, scale);
    return b;
  }

  void apply(Tensor& x, int heads, double eps = 1e-5) const {
    int64_t n = x.dim(0), d = x.dim(1);
    int64_t hd = d / heads;
    Tensor normed({n, d});
    rmsnorm(x, norm1, eps, normed);
    Tensor q({n, d}), k({n, d}), v({n, d});
    matmul(normed, wq, q);
    matmul(normed, wk, k);
    matmul(normed, wv, v);

    Tensor ctx({n, d});
    std::vector<double> scores(static_cast<size_t>(n));
    double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));
    for (int h = 0; h < heads; ++h) {
      int64_t off = h * hd;
      for (int64_t t = 0; t < n; ++t) {
        for (int64_t j = 0; j < n; ++j) {
          double dot = 0.0;
          for (int64_t i = 0; i < hd; ++i)
            dot += static_cast<double>(q(t, off + i)) * k(j, off + i);
          scores[static_cast<size_t>(j)] = dot * inv_sqrt;
        }
        softmax_inplace(scores.data(), n);
        for (int64_t i = 0; i < hd; ++i) {
          double acc = 0.0;
          for (int64_t j = 0; j < n; ++j) acc += scores[static_cast<size_t>(j)] * v(j, off + i);
          ctx(t, off + i) = static_cast<float>(acc);
        }
      }
    }
    Tensor att({n, d});
    matmul(ctx, wo, att);
    for (int64_t i = 0; i < x.numel(); ++i) x(i) += att(i);

    rmsnorm(x, norm2, eps, normed);
    Tensor mid({n, w_in.dim(1)});
    matmul(normed, w_in, mid);
    for (auto& m : mid.vec()) m = gelu(m);
    Tensor out({n, d});
    matmul(mid, w_out, out);
    for (int64_t i = 0; i < x.numel(); ++i) x(i) += out(i);
  }

  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, Tensor&)>& fn) {
    fn(prefix + "norm1", norm1);
    fn(prefix + "wq", wq);
    fn(prefix + "wk", wk);
    fn(prefix + "wv", wv);
    fn(prefix + "wo", wo);
    fn(prefix + "norm2", norm2);
    fn(prefix + "w_in", w_in);
    fn(prefix + "w_out", w_out);
  }
};

}  // namespace omni::nn
