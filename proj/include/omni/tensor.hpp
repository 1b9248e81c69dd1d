#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "omni/rng.hpp"

namespace omni {

// Row-major float tensor, rank 1..3. Small on purpose: every numeric module
// in this project works on sequences short enough that a flat vector plus
// explicit indexing math is the clearest representation.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    int64_t n = 1;
    for (int64_t d : shape_) {
      if (d < 0) throw std::invalid_argument("tensor: negative dimension");
      n *= d;
    }
    data_.assign(static_cast<size_t>(n), 0.0f);
  }

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int64_t> shape, float v) {
    Tensor t(std::move(shape));
    for (auto& x : t.data_) x = v;
    return t;
  }

  static Tensor randn(std::vector<int64_t> shape, Rng& rng, float scale) {
    Tensor t(std::move(shape));
    for (auto& x : t.data_) x = static_cast<float>(rng.gauss() * scale);
    return t;
  }

  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  const std::vector<int64_t>& shape() const { return shape_; }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& vec() { return data_; }
  const std::vector<float>& vec() const { return data_; }

  float& operator()(int64_t i) { return data_[static_cast<size_t>(i)]; }
  float operator()(int64_t i) const { return data_[static_cast<size_t>(i)]; }
  float& operator()(int64_t i, int64_t j) { return data_[static_cast<size_t>(i * shape_[1] + j)]; }
  float operator()(int64_t i, int64_t j) const {
    return data_[static_cast<size_t>(i * shape_[1] + j)];
  }
  float& operator()(int64_t i, int64_t j, int64_t k) {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }
  float operator()(int64_t i, int64_t j, int64_t k) const {
    return data_[static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k)];
  }

  // raw pointer to row i of a rank-2 tensor
  float* row(int64_t i) { return data_.data() + i * shape_[1]; }
  const float* row(int64_t i) const { return data_.data() + i * shape_[1]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

 private:
  std::vector<int64_t> shape_;
  std::vector<float> data_;
};

}  // namespace omni
