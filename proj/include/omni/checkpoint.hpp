#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "omni/tensor.hpp"

namespace omni::ckpt {

// Checkpoint layout: <dir>/manifest.json mapping tensor name to
// {shape, dtype, file, offset}, plus raw little-endian f32 data files.
void save_tensors(const std::filesystem::path& dir,
                  const std::vector<std::pair<std::string, const Tensor*>>& tensors,
                  const std::string& data_file = "weights.bin");

// loads every tensor named in the manifest
std::map<std::string, Tensor> load_tensors(const std::filesystem::path& dir);

// pulls a named tensor with a shape check; throws when missing or mismatched
Tensor take_tensor(std::map<std::string, Tensor>& loaded, const std::string& name,
                   const std::vector<int64_t>& expect_shape);

}  // namespace omni::ckpt
