#include "omni/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts need byte swaps");

namespace omni::ckpt {

void save_tensors(const std::filesystem::path& dir,
                  const std::vector<std::pair<std::string, const Tensor*>>& tensors,
                  const std::string& data_file) {
  std::filesystem::create_directories(dir);
  std::ofstream bin(dir / data_file, std::ios::binary);
  if (!bin) throw std::runtime_error("checkpoint: cannot write " + (dir / data_file).string());

  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  auto& entries = manifest["tensors"] = nlohmann::json::object();
  uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    nlohmann::json e;
    e["shape"] = t->shape();
    e["dtype"] = "f32";
    e["file"] = data_file;
    e["offset"] = offset;
    entries[name] = std::move(e);
    bin.write(reinterpret_cast<const char*>(t->data()),
              static_cast<std::streamsize>(t->numel() * sizeof(float)));
    offset += static_cast<uint64_t>(t->numel()) * sizeof(float);
  }
  if (!bin) throw std::runtime_error("checkpoint: short write to " + data_file);

  std::ofstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("checkpoint: cannot write manifest.json");
  mf << manifest.dump(2) << "\n";
}

std::map<std::string, Tensor> load_tensors(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw std::runtime_error("checkpoint: cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest = nlohmann::json::parse(mf);

  std::map<std::string, Tensor> out;
  for (const auto& [name, e] : manifest.at("tensors").items()) {
    if (e.at("dtype").get<std::string>() != "f32")
      throw std::runtime_error("checkpoint: tensor " + name + " has unsupported dtype");
    std::vector<int64_t> shape = e.at("shape").get<std::vector<int64_t>>();
    Tensor t(shape);
    std::ifstream bin(dir / e.at("file").get<std::string>(), std::ios::binary);
    if (!bin) throw std::runtime_error("checkpoint: cannot open data file for " + name);
    bin.seekg(static_cast<std::streamoff>(e.at("offset").get<uint64_t>()));
    bin.read(reinterpret_cast<char*>(t.data()),
             static_cast<std::streamsize>(t.numel() * sizeof(float)));
    if (!bin) throw std::runtime_error("checkpoint: short read for tensor " + name);
    out.emplace(name, std::move(t));
  }
  return out;
}

Tensor take_tensor(std::map<std::string, Tensor>& loaded, const std::string& name,
                   const std::vector<int64_t>& expect_shape) {
  auto it = loaded.find(name);
  if (it == loaded.end()) throw std::runtime_error("checkpoint: missing tensor " + name);
  if (it->second.shape() != expect_shape)
    throw std::runtime_error("checkpoint: tensor " + name + " has shape " +
                             it->second.shape_str() + ", config expects another shape");
  Tensor t = std::move(it->second);
  loaded.erase(it);
  return t;
}

}  // namespace omni::ckpt
