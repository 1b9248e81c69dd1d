#include "omni/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace omni::wav {

namespace {

uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t read_u16(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

WavData read_wav(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("wav: cannot open " + file.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("wav: not a RIFF/WAVE file: " + file.string());

  int channels = 0, bits = 0, rate = 0;
  size_t data_off = 0, data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    uint32_t chunk_len = read_u32(bytes.data() + pos + 4);
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (read_u16(bytes.data() + pos + 8) != 1)
        throw std::runtime_error("wav: only PCM supported");
      channels = read_u16(bytes.data() + pos + 10);
      rate = static_cast<int>(read_u32(bytes.data() + pos + 12));
      bits = read_u16(bytes.data() + pos + 22);
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }
  if (!channels || !rate || !data_off) throw std::runtime_error("wav: missing fmt or data chunk");
  if (bits != 16) throw std::runtime_error("wav: only 16-bit PCM supported");
  if (channels != 1 && channels != 2) throw std::runtime_error("wav: only mono/stereo supported");
  data_len = std::min(data_len, bytes.size() - data_off);

  size_t n = data_len / 2 / static_cast<size_t>(channels);
  WavData out;
  out.sample_rate = rate;
  out.samples.resize(n);
  const unsigned char* p = bytes.data() + data_off;
  for (size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      int16_t v = static_cast<int16_t>(read_u16(p + (i * channels + c) * 2));
      acc += static_cast<double>(v) / 32768.0;
    }
    out.samples[i] = static_cast<float>(acc / channels);
  }
  return out;
}

void write_wav(const std::filesystem::path& file, const std::vector<float>& samples,
               int sample_rate) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("wav: cannot write " + file.string());
  uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
  auto w32 = [&](uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto w16 = [&](uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
  out.write("RIFF", 4);
  w32(36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  w32(16);
  w16(1);  // PCM
  w16(1);  // mono
  w32(static_cast<uint32_t>(sample_rate));
  w32(static_cast<uint32_t>(sample_rate * 2));
  w16(2);
  w16(16);
  out.write("data", 4);
  w32(data_len);
  for (float s : samples) {
    float c = std::clamp(s, -1.0f, 1.0f);
    auto v = static_cast<int16_t>(std::lround(c * 32767.0f));
    w16(static_cast<uint16_t>(v));
  }
}

}  // namespace omni::wav
