#pragma once

#include <filesystem>
#include <vector>

namespace omni::wav {

struct WavData {
  std::vector<float> samples;  // mono, [-1, 1]
  int sample_rate = 0;
};

// PCM 16-bit signed little-endian; stereo is downmixed by averaging
WavData read_wav(const std::filesystem::path& file);
void write_wav(const std::filesystem::path& file, const std::vector<float>& samples,
               int sample_rate);

}  // namespace omni::wav
