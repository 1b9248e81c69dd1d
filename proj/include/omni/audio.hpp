#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "omni/nn.hpp"
#include "omni/tensor.hpp"

namespace omni::audio {

struct AudioConfig {
  int sample_rate = 16000;  // pipeline rate; inputs are resampled to this
  int window = 400;         // Hann window length == FFT size
  int hop = 160;
  int mel_bins = 128;
  double fmin = 0.0;
  double fmax = 8000.0;
  int max_clip_seconds = 30;
  bool pad_clips = false;  // pad short clips to 30 s (off: tokens stay proportional)

  int feat = 64;  // encoder width
  int enc_heads = 4;
  int enc_mlp = 128;
  int hidden = 128;  // LLM embedding width

  int max_clip_samples() const { return max_clip_seconds * sample_rate; }
  std::string to_json_string() const;
  static AudioConfig from_json_string(const std::string& text);
};

struct AudioClip {
  std::vector<float> samples;  // mono at cfg.sample_rate
  int sample_rate = 16000;
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

std::vector<float> resample_linear(std::span<const float> samples, int from_rate, int to_rate);

// consecutive non-overlapping <= 30 s windows at 16 kHz
std::vector<AudioClip> segment_clips(std::span<const float> samples, int sample_rate,
                                     const AudioConfig& cfg = {});

struct MelFrames {
  Tensor values;  // [frames, mel_bins], normalized log-mel
  int64_t frames() const { return values.numel() ? values.dim(0) : 0; }
};

// Hann 400 / hop 160 STFT (reflect-centered), 128 triangular mel filters over
// 0..8 kHz, log10 floored at 1e-10, per-clip 8-decade clamp, then (x+4)/4
MelFrames mel_spectrogram(const AudioClip& clip, const AudioConfig& cfg = {});

// mixed-radix FFT used by the STFT; exposed for tests
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& input);

// mel filterbank [mel_bins, window/2 + 1]; triangle peaks evenly spaced in mel
Tensor mel_filterbank(const AudioConfig& cfg);

struct EncoderWeights {
  // conv1: kernel 3 stride 1 (length preserving), conv2: kernel 2 stride 2
  Tensor conv1_w;  // [3 * mel_bins, feat]
  Tensor conv1_b;  // [feat]
  Tensor conv2_w;  // [2 * feat, feat]
  Tensor conv2_b;  // [feat]
  std::vector<nn::EncoderBlock> blocks;

  static EncoderWeights init(const AudioConfig& cfg, uint64_t seed);
  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, Tensor&)>& fn);
  int64_t param_count();
};

// [frames, mel] -> [floor(frames/2), feat]; needs at least 2 frames
Tensor encode_clip(const AudioConfig& cfg, const EncoderWeights& w, const MelFrames& mel);

struct ProjectorWeights {
  Tensor weight;  // [feat, hidden]
  Tensor bias;    // [hidden]

  static ProjectorWeights init(const AudioConfig& cfg, uint64_t seed);
  void for_each(const std::string& prefix,
                const std::function<void(const std::string&, Tensor&)>& fn);
  int64_t param_count();
};

struct AudioWeights {
  EncoderWeights encoder;
  ProjectorWeights projector;
  static AudioWeights init(const AudioConfig& cfg, uint64_t seed);
};

// affine map into the embedding space; token count == state count
Tensor project(const ProjectorWeights& w, const Tensor& states);

// in-order concatenation of per-clip token blocks
Tensor concat_clips(const std::vector<Tensor>& blocks);

// tokens for n samples at 16 kHz: floor(floor(n/hop)/2)
int64_t token_count_for_samples(int64_t samples, const AudioConfig& cfg = {});

// segment -> mel -> encode -> project -> concat
Tensor encode_audio(const AudioConfig& cfg, const AudioWeights& w, std::span<const float> samples,
                    int sample_rate);

}  // namespace omni::audio
