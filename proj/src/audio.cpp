#include "omni/audio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace omni::audio {

std::string AudioConfig::to_json_string() const {
  nlohmann::json j{{"sample_rate", sample_rate}, {"window", window},
                   {"hop", hop},                 {"mel_bins", mel_bins},
                   {"fmin", fmin},               {"fmax", fmax},
                   {"max_clip_seconds", max_clip_seconds},
                   {"pad_clips", pad_clips},     {"feat", feat},
                   {"enc_heads", enc_heads},     {"enc_mlp", enc_mlp},
                   {"hidden", hidden}};
  return j.dump(2);
}

AudioConfig AudioConfig::from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AudioConfig c;
  c.sample_rate = j.value("sample_rate", 16000);
  c.window = j.value("window", 400);
  c.hop = j.value("hop", 160);
  c.mel_bins = j.value("mel_bins", 128);
  c.fmin = j.value("fmin", 0.0);
  c.fmax = j.value("fmax", 8000.0);
  c.max_clip_seconds = j.value("max_clip_seconds", 30);
  c.pad_clips = j.value("pad_clips", false);
  c.feat = j.value("feat", 64);
  c.enc_heads = j.value("enc_heads", 4);
  c.enc_mlp = j.value("enc_mlp", 128);
  c.hidden = j.value("hidden", 128);
  return c;
}

std::vector<float> resample_linear(std::span<const float> samples, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0)
    throw std::invalid_argument("resample: rates must be positive");
  if (from_rate == to_rate) return {samples.begin(), samples.end()};
  size_t out_n = static_cast<size_t>(
      static_cast<int64_t>(samples.size()) * to_rate / from_rate);
  std::vector<float> out(out_n);
  double step = static_cast<double>(from_rate) / to_rate;
  for (size_t i = 0; i < out_n; ++i) {
    double src = i * step;
    size_t i0 = static_cast<size_t>(src);
    double frac = src - static_cast<double>(i0);
    size_t i1 = std::min(i0 + 1, samples.size() - 1);
    out[i] = static_cast<float>(samples[i0] * (1.0 - frac) + samples[i1] * frac);
  }
  return out;
}

std::vector<AudioClip> segment_clips(std::span<const float> samples, int sample_rate,
                                     const AudioConfig& cfg) {
  if (samples.empty()) throw std::invalid_argument("segment_clips: empty input");
  std::vector<float> mono16k = resample_linear(samples, sample_rate, cfg.sample_rate);

  std::vector<AudioClip> clips;
  size_t window = static_cast<size_t>(cfg.max_clip_samples());
  for (size_t off = 0; off < mono16k.size(); off += window) {
    size_t len = std::min(window, mono16k.size() - off);
    AudioClip clip;
    clip.sample_rate = cfg.sample_rate;
    clip.samples.assign(mono16k.begin() + static_cast<std::ptrdiff_t>(off),
                        mono16k.begin() + static_cast<std::ptrdiff_t>(off + len));
    if (cfg.pad_clips) clip.samples.resize(window, 0.0f);
    clips.push_back(std::move(clip));
  }
  return clips;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

void fft_rec(std::vector<std::complex<double>>& a) {
  size_t n = a.size();
  if (n <= 1) return;
  size_t p = 2;  // smallest factor
  while (n % p != 0) ++p;
  size_t m = n / p;

  // decimate into p interleaved sub-sequences and transform each
  std::vector<std::vector<std::complex<double>>> parts(p, std::vector<std::complex<double>>(m));
  for (size_t i = 0; i < n; ++i) parts[i % p][i / p] = a[i];
  for (auto& part : parts) fft_rec(part);

  // combine: X[q*m + r] = sum_s w^(s*(q*m+r)) * parts[s][r]
  for (size_t q = 0; q < p; ++q)
    for (size_t r = 0; r < m; ++r) {
      std::complex<double> acc(0.0, 0.0);
      size_t idx = q * m + r;
      for (size_t s = 0; s < p; ++s) {
        double angle = -2.0 * kPi * static_cast<double>(s * idx % n) / static_cast<double>(n);
        acc += parts[s][r] * std::polar(1.0, angle);
      }
      a[idx] = acc;
    }
}

}  // namespace

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& input) {
  auto a = input;
  fft_rec(a);
  return a;
}

Tensor mel_filterbank(const AudioConfig& cfg) {
  auto hz_to_mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto mel_to_hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };

  int bins = cfg.window / 2 + 1;
  double mel_lo = hz_to_mel(cfg.fmin), mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> centers_hz(static_cast<size_t>(cfg.mel_bins) + 2);
  for (int i = 0; i < cfg.mel_bins + 2; ++i)
    centers_hz[static_cast<size_t>(i)] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.mel_bins + 1));

  Tensor fb({cfg.mel_bins, bins});
  double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.window;
  for (int m = 0; m < cfg.mel_bins; ++m) {
    double left = centers_hz[static_cast<size_t>(m)];
    double center = centers_hz[static_cast<size_t>(m) + 1];
    double right = centers_hz[static_cast<size_t>(m) + 2];
    for (int b = 0; b < bins; ++b) {
      double f = b * bin_hz;
      double w = 0.0;
      if (f > left && f < center)
        w = (f - left) / (center - left);
      else if (f >= center && f < right)
        w = (right - f) / (right - center);
      fb(m, b) = static_cast<float>(w);
    }
  }
  return fb;
}

MelFrames mel_spectrogram(const AudioClip& clip, const AudioConfig& cfg) {
  if (clip.sample_rate != cfg.sample_rate)
    throw std::invalid_argument("mel_spectrogram: clip must be at the pipeline rate");
  if (static_cast<int>(clip.samples.size()) > cfg.max_clip_samples())
    throw std::invalid_argument("mel_spectrogram: clip longer than 30 s");
  int64_t n = static_cast<int64_t>(clip.samples.size());
  int64_t frames = n / cfg.hop;
  MelFrames out;
  if (frames == 0) {
    out.values = Tensor({0, cfg.mel_bins});
    return out;
  }

  // reflect-centered framing
  int half = cfg.window / 2;
  auto sample_at = [&](int64_t i) -> double {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    if (i < 0 || i >= n) return 0.0;  // degenerate tiny inputs
    return clip.samples[static_cast<size_t>(i)];
  };

  std::vector<double> hann(static_cast<size_t>(cfg.window));
  for (int i = 0; i < cfg.window; ++i)
    hann[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / cfg.window);

  Tensor fb = mel_filterbank(cfg);
  int bins = cfg.window / 2 + 1;
  out.values = Tensor({frames, cfg.mel_bins});

  std::vector<std::complex<double>> frame(static_cast<size_t>(cfg.window));
  std::vector<double> power(static_cast<size_t>(bins));
  double max_log = -1e300;
  for (int64_t t = 0; t < frames; ++t) {
    int64_t start = t * cfg.hop - half;
    for (int i = 0; i < cfg.window; ++i)
      frame[static_cast<size_t>(i)] = sample_at(start + i) * hann[static_cast<size_t>(i)];
    auto spec = fft(frame);
    for (int b = 0; b < bins; ++b) power[static_cast<size_t>(b)] = std::norm(spec[static_cast<size_t>(b)]);

    for (int m = 0; m < cfg.mel_bins; ++m) {
      double acc = 0.0;
      const float* fr = fb.row(m);
      for (int b = 0; b < bins; ++b) acc += fr[b] * power[static_cast<size_t>(b)];
      double lg = std::log10(std::max(acc, 1e-10));
      out.values(t, m) = static_cast<float>(lg);
      max_log = std::max(max_log, lg);
    }
  }

  // dynamic-range clamp of 8 decades under the per-clip max, then map the
  // usual operating range to roughly [-1, 1]
  for (auto& v : out.values.vec()) {
    double c = std::max(static_cast<double>(v), max_log - 8.0);
    v = static_cast<float>((c + 4.0) / 4.0);
  }
  return out;
}

EncoderWeights EncoderWeights::init(const AudioConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  EncoderWeights w;
  w.conv1_w = Tensor::randn({3 * cfg.mel_bins, cfg.feat}, rng, 0.05f);
  w.conv1_b = Tensor({cfg.feat});
  w.conv2_w = Tensor::randn({2 * cfg.feat, cfg.feat}, rng, 0.05f);
  w.conv2_b = Tensor({cfg.feat});
  w.blocks.push_back(nn::EncoderBlock::init(cfg.feat, cfg.enc_mlp, rng));
  w.blocks.push_back(nn::EncoderBlock::init(cfg.feat, cfg.enc_mlp, rng));
  return w;
}

void EncoderWeights::for_each(const std::string& prefix,
                              const std::function<void(const std::string&, Tensor&)>& fn) {
  fn(prefix + "conv1_w", conv1_w);
  fn(prefix + "conv1_b", conv1_b);
  fn(prefix + "conv2_w", conv2_w);
  fn(prefix + "conv2_b", conv2_b);
  for (size_t i = 0; i < blocks.size(); ++i)
    blocks[i].for_each(prefix + "block" + std::to_string(i) + ".", fn);
}

int64_t EncoderWeights::param_count() {
  int64_t n = 0;
  for_each("", [&n](const std::string&, Tensor& t) { n += t.numel(); });
  return n;
}

ProjectorWeights ProjectorWeights::init(const AudioConfig& cfg, uint64_t seed) {
  Rng rng(seed ^ 0xa0d10ull);
  ProjectorWeights w;
  w.weight = Tensor::randn({cfg.feat, cfg.hidden}, rng, 0.1f);
  w.bias = Tensor({cfg.hidden});
  return w;
}

void ProjectorWeights::for_each(const std::string& prefix,
                                const std::function<void(const std::string&, Tensor&)>& fn) {
  fn(prefix + "weight", weight);
  fn(prefix + "bias", bias);
}

int64_t ProjectorWeights::param_count() { return weight.numel() + bias.numel(); }

AudioWeights AudioWeights::init(const AudioConfig& cfg, uint64_t seed) {
  return {EncoderWeights::init(cfg, seed), ProjectorWeights::init(cfg, seed + 1)};
}

Tensor encode_clip(const AudioConfig& cfg, const EncoderWeights& w, const MelFrames& mel) {
  int64_t frames = mel.frames();
  if (frames < 2) throw std::invalid_argument("encode_clip: need at least 2 mel frames");
  int64_t M = cfg.mel_bins, F = cfg.feat;

  // conv1: kernel 3, stride 1, zero padded, GELU
  Tensor h1({frames, F});
  {
    Tensor window({1, 3 * M});
    Tensor out({1, F});
    for (int64_t t = 0; t < frames; ++t) {
      for (int dt = -1; dt <= 1; ++dt) {
        const float* src = (t + dt >= 0 && t + dt < frames) ? mel.values.row(t + dt) : nullptr;
        float* dst = window.row(0) + (dt + 1) * M;
        if (src)
          std::copy(src, src + M, dst);
        else
          std::fill(dst, dst + M, 0.0f);
      }
      nn::matmul(window, w.conv1_w, out);
      float* hr = h1.row(t);
      for (int64_t j = 0; j < F; ++j) hr[j] = nn::gelu(out(0, j) + w.conv1_b(j));
    }
  }

  // conv2: kernel 2, stride 2 -> floor(frames/2) states
  int64_t states = frames / 2;
  Tensor h2({states, F});
  {
    Tensor window({1, 2 * F});
    Tensor out({1, F});
    for (int64_t t = 0; t < states; ++t) {
      std::copy(h1.row(2 * t), h1.row(2 * t) + F, window.row(0));
      std::copy(h1.row(2 * t + 1), h1.row(2 * t + 1) + F, window.row(0) + F);
      nn::matmul(window, w.conv2_w, out);
      float* hr = h2.row(t);
      for (int64_t j = 0; j < F; ++j) hr[j] = nn::gelu(out(0, j) + w.conv2_b(j));
    }
  }

  // sinusoidal positions, then the transformer blocks
  for (int64_t t = 0; t < states; ++t) {
    float* hr = h2.row(t);
    for (int64_t j = 0; j + 1 < F; j += 2) {
      double freq = std::pow(10000.0, -static_cast<double>(j) / F);
      hr[j] += static_cast<float>(std::sin(t * freq));
      hr[j + 1] += static_cast<float>(std::cos(t * freq));
    }
  }
  for (const auto& block : w.blocks) block.apply(h2, cfg.enc_heads);
  nn::check_finite(h2, "audio encoder states");
  return h2;
}

Tensor project(const ProjectorWeights& w, const Tensor& states) {
  if (states.rank() != 2 || states.dim(0) < 1)
    throw std::invalid_argument("project: need at least one encoder state");
  Tensor out({states.dim(0), w.weight.dim(1)});
  nn::matmul(states, w.weight, out);
  nn::add_row_bias(out, w.bias);
  return out;
}

Tensor concat_clips(const std::vector<Tensor>& blocks) {
  if (blocks.empty()) return Tensor({0, 0});
  int64_t width = blocks[0].dim(1);
  int64_t total = 0;
  for (const auto& b : blocks) {
    if (b.dim(1) != width)
      throw std::invalid_argument("concat_clips: embedding width mismatch");
    total += b.dim(0);
  }
  Tensor out({total, width});
  int64_t row = 0;
  for (const auto& b : blocks) {
    std::copy(b.vec().begin(), b.vec().end(), out.row(row));
    row += b.dim(0);
  }
  return out;
}

int64_t token_count_for_samples(int64_t samples, const AudioConfig& cfg) {
  return (samples / cfg.hop) / 2;
}

Tensor encode_audio(const AudioConfig& cfg, const AudioWeights& w, std::span<const float> samples,
                    int sample_rate) {
  auto clips = segment_clips(samples, sample_rate, cfg);
  std::vector<Tensor> blocks;
  blocks.reserve(clips.size());
  for (const auto& clip : clips) {
    MelFrames mel = mel_spectrogram(clip, cfg);
    Tensor states = encode_clip(cfg, w.encoder, mel);
    blocks.push_back(project(w.projector, states));
  }
  return concat_clips(blocks);
}

}  // namespace omni::audio
