#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include "omni/audio.hpp"
#include "omni/rng.hpp"
#include "omni/wav.hpp"

using namespace omni::audio;
using omni::Rng;
using omni::Tensor;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<float> sine(double freq, double seconds, int rate, float amp = 0.5f) {
  std::vector<float> s(static_cast<size_t>(seconds * rate));
  for (size_t i = 0; i < s.size(); ++i)
    s[i] = amp * static_cast<float>(std::sin(2.0 * kPi * freq * i / rate));
  return s;
}

std::vector<float> noise(double seconds, int rate, uint64_t seed, float amp = 0.25f) {
  Rng rng(seed);
  std::vector<float> s(static_cast<size_t>(seconds * rate));
  for (auto& v : s) v = amp * static_cast<float>(rng.uniform(-1.0, 1.0));
  return s;
}

// plain O(n^2) DFT
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * kPi * double(k * t % n) / double(n));
    out[k] = acc;
  }
  return out;
}

// independent oracle for the whole mel pipeline: naive DFT + its own
// triangular filterbank built from the HTK mel formulas
Tensor oracle_mel(const AudioClip& clip, const AudioConfig& cfg) {
  int64_t n = static_cast<int64_t>(clip.samples.size());
  int64_t frames = n / cfg.hop;
  int bins = cfg.window / 2 + 1;
  int half = cfg.window / 2;

  auto mel_of = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz_of = [](double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); };
  std::vector<double> pts(static_cast<size_t>(cfg.mel_bins) + 2);
  for (size_t i = 0; i < pts.size(); ++i)
    pts[i] = hz_of(mel_of(cfg.fmax) * double(i) / double(cfg.mel_bins + 1));

  auto reflect = [&](int64_t i) -> double {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    return clip.samples[static_cast<size_t>(i)];
  };

  Tensor out({frames, cfg.mel_bins});
  double max_log = -1e300;
  for (int64_t t = 0; t < frames; ++t) {
    std::vector<std::complex<double>> frame(static_cast<size_t>(cfg.window));
    for (int i = 0; i < cfg.window; ++i) {
      double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * i / cfg.window);
      frame[static_cast<size_t>(i)] = reflect(t * cfg.hop - half + i) * hann;
    }
    auto spec = naive_dft(frame);
    for (int m = 0; m < cfg.mel_bins; ++m) {
      double acc = 0.0;
      for (int b = 0; b < bins; ++b) {
        double f = b * double(cfg.sample_rate) / cfg.window;
        double w = 0.0;
        if (f > pts[size_t(m)] && f < pts[size_t(m) + 1])
          w = (f - pts[size_t(m)]) / (pts[size_t(m) + 1] - pts[size_t(m)]);
        else if (f >= pts[size_t(m) + 1] && f < pts[size_t(m) + 2])
          w = (pts[size_t(m) + 2] - f) / (pts[size_t(m) + 2] - pts[size_t(m) + 1]);
        acc += w * std::norm(spec[static_cast<size_t>(b)]);
      }
      double lg = std::log10(std::max(acc, 1e-10));
      out(t, m) = static_cast<float>(lg);
      max_log = std::max(max_log, lg);
    }
  }
  for (auto& v : out.vec())
    v = static_cast<float>((std::max(double(v), max_log - 8.0) + 4.0) / 4.0);
  return out;
}

}  // namespace

TEST_CASE("fft: matches the naive DFT across sizes") {
  Rng rng(2);
  for (size_t n : {1u, 2u, 5u, 8u, 13u, 60u, 400u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.gauss(), rng.gauss()};
    auto fast = fft(x);
    auto slow = naive_dft(x);
    for (size_t i = 0; i < n; ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-9 * (1.0 + std::abs(slow[i])));
  }
}

TEST_CASE("segment_clips: stated splits") {
  auto clips75 = segment_clips(noise(75.0, 16000, 1), 16000);
  REQUIRE(clips75.size() == 3);
  CHECK(clips75[0].duration_s() == doctest::Approx(30.0));
  CHECK(clips75[1].duration_s() == doctest::Approx(30.0));
  CHECK(clips75[2].duration_s() == doctest::Approx(15.0));

  auto clips10 = segment_clips(noise(10.0, 16000, 2), 16000);
  REQUIRE(clips10.size() == 1);
  CHECK(clips10[0].duration_s() == doctest::Approx(10.0));

  auto clips30 = segment_clips(noise(30.0, 16000, 3), 16000);
  CHECK(clips30.size() == 1);  // exactly one window, no empty tail

  CHECK_THROWS_AS(segment_clips({}, 16000), std::invalid_argument);
}

TEST_CASE("segment_clips: resamples other rates to 16 kHz") {
  for (int rate : {8000, 22050, 44100, 48000}) {
    auto clips = segment_clips(noise(2.0, rate, 7), rate);
    REQUIRE(clips.size() == 1);
    CHECK(clips[0].sample_rate == 16000);
    CHECK(static_cast<int64_t>(clips[0].samples.size()) == 32000);
  }
}

TEST_CASE("mel: silence lands on the normalized floor") {
  AudioClip clip{std::vector<float>(16000, 0.0f), 16000};
  auto mel = mel_spectrogram(clip);
  CHECK(mel.frames() == 100);
  // log10(1e-10) = -10, clamp keeps it, (x+4)/4 = -1.5
  for (float v : mel.values.vec()) CHECK(v == doctest::Approx(-1.5f));
}

TEST_CASE("mel: frame counts follow floor(n / hop)") {
  AudioConfig cfg;
  AudioClip clip30{noise(30.0, 16000, 4), 16000};
  CHECK(mel_spectrogram(clip30).frames() == 3000);  // 480000 / 160
  AudioClip odd{std::vector<float>(1234, 0.1f), 16000};
  CHECK(mel_spectrogram(odd).frames() == 1234 / cfg.hop);
}

TEST_CASE("mel: 440 Hz tone peaks at the nearest mel filter") {
  AudioConfig cfg;
  AudioClip clip{sine(440.0, 1.0, 16000), 16000};
  auto mel = mel_spectrogram(clip, cfg);

  // nearest filter center to 440 Hz, from an independently built center list
  auto mel_of = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz_of = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  int expect = 0;
  double best = 1e300;
  for (int m = 0; m < cfg.mel_bins; ++m) {
    double center = hz_of(mel_of(8000.0) * (m + 1) / (cfg.mel_bins + 1));
    if (std::abs(center - 440.0) < best) {
      best = std::abs(center - 440.0);
      expect = m;
    }
  }
  // skip frames whose centered window crosses the clip edge: those measure
  // the reflection padding, not the tone
  int64_t n = static_cast<int64_t>(clip.samples.size());
  int interior = 0;
  for (int64_t t = 0; t < mel.frames(); ++t) {
    if (t * cfg.hop - cfg.window / 2 < 0 || t * cfg.hop + cfg.window / 2 > n) continue;
    ++interior;
    int arg = 0;
    for (int m = 1; m < cfg.mel_bins; ++m)
      if (mel.values(t, m) > mel.values(t, arg)) arg = m;
    CHECK(arg == expect);
  }
  CHECK(interior >= 90);
}

TEST_CASE("mel: matches the naive-DFT oracle on random clips") {
  AudioConfig cfg;
  for (uint64_t seed : {10ull, 11ull}) {
    AudioClip clip{noise(1.0, 16000, seed), 16000};
    auto got = mel_spectrogram(clip, cfg);
    auto expect = oracle_mel(clip, cfg);
    REQUIRE(got.values.numel() == expect.numel());
    double max_rel = 0.0;
    for (int64_t i = 0; i < got.values.numel(); ++i) {
      double a = got.values(i), b = expect(i);
      max_rel = std::max(max_rel, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}));
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("mel: doubling amplitude shifts every value by log10(4)/4") {
  auto samples = noise(1.0, 16000, 21, 0.2f);
  AudioClip a{samples, 16000};
  AudioClip b{samples, 16000};
  for (auto& v : b.samples) v *= 2.0f;
  auto ma = mel_spectrogram(a);
  auto mb = mel_spectrogram(b);
  const double shift = std::log10(4.0) / 4.0;  // power scales by 4
  for (int64_t i = 0; i < ma.values.numel(); ++i)
    CHECK(double(mb.values(i)) - ma.values(i) == doctest::Approx(shift).epsilon(1e-4));
}

TEST_CASE("encode_clip: stride-2 state counts") {
  AudioConfig cfg;
  auto w = EncoderWeights::init(cfg, 5);

  AudioClip clip{noise(2.0, 16000, 6), 16000};
  auto mel = mel_spectrogram(clip, cfg);
  REQUIRE(mel.frames() == 200);
  CHECK(encode_clip(cfg, w, mel).dim(0) == 100);

  // 2 frames -> 1 state
  AudioClip tiny{std::vector<float>(2 * cfg.hop, 0.1f), 16000};
  auto mel2 = mel_spectrogram(tiny, cfg);
  REQUIRE(mel2.frames() == 2);
  CHECK(encode_clip(cfg, w, mel2).dim(0) == 1);

  // fewer than 2 frames is invalid
  AudioClip sub{std::vector<float>(cfg.hop, 0.1f), 16000};
  CHECK_THROWS_AS(encode_clip(cfg, w, mel_spectrogram(sub, cfg)), std::invalid_argument);
}

TEST_CASE("project: affine map and stated edge cases") {
  AudioConfig cfg;
  auto w = ProjectorWeights::init(cfg, 9);
  // zero weights, nonzero bias -> every token equals the bias
  for (auto& v : w.weight.vec()) v = 0.0f;
  for (int64_t i = 0; i < cfg.hidden; ++i) w.bias(i) = static_cast<float>(i) * 0.5f;
  Tensor states({7, cfg.feat});
  for (auto& v : states.vec()) v = 1.0f;
  Tensor tokens = project(w, states);
  REQUIRE(tokens.dim(0) == 7);
  for (int64_t t = 0; t < 7; ++t)
    for (int64_t j = 0; j < cfg.hidden; ++j) CHECK(tokens(t, j) == w.bias(j));
  CHECK_THROWS_AS(project(w, Tensor({0, cfg.feat})), std::invalid_argument);
}

TEST_CASE("concat_clips: in-order concatenation") {
  Tensor a({2, 4}), b({3, 4});
  for (int64_t i = 0; i < a.numel(); ++i) a(i) = 1.0f;
  for (int64_t i = 0; i < b.numel(); ++i) b(i) = 2.0f;
  Tensor cat = concat_clips({a, b});
  REQUIRE(cat.dim(0) == 5);
  CHECK(cat(0, 0) == 1.0f);
  CHECK(cat(2, 0) == 2.0f);

  Tensor single = concat_clips({b});
  CHECK(single.dim(0) == 3);
  CHECK(concat_clips({}).numel() == 0);

  Tensor wrong({1, 5});
  CHECK_THROWS_AS(concat_clips({a, wrong}), std::invalid_argument);
}

TEST_CASE("rate law: 50 tokens per second") {
  AudioConfig cfg;
  // arithmetic law across d = 0.5 .. 30 in half-second steps
  for (int half_steps = 1; half_steps <= 60; ++half_steps) {
    double d = half_steps * 0.5;
    int64_t samples = static_cast<int64_t>(d * 16000);
    int64_t expect = (samples / 160) / 2;
    CHECK(token_count_for_samples(samples, cfg) == expect);
    if (half_steps % 2 == 0) CHECK(expect == 25 * half_steps);  // 50 * d for integer d
  }

  // end-to-end shape for a couple of cheap durations
  auto w = AudioWeights::init(cfg, 31);
  CHECK(encode_audio(cfg, w, noise(1.0, 16000, 32), 16000).dim(0) == 50);
  CHECK(encode_audio(cfg, w, noise(2.5, 16000, 33), 16000).dim(0) == 125);
}

TEST_CASE("segment -> encode -> project -> concat over 75 s yields 3750 tokens") {
  AudioConfig cfg;
  auto w = AudioWeights::init(cfg, 41);
  Tensor tokens = encode_audio(cfg, w, noise(75.0, 16000, 42), 16000);
  CHECK(tokens.dim(0) == 3750);
  CHECK(tokens.dim(1) == cfg.hidden);
}

TEST_CASE("wav: 16-bit PCM round trip, stereo downmix") {
  auto dir = std::filesystem::temp_directory_path() / "omni_audio_test";
  std::filesystem::create_directories(dir);
  auto samples = sine(440.0, 0.25, 16000);
  omni::wav::write_wav(dir / "tone.wav", samples, 16000);
  auto back = omni::wav::read_wav(dir / "tone.wav");
  REQUIRE(back.sample_rate == 16000);
  REQUIRE(back.samples.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    CHECK(std::abs(back.samples[i] - samples[i]) < 1.0f / 32000.0f);
}
