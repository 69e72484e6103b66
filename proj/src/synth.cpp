// Copyright 2026 The deepen authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "deepen/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "deepen/io_util.hpp"
#include "deepen/rng.hpp"

namespace deepen {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::string numbered(const char* stem, size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.wav", stem, i);
  return buf;
}
}  // namespace

AudioClip synth_voiced_clip(uint64_t seed, size_t n_samples, int sample_rate_hz) {
  Rng rng(seed);
  const double f0 = rng.uniform_real(120.0, 280.0);
  const double am_hz = rng.uniform_real(2.0, 6.0);
  const double tilt = rng.uniform_real(0.5, 0.9);  // harmonic rolloff

  AudioClip clip;
  clip.sample_rate_hz = sample_rate_hz;
  clip.samples.resize(n_samples);
  const int harmonics = 8;
  for (size_t i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    double v = 0.0;
    double amp = 1.0;
    for (int h = 1; h <= harmonics; ++h) {
      v += amp * std::sin(2.0 * kPi * f0 * h * t);
      amp *= tilt;
    }
    const double envelope = 0.7 + 0.3 * std::sin(2.0 * kPi * am_hz * t);
    clip.samples[i] = static_cast<float>(0.12 * envelope * v + 0.002 * rng.next_gaussian());
  }
  return clip;
}

AudioClip synth_noisy_clip(uint64_t seed, size_t n_samples, int sample_rate_hz) {
  Rng rng(seed);
  const double tone_hz = rng.uniform_real(300.0, 3000.0);

  AudioClip clip;
  clip.sample_rate_hz = sample_rate_hz;
  clip.samples.resize(n_samples);
  double pink = 0.0;
  for (size_t i = 0; i < n_samples; ++i) {
    const double white = rng.next_gaussian();
    pink = 0.98 * pink + 0.02 * white;  // crude low-shelf tilt
    const double t = static_cast<double>(i) / sample_rate_hz;
    clip.samples[i] = static_cast<float>(0.22 * white + 0.6 * pink +
                                         0.03 * std::sin(2.0 * kPi * tone_hz * t));
  }
  return clip;
}

std::string generate_synthetic_corpus(const std::string& dir, size_t n_per_class, uint64_t seed,
                                      size_t n_samples, int sample_rate_hz) {
  std::filesystem::create_directories(dir);
  std::string index;
  for (size_t i = 0; i < n_per_class; ++i) {
    const std::string name = numbered("bonafide", i);
    write_wav(synth_voiced_clip(fnv1a64_append(fnv1a64_append(seed, uint64_t{0}), i), n_samples,
                                sample_rate_hz),
              dir + "/" + name);
    index += name + ",bonafide\n";
  }
  for (size_t i = 0; i < n_per_class; ++i) {
    const std::string name = numbered("spoof", i);
    write_wav(synth_noisy_clip(fnv1a64_append(fnv1a64_append(seed, uint64_t{1}), i), n_samples,
                               sample_rate_hz),
              dir + "/" + name);
    index += name + ",spoof\n";
  }
  const std::string index_path = dir + "/index.csv";
  atomic_write_file(index_path, index);
  return index_path;
}

void generate_synthetic_assets(const std::string& music_dir, const std::string& noise_dir,
                               uint64_t seed, int sample_rate_hz) {
  std::filesystem::create_directories(music_dir);
  std::filesystem::create_directories(noise_dir);
  const size_t n = static_cast<size_t>(sample_rate_hz) * 2;  // 2 s loops

  // Three chord loops.
  const double chords[3][3] = {{220.0, 277.18, 329.63},
                               {196.0, 246.94, 293.66},
                               {174.61, 220.0, 261.63}};
  for (int c = 0; c < 3; ++c) {
    AudioClip clip;
    clip.sample_rate_hz = sample_rate_hz;
    clip.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate_hz;
      const double beat = 0.55 + 0.45 * std::cos(2.0 * kPi * 2.0 * t);
      double v = 0.0;
      for (double f : chords[c]) v += std::sin(2.0 * kPi * f * t) + 0.4 * std::sin(2.0 * kPi * 2.0 * f * t);
      clip.samples[i] = static_cast<float>(0.1 * beat * v);
    }
    write_wav(clip, music_dir + "/" + numbered("music", static_cast<size_t>(c)));
  }

  // White, pink-ish, and brown-ish noise beds.
  for (int kind = 0; kind < 3; ++kind) {
    Rng rng(fnv1a64_append(fnv1a64_append(seed, std::string_view("asset_noise")),
                           static_cast<uint64_t>(kind)));
    AudioClip clip;
    clip.sample_rate_hz = sample_rate_hz;
    clip.samples.resize(n);
    double state = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double white = rng.next_gaussian();
      double v = 0.0;
      if (kind == 0) {
        v = 0.25 * white;
      } else if (kind == 1) {
        state = 0.95 * state + 0.05 * white;
        v = 0.15 * white + 2.0 * state;
      } else {
        state = 0.997 * state + 0.02 * white;
        v = 4.0 * state;
      }
      clip.samples[i] = static_cast<float>(v * 0.4);
    }
    write_wav(clip, noise_dir + "/" + numbered("noise", static_cast<size_t>(kind)));
  }
}

}  // namespace deepen
