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

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace deepen {

/// Mono PCM buffer, float amplitudes nominally in [-1, 1]; values are only
/// clamped when written out as 16-bit PCM.
struct AudioClip {
  std::vector<float> samples;
  int sample_rate_hz = 0;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

struct AudioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File does not exist or cannot be opened/written.
struct AudioFileError : AudioError {
  using AudioError::AudioError;
};

/// Not a RIFF/WAVE file, or the header is truncated/inconsistent.
struct WavFormatError : AudioError {
  using AudioError::AudioError;
};

/// Valid WAV, but a codec other than integer PCM16 / float32.
struct UnsupportedCodecError : AudioError {
  using AudioError::AudioError;
};

/// Reads a RIFF/WAVE file holding 16-bit integer or 32-bit float PCM.
/// Multi-channel input is downmixed to mono by averaging the channels;
/// 16-bit samples are scaled by 1/32768 into [-1, 1).
AudioClip read_wav(const std::string& path);

/// Writes 16-bit PCM mono. Samples are clamped to [-1, 1] before
/// quantization. The header is fixed-layout: 16-byte fmt chunk, data chunk
/// sized exactly to the payload.
void write_wav(const AudioClip& clip, const std::string& path);

/// Mean squared amplitude: (1/n) * sum(s_i^2). Zero for an empty clip.
/// Despite the name this is the power, not its square root; the SNR math
/// below works directly in power terms.
double rms_power(const AudioClip& clip);

/// signal + g * interferer, with g chosen so the signal-to-interferer power
/// ratio is 10^(snr_db/10). The interferer is resampled to the signal's rate
/// if needed and looped or truncated to the signal's length. Output samples
/// are clamped to [-1, 1].
///
/// Throws AudioError for a zero-power interferer or zero-power signal (SNR
/// undefined in both cases).
AudioClip mix_at_snr(const AudioClip& signal, const AudioClip& interferer, double snr_db);

/// Band-limited resampling (Kaiser-windowed sinc, 64 taps). Output length is
/// round(n * target/source); an identity rate change returns the input
/// samples untouched.
AudioClip resample(const AudioClip& clip, int target_rate_hz);

/// Same kernel at an arbitrary ratio, keeping the declared sample rate:
/// output length = round(n * ratio). Played at the original rate the result
/// is the input sped up by 1/ratio. Ratio 1 returns the input untouched.
AudioClip resample_by_ratio(const AudioClip& clip, double ratio);

inline float clamp_sample(float v) { return v < -1.0f ? -1.0f : (v > 1.0f ? 1.0f : v); }

}  // namespace deepen
