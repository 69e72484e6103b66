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

#include "deepen/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace deepen {
namespace {

constexpr uint16_t kFormatPcm = 0x1;
constexpr uint16_t kFormatIeeeFloat = 0x3;

uint16_t read_u16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t read_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}
void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

}  // namespace

AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) throw AudioFileError("no such file: " + path);
    throw AudioFileError("cannot open: " + path);
  }
  std::error_code size_ec;
  const auto file_size = std::filesystem::file_size(path, size_ec);

  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12) || std::memcmp(riff, "RIFF", 4) != 0 ||
      std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw WavFormatError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format_tag = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
  bool have_fmt = false;
  std::vector<unsigned char> data;
  bool have_data = false;

  // Walk the chunk list; chunks other than fmt/data are skipped.
  unsigned char hdr[8];
  while (in.read(reinterpret_cast<char*>(hdr), 8)) {
    const uint32_t chunk_size = read_u32(hdr + 4);
    if (!size_ec && chunk_size > file_size) {
      throw WavFormatError("chunk larger than file: " + path);
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw WavFormatError("fmt chunk too small: " + path);
      std::vector<unsigned char> fmt(chunk_size);
      if (!in.read(reinterpret_cast<char*>(fmt.data()), chunk_size)) {
        throw WavFormatError("truncated fmt chunk: " + path);
      }
      format_tag = read_u16(fmt.data());
      channels = read_u16(fmt.data() + 2);
      sample_rate = read_u32(fmt.data() + 4);
      bits_per_sample = read_u16(fmt.data() + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data.resize(chunk_size);
      if (chunk_size > 0 && !in.read(reinterpret_cast<char*>(data.data()), chunk_size)) {
        throw WavFormatError("truncated data chunk: " + path);
      }
      have_data = true;
    } else {
      in.seekg(chunk_size, std::ios::cur);
    }
    if (chunk_size % 2 == 1) in.seekg(1, std::ios::cur);  // RIFF pads to even
  }

  if (!have_fmt || !have_data) throw WavFormatError("missing fmt or data chunk: " + path);
  if (channels == 0 || sample_rate == 0) throw WavFormatError("bad fmt fields: " + path);

  const bool pcm16 = format_tag == kFormatPcm && bits_per_sample == 16;
  const bool f32 = format_tag == kFormatIeeeFloat && bits_per_sample == 32;
  if (!pcm16 && !f32) {
    throw UnsupportedCodecError("unsupported codec (tag=" + std::to_string(format_tag) +
                                ", bits=" + std::to_string(bits_per_sample) + "): " + path);
  }

  const size_t bytes_per_sample = bits_per_sample / 8;
  const size_t frame_bytes = bytes_per_sample * channels;
  const size_t frames = frame_bytes > 0 ? data.size() / frame_bytes : 0;

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(sample_rate);
  clip.samples.resize(frames);
  for (size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data.data() + f * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        const auto v = static_cast<int16_t>(read_u16(p));
        acc += v / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        acc += v;
      }
    }
    clip.samples[f] = static_cast<float>(acc / channels);
  }
  return clip;
}

void write_wav(const AudioClip& clip, const std::string& path) {
  if (clip.sample_rate_hz <= 0) throw AudioError("write_wav: sample rate must be positive");
  const uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  put_u32(out, 36 + data_bytes);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<uint32_t>(clip.sample_rate_hz));
  put_u32(out, static_cast<uint32_t>(clip.sample_rate_hz) * 2);  // byte rate
  put_u16(out, 2);                                               // block align
  put_u16(out, 16);                                              // bits per sample
  out.append("data");
  put_u32(out, data_bytes);
  for (float s : clip.samples) {
    const float c = clamp_sample(s);
    // Same 1/32768 scale as the reader, so a round trip stays within 1 LSB.
    auto q = static_cast<long>(std::lrint(c * 32768.0));
    if (q > 32767) q = 32767;
    if (q < -32768) q = -32768;
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
  }

  // Temp-and-rename so a crash never leaves a truncated file behind.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw AudioFileError("cannot write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw AudioFileError("write failed: " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw AudioFileError("cannot write: " + path + " (" + ec.message() + ")");
}

double rms_power(const AudioClip& clip) {
  if (clip.samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : clip.samples) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(clip.samples.size());
}

AudioClip mix_at_snr(const AudioClip& signal, const AudioClip& interferer, double snr_db) {
  const double p_sig = rms_power(signal);
  if (p_sig <= 0.0) throw AudioError("mix_at_snr: zero-power signal, SNR undefined");

  AudioClip noise = interferer;
  if (noise.sample_rate_hz != signal.sample_rate_hz) {
    noise = resample(noise, signal.sample_rate_hz);
  }
  if (noise.empty() || rms_power(noise) <= 0.0) {
    throw AudioError("mix_at_snr: zero-power interferer");
  }

  // Loop or truncate the interferer to the signal length.
  std::vector<float> tiled(signal.size());
  for (size_t i = 0; i < tiled.size(); ++i) tiled[i] = noise.samples[i % noise.size()];

  double p_noise = 0.0;
  for (float s : tiled) p_noise += static_cast<double>(s) * s;
  p_noise /= tiled.empty() ? 1.0 : static_cast<double>(tiled.size());
  if (p_noise <= 0.0) throw AudioError("mix_at_snr: zero-power interferer");

  const double target_noise_power = p_sig / std::pow(10.0, snr_db / 10.0);
  const double gain = std::sqrt(target_noise_power / p_noise);

  AudioClip out;
  out.sample_rate_hz = signal.sample_rate_hz;
  out.samples.resize(signal.size());
  for (size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = clamp_sample(signal.samples[i] + static_cast<float>(gain * tiled[i]));
  }
  return out;
}

namespace {

// Zeroth-order modified Bessel function, power series. Converges fast for
// the beta values used by the Kaiser window.
double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

constexpr int kHalfTaps = 32;  // 64-tap kernel
constexpr double kKaiserBeta = 8.0;

// Kaiser window sampled on |u| in [0, 1], linearly interpolated at use.
// The window is smooth, so 4096 points are far below the PCM noise floor.
const std::vector<double>& kaiser_table() {
  static const std::vector<double> table = [] {
    constexpr int n = 4097;
    std::vector<double> t(n);
    const double i0_beta = bessel_i0(kKaiserBeta);
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / (n - 1);
      t[i] = bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) / i0_beta;
    }
    return t;
  }();
  return table;
}

double kaiser_window(double u) {
  const auto& table = kaiser_table();
  const double a = std::fabs(u) * (table.size() - 1);
  const auto i = static_cast<size_t>(a);
  if (i + 1 >= table.size()) return 0.0;
  const double frac = a - static_cast<double>(i);
  return table[i] * (1.0 - frac) + table[i + 1] * frac;
}

}  // namespace

AudioClip resample_by_ratio(const AudioClip& clip, double ratio) {
  if (!(ratio > 0.0)) throw AudioError("resample: ratio must be positive");
  if (ratio == 1.0 || clip.empty()) return clip;

  const auto out_len = static_cast<size_t>(std::llround(static_cast<double>(clip.size()) * ratio));
  const double cutoff = 0.5 * std::min(1.0, ratio);  // cycles per input sample
  const auto n_in = static_cast<long>(clip.size());
  constexpr double kPi = 3.14159265358979323846;

  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.resize(out_len);
  for (size_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) / ratio;  // position in input samples
    const long j0 = static_cast<long>(std::ceil(t)) - kHalfTaps;
    double acc = 0.0;
    double wsum = 0.0;
    for (long j = j0; j < j0 + 2 * kHalfTaps; ++j) {
      const double d = t - static_cast<double>(j);
      const double u = d / kHalfTaps;
      if (u <= -1.0 || u >= 1.0) continue;
      const double x = 2.0 * cutoff * d;
      const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
      const double w = 2.0 * cutoff * sinc * kaiser_window(u);
      wsum += w;
      if (j >= 0 && j < n_in) acc += w * clip.samples[static_cast<size_t>(j)];
    }
    out.samples[n] = static_cast<float>(wsum != 0.0 ? acc / wsum : 0.0);
  }
  return out;
}

AudioClip resample(const AudioClip& clip, int target_rate_hz) {
  if (target_rate_hz <= 0) throw AudioError("resample: target rate must be positive");
  if (clip.sample_rate_hz <= 0) throw AudioError("resample: clip has no sample rate");
  AudioClip out = resample_by_ratio(
      clip, static_cast<double>(target_rate_hz) / clip.sample_rate_hz);
  out.sample_rate_hz = target_rate_hz;
  return out;
}

}  // namespace deepen
