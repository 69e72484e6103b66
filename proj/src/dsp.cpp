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

#include "deepen/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deepen::dsp {

namespace {
constexpr double kPi = 3.14159265358979323846;

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> hann_window(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

double princarg(double phase) {
  return phase - 2.0 * kPi * std::round(phase / (2.0 * kPi));
}
}  // namespace

void fft(std::vector<std::complex<double>>& data, bool inverse) {
  const size_t n = data.size();
  if (n == 0) return;
  if ((n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of two");

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }

  if (inverse) {
    for (auto& c : data) c /= static_cast<double>(n);
  }
}

std::vector<double> magnitude_spectrum(const float* samples, size_t n) {
  const size_t fft_size = next_pow2(std::max<size_t>(n, 2));
  std::vector<std::complex<double>> buf(fft_size);
  for (size_t i = 0; i < n; ++i) buf[i] = samples[i];
  fft(buf, false);
  std::vector<double> mags(fft_size / 2 + 1);
  for (size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(buf[i]);
  return mags;
}

double dominant_frequency_hz(const AudioClip& clip) {
  if (clip.size() < 2) return 0.0;
  const auto mags = magnitude_spectrum(clip.samples.data(), clip.size());
  size_t best = 1;
  for (size_t i = 2; i + 1 < mags.size(); ++i) {
    if (mags[i] > mags[best]) best = i;
  }
  const size_t fft_size = (mags.size() - 1) * 2;
  return static_cast<double>(best) * clip.sample_rate_hz / static_cast<double>(fft_size);
}

void Biquad::process(std::vector<float>& x) const {
  // Steady-state initialization for x[0]: with a constant input held
  // forever, DF2T state values are
  //   s2 = (b2 - a2*g)*c,  s1 = (b1 - a1*g)*c + s2,  g = DC gain.
  const double denom = 1.0 + a1 + a2;
  const double g = denom != 0.0 ? (b0 + b1 + b2) / denom : 0.0;
  const double c = x.empty() ? 0.0 : static_cast<double>(x[0]);
  double s2 = (b2 - a2 * g) * c;
  double s1 = (b1 - a1 * g) * c + s2;

  for (auto& sample : x) {
    const double in = sample;
    const double out = b0 * in + s1;
    s1 = b1 * in - a1 * out + s2;
    s2 = b2 * in - a2 * out;
    sample = static_cast<float>(out);
  }
}

namespace {

// Q values of the analogue Butterworth pole pairs for an even-order cascade.
std::vector<double> butterworth_q(int order) {
  std::vector<double> q;
  for (int k = 0; k < order / 2; ++k) {
    q.push_back(1.0 / (2.0 * std::sin(kPi * (2.0 * k + 1.0) / (2.0 * order))));
  }
  return q;
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz) {
  if (order % 2 != 0 || order <= 0) throw std::invalid_argument("butterworth: order must be even");
  // Keep the prewarped frequency finite near Nyquist.
  const double fc = std::min(cutoff_hz, 0.45 * sample_rate_hz);
  const double k = std::tan(kPi * fc / sample_rate_hz);
  std::vector<Biquad> sections;
  for (double q : butterworth_q(order)) {
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad s;
    s.b0 = k * k * norm;
    s.b1 = 2.0 * s.b0;
    s.b2 = s.b0;
    s.a1 = 2.0 * (k * k - 1.0) * norm;
    s.a2 = (1.0 - k / q + k * k) * norm;
    sections.push_back(s);
  }
  return sections;
}

std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate_hz) {
  if (order % 2 != 0 || order <= 0) throw std::invalid_argument("butterworth: order must be even");
  const double fc = std::min(cutoff_hz, 0.45 * sample_rate_hz);
  const double k = std::tan(kPi * fc / sample_rate_hz);
  std::vector<Biquad> sections;
  for (double q : butterworth_q(order)) {
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad s;
    s.b0 = norm;
    s.b1 = -2.0 * norm;
    s.b2 = norm;
    s.a1 = 2.0 * (k * k - 1.0) * norm;
    s.a2 = (1.0 - k / q + k * k) * norm;
    sections.push_back(s);
  }
  return sections;
}

void filter_cascade(const std::vector<Biquad>& sections, std::vector<float>& x) {
  for (const auto& s : sections) s.process(x);
}

std::vector<float> phase_vocoder_stretch(const std::vector<float>& input, double factor) {
  constexpr size_t kWindow = 2048;
  constexpr size_t kHop = 512;  // 75% overlap
  const size_t out_len =
      static_cast<size_t>(std::llround(static_cast<double>(input.size()) * factor));
  if (input.size() < kWindow || out_len < kWindow || factor <= 0.0) {
    // Too short for STFT framing; resampling in the caller handles the rest.
    std::vector<float> out(out_len, 0.0f);
    const size_t n = std::min(out_len, input.size());
    std::copy(input.begin(), input.begin() + static_cast<long>(n), out.begin());
    return out;
  }

  const auto window = hann_window(kWindow);
  const size_t n_frames = (out_len - kWindow) / kHop + 2;
  const size_t bins = kWindow / 2 + 1;

  std::vector<double> prev_phase(bins, 0.0);
  std::vector<double> synth_phase(bins, 0.0);
  std::vector<double> ola(out_len + kWindow, 0.0);
  std::vector<double> ola_weight(out_len + kWindow, 0.0);

  std::vector<std::complex<double>> frame(kWindow);
  long prev_pos = 0;

  for (size_t f = 0; f < n_frames; ++f) {
    const auto analysis_pos =
        static_cast<long>(std::llround(static_cast<double>(f) * kHop / factor));
    const long hop_in = f == 0 ? static_cast<long>(kHop) : analysis_pos - prev_pos;
    prev_pos = analysis_pos;

    for (size_t i = 0; i < kWindow; ++i) {
      const long idx = analysis_pos + static_cast<long>(i);
      const double v =
          (idx >= 0 && idx < static_cast<long>(input.size())) ? input[static_cast<size_t>(idx)] : 0.0;
      frame[i] = v * window[i];
    }
    fft(frame, false);

    for (size_t b = 0; b < bins; ++b) {
      const double mag = std::abs(frame[b]);
      const double phase = std::arg(frame[b]);
      const double bin_freq = 2.0 * kPi * static_cast<double>(b) / kWindow;
      if (f == 0 || hop_in <= 0) {
        synth_phase[b] = phase;
      } else {
        const double expected = bin_freq * static_cast<double>(hop_in);
        const double deviation = princarg(phase - prev_phase[b] - expected);
        const double true_freq = bin_freq + deviation / static_cast<double>(hop_in);
        synth_phase[b] += true_freq * static_cast<double>(kHop);
      }
      prev_phase[b] = phase;
      frame[b] = std::polar(mag, synth_phase[b]);
    }
    // Rebuild the negative-frequency half for a real output frame.
    for (size_t b = bins; b < kWindow; ++b) frame[b] = std::conj(frame[kWindow - b]);

    fft(frame, true);
    const size_t out_pos = f * kHop;
    for (size_t i = 0; i < kWindow && out_pos + i < ola.size(); ++i) {
      ola[out_pos + i] += frame[i].real() * window[i];
      ola_weight[out_pos + i] += window[i] * window[i];
    }
  }

  std::vector<float> out(out_len);
  for (size_t i = 0; i < out_len; ++i) {
    out[i] = static_cast<float>(ola_weight[i] > 1e-9 ? ola[i] / ola_weight[i] : 0.0);
  }
  return out;
}

namespace {

// Frame-averaged power spectrum, 1024-point frames with 50% overlap.
std::vector<double> averaged_power_spectrum(const AudioClip& clip) {
  constexpr size_t kFrame = 1024;
  constexpr size_t kHop = 512;
  const auto window = hann_window(kFrame);

  std::vector<double> power(kFrame / 2 + 1, 0.0);
  size_t n_frames = 0;
  std::vector<std::complex<double>> buf(kFrame);
  for (size_t start = 0; start == 0 || start + kFrame <= clip.size(); start += kHop) {
    for (size_t i = 0; i < kFrame; ++i) {
      const double v = start + i < clip.size() ? clip.samples[start + i] : 0.0;
      buf[i] = v * window[i];
    }
    fft(buf, false);
    for (size_t b = 0; b < power.size(); ++b) power[b] += std::norm(buf[b]);
    ++n_frames;
    if (start + kFrame >= clip.size()) break;
  }
  for (auto& p : power) p /= static_cast<double>(std::max<size_t>(n_frames, 1));
  return power;
}

}  // namespace

double spectral_flatness(const AudioClip& clip) {
  if (clip.empty()) return 0.0;
  const auto power = averaged_power_spectrum(clip);
  double log_sum = 0.0;
  double sum = 0.0;
  size_t n = 0;
  for (size_t b = 1; b < power.size(); ++b) {
    const double p = std::max(power[b], 1e-30);
    log_sum += std::log(p);
    sum += p;
    ++n;
  }
  if (n == 0 || sum <= 0.0) return 0.0;
  return std::exp(log_sum / static_cast<double>(n)) / (sum / static_cast<double>(n));
}

double zero_crossing_rate(const AudioClip& clip) {
  if (clip.size() < 2) return 0.0;
  size_t crossings = 0;
  for (size_t i = 1; i < clip.size(); ++i) {
    if ((clip.samples[i - 1] >= 0.0f) != (clip.samples[i] >= 0.0f)) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(clip.size() - 1);
}

double high_band_energy_ratio(const AudioClip& clip, double split_hz) {
  if (clip.empty() || clip.sample_rate_hz <= 0) return 0.0;
  const auto power = averaged_power_spectrum(clip);
  const size_t fft_size = (power.size() - 1) * 2;
  double total = 0.0;
  double high = 0.0;
  for (size_t b = 1; b < power.size(); ++b) {
    const double freq = static_cast<double>(b) * clip.sample_rate_hz / static_cast<double>(fft_size);
    total += power[b];
    if (freq > split_hz) high += power[b];
  }
  return total > 0.0 ? high / total : 0.0;
}

}  // namespace deepen::dsp
