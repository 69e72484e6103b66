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

#include <complex>
#include <cstdint>
#include <vector>

#include "deepen/audio.hpp"

namespace deepen::dsp {

/// In-place iterative radix-2 FFT. data.size() must be a power of two.
/// The inverse transform includes the 1/N scaling.
void fft(std::vector<std::complex<double>>& data, bool inverse);

/// Magnitude spectrum of the (zero-padded) signal: bins 0..N/2 of an N-point
/// FFT where N is the smallest power of two >= n.
std::vector<double> magnitude_spectrum(const float* samples, size_t n);

/// Frequency (Hz) of the largest magnitude bin above DC.
double dominant_frequency_hz(const AudioClip& clip);

/// One second-order section, direct form II transposed, with optional
/// steady-state initialization so a constant input produces no onset
/// transient.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

  /// Filters the whole buffer; state starts at the steady state for x[0].
  void process(std::vector<float>& x) const;
};

/// Butterworth designs via the bilinear transform. `order` must be even;
/// the cascade uses the standard Butterworth pole Q values per section.
std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate_hz);
std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate_hz);

/// Applies a biquad cascade in place.
void filter_cascade(const std::vector<Biquad>& sections, std::vector<float>& x);

/// Phase-vocoder time stretch: output duration = input duration * factor,
/// pitch preserved. STFT with a 2048-sample Hann window at 75% overlap.
/// Output length is exactly round(n * factor).
std::vector<float> phase_vocoder_stretch(const std::vector<float>& input, double factor);

/// Geometric mean over arithmetic mean of the frame-averaged power spectrum
/// (bins above DC). Near 1 for white noise, near 0 for a pure tone.
double spectral_flatness(const AudioClip& clip);

/// Fraction of adjacent sample pairs whose signs differ.
double zero_crossing_rate(const AudioClip& clip);

/// Fraction of spectral power above the given frequency.
double high_band_energy_ratio(const AudioClip& clip, double split_hz);

}  // namespace deepen::dsp
