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

#include "deepen/attack.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "deepen/dsp.hpp"
#include "deepen/rng.hpp"

namespace deepen {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Stream separator so apply-time randomness never replays the draws that
// sample_params consumed from the same seed.
constexpr uint64_t kApplyStream = 0x517CC1B727220A95ULL;

double require_param(const AttackParams& p, const std::string& key) {
  auto it = p.values.find(key);
  if (it == p.values.end()) {
    throw RegistryError("attack " + p.attack_name + ": missing parameter " + key);
  }
  return it->second;
}

size_t delay_samples(double delay_ms, int sample_rate_hz) {
  return static_cast<size_t>(std::llround(delay_ms / 1000.0 * sample_rate_hz));
}

// --- individual attacks ------------------------------------------------

ApplyResult attack_background(const AttackParams& p, const AudioClip& clip,
                              const AssetStore& assets, bool music) {
  if (music ? !assets.has_music() : !assets.has_noise()) {
    throw AudioError("attack " + p.attack_name + ": missing " +
                     std::string(music ? "music" : "noise") + " asset directory");
  }
  if (clip.empty() || rms_power(clip) <= 0.0) return {clip, true};
  const size_t count = music ? assets.music_count() : assets.noise_count();
  auto idx = static_cast<size_t>(require_param(p, "asset_pick") * static_cast<double>(count));
  if (idx >= count) idx = count - 1;
  const AudioClip& bed = music ? assets.music(idx) : assets.noise(idx);
  return {mix_at_snr(clip, bed, require_param(p, "snr_db")), false};
}

ApplyResult attack_gaussian_noise(const AttackParams& p, const AudioClip& clip) {
  const double p_sig = rms_power(clip);
  if (clip.empty() || p_sig <= 0.0) return {clip, true};

  Rng rng(p.seed ^ kApplyStream);
  std::vector<double> noise(clip.size());
  double p_noise = 0.0;
  for (auto& v : noise) {
    v = rng.next_gaussian();
    p_noise += v * v;
  }
  p_noise /= static_cast<double>(noise.size());

  const double snr_db = require_param(p, "snr_db");
  const double gain = std::sqrt(p_sig / (std::pow(10.0, snr_db / 10.0) * p_noise));

  AudioClip out = clip;
  for (size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = static_cast<float>(out.samples[i] + gain * noise[i]);
  }
  return {out, false};
}

ApplyResult attack_time_stretch(const AttackParams& p, const AudioClip& clip) {
  if (clip.empty()) return {clip, true};
  const double rate = require_param(p, "rate");
  AudioClip out = resample_by_ratio(clip, 1.0 / rate);
  return {out, false};
}

ApplyResult attack_pitch_shift(const AttackParams& p, const AudioClip& clip) {
  constexpr double kMinLen = 2048;  // one full analysis window
  const double semitones =
      require_param(p, "direction") * require_param(p, "semitones_abs");
  const double factor = std::pow(2.0, semitones / 12.0);
  // Both the input and the stretched intermediate must fill a window.
  if (static_cast<double>(clip.size()) < kMinLen ||
      static_cast<double>(clip.size()) * factor < kMinLen) {
    return {clip, true};
  }

  AudioClip stretched;
  stretched.sample_rate_hz = clip.sample_rate_hz;
  stretched.samples = dsp::phase_vocoder_stretch(clip.samples, factor);
  return {resample_by_ratio(stretched, 1.0 / factor), false};
}

ApplyResult attack_high_pass(const AttackParams& p, const AudioClip& clip) {
  if (clip.empty()) return {clip, true};
  AudioClip out = clip;
  dsp::filter_cascade(
      dsp::butterworth_highpass(4, require_param(p, "cutoff_hz"), clip.sample_rate_hz),
      out.samples);
  return {out, false};
}

ApplyResult attack_low_pass(const AttackParams& p, const AudioClip& clip) {
  if (clip.empty()) return {clip, true};
  AudioClip out = clip;
  dsp::filter_cascade(
      dsp::butterworth_lowpass(4, require_param(p, "cutoff_hz"), clip.sample_rate_hz),
      out.samples);
  return {out, false};
}

ApplyResult attack_band_pass(const AttackParams& p, const AudioClip& clip) {
  if (clip.empty()) return {clip, true};
  AudioClip out = clip;
  dsp::filter_cascade(
      dsp::butterworth_highpass(4, require_param(p, "low_hz"), clip.sample_rate_hz), out.samples);
  dsp::filter_cascade(
      dsp::butterworth_lowpass(4, require_param(p, "high_hz"), clip.sample_rate_hz), out.samples);
  return {out, false};
}

ApplyResult attack_silence_injection(const AttackParams& p, const AudioClip& clip) {
  if (clip.empty()) return {clip, true};
  const auto count = static_cast<size_t>(require_param(p, "count"));

  // Positions and per-segment lengths come from the apply stream, drawn in
  // a fixed order: (position, length) per segment.
  Rng rng(p.seed ^ kApplyStream);
  std::vector<std::pair<size_t, size_t>> inserts;  // (position, length)
  for (size_t i = 0; i < count; ++i) {
    auto pos = static_cast<size_t>(rng.next_unit() * static_cast<double>(clip.size() + 1));
    if (pos > clip.size()) pos = clip.size();
    const double len_ms = rng.uniform_real(100.0, 500.0);
    inserts.emplace_back(pos, delay_samples(len_ms, clip.sample_rate_hz));
  }
  std::sort(inserts.begin(), inserts.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  AudioClip out = clip;
  for (const auto& [pos, len] : inserts) {
    out.samples.insert(out.samples.begin() + static_cast<long>(pos), len, 0.0f);
  }
  return {out, false};
}

ApplyResult attack_bit_depth(const AttackParams& p, const AudioClip& clip) {
  if (clip.empty()) return {clip, true};
  const auto bits = static_cast<int>(require_param(p, "bits"));
  const double step = std::pow(2.0, 1 - bits);  // 2 / 2^bits
  const auto max_level = static_cast<long>(1) << (bits - 1);

  AudioClip out = clip;
  for (auto& s : out.samples) {
    auto level = static_cast<long>(std::floor(clamp_sample(s) / step));
    if (level >= max_level) level = max_level - 1;
    if (level < -max_level) level = -max_level;
    s = static_cast<float>(step * (static_cast<double>(level) + 0.5));
  }
  return {out, false};
}

ApplyResult attack_frequency_plus(const AttackParams& p, const AudioClip& clip) {
  const double p_sig = rms_power(clip);
  if (clip.empty() || p_sig <= 0.0) return {clip, true};

  const double freq = require_param(p, "freq_hz");
  const double snr_db = require_param(p, "snr_db");
  const double amp = std::sqrt(2.0 * p_sig / std::pow(10.0, snr_db / 10.0));
  Rng rng(p.seed ^ kApplyStream);
  const double phase = rng.uniform_real(0.0, 2.0 * kPi);

  AudioClip out = clip;
  const double w = 2.0 * kPi * freq / clip.sample_rate_hz;
  for (size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] =
        static_cast<float>(out.samples[i] + amp * std::sin(w * static_cast<double>(i) + phase));
  }
  return {out, false};
}

ApplyResult attack_echo(const AttackParams& p, const AudioClip& clip) {
  const size_t d = delay_samples(require_param(p, "delay_ms"), clip.sample_rate_hz);
  if (clip.empty() || d >= clip.size()) return {clip, true};
  const double decay = require_param(p, "decay");

  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.resize(clip.size() + d, 0.0f);
  for (size_t i = 0; i < clip.size(); ++i) out.samples[i] = clip.samples[i];
  for (size_t i = 0; i < clip.size(); ++i) {
    out.samples[i + d] = static_cast<float>(out.samples[i + d] + decay * clip.samples[i]);
  }
  return {out, false};
}

ApplyResult attack_reverberation(const AttackParams& p, const AudioClip& clip) {
  if (clip.empty()) return {clip, true};
  const double rt60 = require_param(p, "rt60_s");
  const auto ir_len = static_cast<size_t>(std::llround(rt60 * clip.sample_rate_hz));
  if (ir_len < 2) return {clip, true};

  // Unit direct path plus an exponentially decaying noise tail (-60 dB at
  // RT60), the whole response normalized to unit energy.
  Rng rng(p.seed ^ kApplyStream);
  std::vector<double> ir(ir_len);
  ir[0] = 1.0;
  double tail_energy = 0.0;
  for (size_t n = 1; n < ir_len; ++n) {
    const double env = std::exp(-6.907755 * static_cast<double>(n) /
                                (rt60 * clip.sample_rate_hz));
    ir[n] = rng.next_gaussian() * env;
    tail_energy += ir[n] * ir[n];
  }
  if (tail_energy > 0.0) {
    const double g = 1.0 / std::sqrt(tail_energy);  // tail energy == direct energy
    for (size_t n = 1; n < ir_len; ++n) ir[n] *= g;
  }
  const double norm = std::sqrt(2.0);  // total response energy is 2

  // FFT convolution, truncated back to the input length.
  size_t fft_size = 1;
  while (fft_size < clip.size() + ir_len) fft_size <<= 1;
  std::vector<std::complex<double>> a(fft_size), b(fft_size);
  for (size_t i = 0; i < clip.size(); ++i) a[i] = clip.samples[i];
  for (size_t i = 0; i < ir_len; ++i) b[i] = ir[i];
  dsp::fft(a, false);
  dsp::fft(b, false);
  for (size_t i = 0; i < fft_size; ++i) a[i] *= b[i];
  dsp::fft(a, true);

  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.resize(clip.size());
  for (size_t i = 0; i < clip.size(); ++i) {
    out.samples[i] = static_cast<float>(a[i].real() / norm);
  }
  return {out, false};
}

ApplyResult attack_amplitude_clipping(const AttackParams& p, const AudioClip& clip) {
  float peak = 0.0f;
  for (float s : clip.samples) peak = std::max(peak, std::fabs(s));
  if (clip.empty() || peak <= 0.0f) return {clip, true};

  const auto limit = static_cast<float>(require_param(p, "threshold") * peak);
  AudioClip out = clip;
  for (auto& s : out.samples) s = std::clamp(s, -limit, limit);
  return {out, false};
}

ApplyResult attack_resample_round_trip(const AttackParams& p, const AudioClip& clip) {
  if (clip.size() < 8) return {clip, true};
  const auto low_rate = static_cast<int>(require_param(p, "rate_hz"));
  return {resample(resample(clip, low_rate), clip.sample_rate_hz), false};
}

ApplyResult attack_gain_change(const AttackParams& p, const AudioClip& clip) {
  if (clip.empty()) return {clip, true};
  const double gain_db = require_param(p, "direction") * require_param(p, "gain_db");
  const double factor = std::pow(10.0, gain_db / 20.0);
  AudioClip out = clip;
  for (auto& s : out.samples) s = clamp_sample(static_cast<float>(s * factor));
  return {out, false};
}

ApplyResult attack_trim_edges(const AttackParams& p, const AudioClip& clip) {
  if (clip.size() < 10) return {clip, true};
  const auto head = static_cast<size_t>(
      std::llround(clip.size() * require_param(p, "head_pct") / 100.0));
  const auto tail = static_cast<size_t>(
      std::llround(clip.size() * require_param(p, "tail_pct") / 100.0));

  AudioClip out;
  out.sample_rate_hz = clip.sample_rate_hz;
  out.samples.assign(clip.samples.begin() + static_cast<long>(head),
                     clip.samples.end() - static_cast<long>(tail));
  return {out, false};
}

}  // namespace

std::string to_string(Provenance p) {
  return p == Provenance::PaperNamed ? "paper-named" : "registry-fill";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "paper-named") return Provenance::PaperNamed;
  if (s == "registry-fill") return Provenance::RegistryFill;
  throw RegistryError("unknown provenance: " + s);
}

AssetStore AssetStore::from_dirs(const std::string& music_dir, const std::string& noise_dir) {
  auto load_dir = [](const std::string& dir) {
    std::vector<AudioClip> clips;
    if (dir.empty()) return clips;
    if (!std::filesystem::is_directory(dir)) {
      throw AudioError("asset directory not found: " + dir);
    }
    std::vector<std::string> paths;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".wav") {
        paths.push_back(e.path().string());
      }
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) clips.push_back(read_wav(p));
    return clips;
  };
  AssetStore store;
  store.music_ = load_dir(music_dir);
  store.noise_ = load_dir(noise_dir);
  return store;
}

void AttackRegistry::add(AttackSpec spec) { specs_.push_back(std::move(spec)); }

void AttackRegistry::validate() const {
  for (size_t i = 0; i < specs_.size(); ++i) {
    const auto& spec = specs_[i];
    if (spec.name.empty()) throw RegistryError("registry: empty attack name");
    for (size_t j = i + 1; j < specs_.size(); ++j) {
      if (specs_[j].name == spec.name) {
        throw RegistryError("registry: duplicate attack name: " + spec.name);
      }
    }
    for (const auto& [key, range] : spec.param_space) {
      if (const auto* r = std::get_if<RealRange>(&range)) {
        if (!(r->min <= r->max)) {
          throw RegistryError("registry: empty range for " + spec.name + "." + key);
        }
      } else if (const auto* ir = std::get_if<IntRange>(&range)) {
        if (ir->min > ir->max) {
          throw RegistryError("registry: empty range for " + spec.name + "." + key);
        }
      } else if (std::get<ChoiceSet>(range).values.empty()) {
        throw RegistryError("registry: empty choice set for " + spec.name + "." + key);
      }
    }
  }
}

AttackRegistry AttackRegistry::built_in() {
  AttackRegistry reg;
  auto real = [](double lo, double hi) { return ParamRange(RealRange{lo, hi}); };
  auto ints = [](int64_t lo, int64_t hi) { return ParamRange(IntRange{lo, hi}); };
  auto choice = [](std::vector<double> v) { return ParamRange(ChoiceSet{std::move(v)}); };

  reg.add({"no_attack", {}, Provenance::PaperNamed, true});
  reg.add({"add_background_music",
           {{"snr_db", real(5, 20)}, {"asset_pick", real(0, 1)}},
           Provenance::PaperNamed,
           true});
  reg.add({"add_background_noise",
           {{"snr_db", real(5, 20)}, {"asset_pick", real(0, 1)}},
           Provenance::PaperNamed,
           true});
  reg.add({"gaussian_noise", {{"snr_db", real(5, 30)}}, Provenance::PaperNamed, true});
  reg.add({"time_stretch", {{"rate", real(0.7, 1.4)}}, Provenance::PaperNamed, true});
  reg.add({"pitch_shift",
           {{"semitones_abs", real(0.5, 4.0)}, {"direction", choice({-1, 1})}},
           Provenance::PaperNamed,
           true});
  reg.add({"high_pass_filter", {{"cutoff_hz", real(300, 2000)}}, Provenance::PaperNamed, true});
  reg.add({"silence_injection", {{"count", ints(1, 5)}}, Provenance::PaperNamed, true});
  reg.add({"bit_depth_change", {{"bits", ints(4, 12)}}, Provenance::PaperNamed, true});
  reg.add({"frequency_plus",
           {{"freq_hz", real(50, 4000)}, {"snr_db", real(20, 40)}},
           Provenance::PaperNamed,
           true});
  reg.add({"echo",
           {{"delay_ms", real(50, 400)}, {"decay", real(0.3, 0.7)}},
           Provenance::PaperNamed,
           true});
  reg.add({"low_pass_filter", {{"cutoff_hz", real(1000, 4000)}}, Provenance::RegistryFill, true});
  reg.add({"band_pass_filter",
           {{"low_hz", real(300, 1000)}, {"high_hz", real(2000, 3400)}},
           Provenance::RegistryFill,
           true});
  reg.add({"reverberation", {{"rt60_s", real(0.2, 0.8)}}, Provenance::RegistryFill, true});
  reg.add({"amplitude_clipping", {{"threshold", real(0.1, 0.5)}}, Provenance::RegistryFill, true});
  reg.add({"resample_round_trip", {{"rate_hz", choice({4000, 8000})}}, Provenance::RegistryFill,
           true});
  reg.add({"gain_change",
           {{"gain_db", real(6, 20)}, {"direction", choice({-1, 1})}},
           Provenance::RegistryFill,
           true});
  reg.add({"trim_edges",
           {{"head_pct", real(5, 15)}, {"tail_pct", real(5, 15)}},
           Provenance::RegistryFill,
           true});
  reg.validate();
  return reg;
}

AttackRegistry AttackRegistry::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RegistryError("cannot open registry config: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw RegistryError("invalid registry config " + path + ": " + e.what());
  }

  AttackRegistry reg;
  for (const auto& item : doc.at("attacks")) {
    AttackSpec spec;
    spec.name = item.at("name").get<std::string>();
    spec.enabled = item.value("enabled", true);
    spec.provenance = provenance_from_string(item.value("provenance", "registry-fill"));
    if (item.contains("params")) {
      for (const auto& [key, range] : item.at("params").items()) {
        const std::string type = range.at("type").get<std::string>();
        if (type == "real") {
          spec.param_space[key] = RealRange{range.at("min").get<double>(),
                                            range.at("max").get<double>()};
        } else if (type == "int") {
          spec.param_space[key] = IntRange{range.at("min").get<int64_t>(),
                                           range.at("max").get<int64_t>()};
        } else if (type == "choice") {
          spec.param_space[key] = ChoiceSet{range.at("values").get<std::vector<double>>()};
        } else {
          throw RegistryError("registry " + path + ": unknown range type " + type);
        }
      }
    }
    reg.add(std::move(spec));
  }
  reg.validate();
  return reg;
}

std::string AttackRegistry::to_json() const {
  nlohmann::ordered_json doc;
  doc["attacks"] = nlohmann::ordered_json::array();
  for (const auto& spec : specs_) {
    nlohmann::ordered_json item;
    item["name"] = spec.name;
    item["enabled"] = spec.enabled;
    item["provenance"] = to_string(spec.provenance);
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [key, range] : spec.param_space) {
      nlohmann::ordered_json r;
      if (const auto* real = std::get_if<RealRange>(&range)) {
        r["type"] = "real";
        r["min"] = real->min;
        r["max"] = real->max;
      } else if (const auto* ir = std::get_if<IntRange>(&range)) {
        r["type"] = "int";
        r["min"] = ir->min;
        r["max"] = ir->max;
      } else {
        r["type"] = "choice";
        r["values"] = std::get<ChoiceSet>(range).values;
      }
      params[key] = r;
    }
    if (!params.empty()) item["params"] = params;
    doc["attacks"].push_back(item);
  }
  return doc.dump(2) + "\n";
}

const AttackSpec* AttackRegistry::find(const std::string& name) const {
  for (const auto& spec : specs_) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

std::vector<const AttackSpec*> AttackRegistry::enabled_attacks() const {
  std::vector<const AttackSpec*> out;
  for (const auto& spec : specs_) {
    if (spec.enabled && spec.name != "no_attack") out.push_back(&spec);
  }
  std::sort(out.begin(), out.end(),
            [](const AttackSpec* a, const AttackSpec* b) { return a->name < b->name; });
  return out;
}

AttackParams sample_params(const AttackSpec& spec, uint64_t seed) {
  AttackParams params;
  params.attack_name = spec.name;
  params.seed = seed;
  Rng rng(seed);
  for (const auto& [key, range] : spec.param_space) {
    if (const auto* r = std::get_if<RealRange>(&range)) {
      params.values[key] = rng.uniform_real(r->min, r->max);
    } else if (const auto* ir = std::get_if<IntRange>(&range)) {
      params.values[key] = static_cast<double>(rng.uniform_int(ir->min, ir->max));
    } else {
      const auto& values = std::get<ChoiceSet>(range).values;
      auto idx = static_cast<size_t>(rng.next_unit() * static_cast<double>(values.size()));
      if (idx >= values.size()) idx = values.size() - 1;
      params.values[key] = values[idx];
    }
  }
  return params;
}

ApplyResult apply_attack(const AttackParams& params, const AudioClip& clip,
                         const AssetStore& assets) {
  const std::string& name = params.attack_name;
  ApplyResult result;
  if (name == "no_attack") {
    result = {clip, false};
  } else if (name == "add_background_music") {
    result = attack_background(params, clip, assets, true);
  } else if (name == "add_background_noise") {
    result = attack_background(params, clip, assets, false);
  } else if (name == "gaussian_noise") {
    result = attack_gaussian_noise(params, clip);
  } else if (name == "time_stretch") {
    result = attack_time_stretch(params, clip);
  } else if (name == "pitch_shift") {
    result = attack_pitch_shift(params, clip);
  } else if (name == "high_pass_filter") {
    result = attack_high_pass(params, clip);
  } else if (name == "low_pass_filter") {
    result = attack_low_pass(params, clip);
  } else if (name == "band_pass_filter") {
    result = attack_band_pass(params, clip);
  } else if (name == "silence_injection") {
    result = attack_silence_injection(params, clip);
  } else if (name == "bit_depth_change") {
    result = attack_bit_depth(params, clip);
  } else if (name == "frequency_plus") {
    result = attack_frequency_plus(params, clip);
  } else if (name == "echo") {
    result = attack_echo(params, clip);
  } else if (name == "reverberation") {
    result = attack_reverberation(params, clip);
  } else if (name == "amplitude_clipping") {
    result = attack_amplitude_clipping(params, clip);
  } else if (name == "resample_round_trip") {
    result = attack_resample_round_trip(params, clip);
  } else if (name == "gain_change") {
    result = attack_gain_change(params, clip);
  } else if (name == "trim_edges") {
    result = attack_trim_edges(params, clip);
  } else {
    throw RegistryError("unknown attack: " + name);
  }

  for (auto& s : result.clip.samples) {
    if (!std::isfinite(s)) {
      throw AudioError("attack " + name + " produced a non-finite sample");
    }
    s = clamp_sample(s);
  }
  return result;
}

}  // namespace deepen
