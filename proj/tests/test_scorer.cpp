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

#include "deepen/scorer.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "deepen/dsp.hpp"
#include "deepen/rng.hpp"
#include "deepen/synth.hpp"

using namespace deepen;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Three test WAVs plus a manifest whose entries are all in the test split.
struct Fixture {
  fs::path dir;
  Manifest manifest;
};

const Fixture& fixture() {
  static const Fixture fx = [] {
    Fixture f;
    f.dir = fs::temp_directory_path() / "deepen_scorer_tests";
    fs::remove_all(f.dir);
    fs::create_directories(f.dir / "audio");
    for (int i = 0; i < 3; ++i) {
      const std::string rel = "audio/clip_" + std::to_string(i) + ".wav";
      write_wav(synth_voiced_clip(static_cast<uint64_t>(i), 4000, 16000),
                (f.dir / rel).string());
      ManifestEntry entry;
      entry.source_path = "src_" + std::to_string(i) + ".wav";
      entry.output_path = rel;
      entry.label = i % 2 == 0 ? Label::Bonafide : Label::Spoof;
      entry.attack_name = "no_attack";
      entry.split = Split::Test;
      f.manifest.entries.push_back(entry);
    }
    return f;
  }();
  return fx;
}

ScorerConfig subprocess_config(const std::string& extra = "") {
  ScorerConfig config;
  config.kind = ScorerKind::Subprocess;
  config.endpoint_or_cmd = std::string(ECHO_SCORER_PATH) + extra;
  config.name = "echo";
  config.batch_size = 2;
  return config;
}

}  // namespace

TEST_CASE("predict applies the >= threshold rule") {
  CHECK(predict({"x", 0.5}, 0.5) == Label::Spoof);
  CHECK(predict({"x", 0.49}, 0.5) == Label::Bonafide);
  CHECK(predict({"x", 0.0}, 0.5) == Label::Bonafide);
  CHECK(predict({"x", 1.0}, 0.5) == Label::Spoof);
}

TEST_CASE("make_batches covers n items in order") {
  const auto batches = make_batches(10, 4);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0] == std::make_pair(size_t{0}, size_t{4}));
  CHECK(batches[1] == std::make_pair(size_t{4}, size_t{4}));
  CHECK(batches[2] == std::make_pair(size_t{8}, size_t{2}));

  CHECK(make_batches(0, 4).empty());
  CHECK(make_batches(4, 100).size() == 1);
  CHECK(make_batches(3, 0).size() == 3);  // zero batch size degrades to 1
}

TEST_CASE("reference scorer separates noise from harmonics") {
  Rng rng(5);
  AudioClip noise;
  noise.sample_rate_hz = 16000;
  noise.samples.resize(16000);
  for (auto& s : noise.samples) s = static_cast<float>(0.3 * rng.next_gaussian());

  AudioClip sine;
  sine.sample_rate_hz = 16000;
  sine.samples.resize(16000);
  for (size_t i = 0; i < sine.samples.size(); ++i) {
    sine.samples[i] = 0.5f * static_cast<float>(std::sin(2.0 * kPi * 440.0 * i / 16000.0));
  }

  CHECK(reference_score(noise) > 0.5);
  CHECK(reference_score(sine) < 0.5);
  CHECK(reference_score(noise) == reference_score(noise));

  // The documented logistic, evaluated by hand from the same features.
  const double t = 6.0 * (dsp::spectral_flatness(sine) - 0.2) +
                   2.0 * (dsp::zero_crossing_rate(sine) - 0.25) +
                   2.0 * (dsp::high_band_energy_ratio(sine, 4000.0) - 0.25);
  CHECK(reference_score(sine) == doctest::Approx(1.0 / (1.0 + std::exp(-t))).epsilon(1e-12));

  CHECK_THROWS_AS(reference_score(AudioClip{}), ScorerError);
}

TEST_CASE("score_batch with the reference scorer is ordered and deterministic") {
  const auto& fx = fixture();
  ScorerConfig config;
  config.parallelism = 2;
  const auto records = score_batch(fx.manifest, Split::Test, config, fx.dir.string());
  REQUIRE(records.size() == 3);
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].output_path == fx.manifest.entries[i].output_path);
    CHECK(records[i].spoof_probability >= 0.0);
    CHECK(records[i].spoof_probability <= 1.0);
  }
  const auto again = score_batch(fx.manifest, Split::Test, config, fx.dir.string());
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].spoof_probability == again[i].spoof_probability);
  }
}

TEST_CASE("score_batch rejects thresholds outside (0,1)") {
  ScorerConfig config;
  config.threshold = 1.0;
  CHECK_THROWS_AS(score_batch(fixture().manifest, Split::Test, config, fixture().dir.string()),
                  ScorerError);
}

TEST_CASE("score_batch names missing audio") {
  Manifest manifest = fixture().manifest;
  manifest.entries[1].output_path = "audio/not_there.wav";
  ScorerConfig config;
  CHECK_THROWS_WITH_AS(
      score_batch(manifest, Split::Test, config, fixture().dir.string()),
      doctest::Contains("not_there"), ScorerError);
}

TEST_CASE("subprocess scorer speaks the JSONL protocol") {
  const auto& fx = fixture();
  const auto records = score_batch(fx.manifest, Split::Test, subprocess_config(), fx.dir.string());
  REQUIRE(records.size() == 3);
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].output_path == fx.manifest.entries[i].output_path);
    CHECK(records[i].spoof_probability == 0.25);
  }
}

TEST_CASE("subprocess scorer rejects out-of-range probabilities, naming the file") {
  const auto& fx = fixture();
  CHECK_THROWS_WITH_AS(
      score_batch(fx.manifest, Split::Test, subprocess_config(" --prob 1.7"), fx.dir.string()),
      doctest::Contains("clip_0"), ScorerError);
}

TEST_CASE("subprocess scorer respawns a dying child") {
  const auto& fx = fixture();
  // The child exits after two answers; with batch_size 2, the last batch
  // needs a respawn.
  auto config = subprocess_config(" --die-after 2");
  config.max_retries = 2;
  const auto records = score_batch(fx.manifest, Split::Test, config, fx.dir.string());
  CHECK(records.size() == 3);

  auto no_retries = subprocess_config(" --die-after 1");
  no_retries.max_retries = 0;
  CHECK_THROWS_AS(score_batch(fx.manifest, Split::Test, no_retries, fx.dir.string()),
                  ScorerError);
}

TEST_CASE("subprocess scorer treats a wrong-shape response as a protocol violation") {
  const auto& fx = fixture();
  ScorerConfig config;
  config.kind = ScorerKind::Subprocess;
  // Valid JSON, wrong keys: must fail immediately, not retry forever.
  config.endpoint_or_cmd = "while read line; do echo '{\"verdict\": \"fake\"}'; done";
  config.max_retries = 50;
  CHECK_THROWS_WITH_AS(score_batch(fx.manifest, Split::Test, config, fx.dir.string()),
                       doctest::Contains("protocol violation"), ScorerError);
}

TEST_CASE("subprocess scorer survives batches larger than the pipe buffer") {
  // Thousands of requests in one batch exceed the 64 KiB pipe capacity in
  // both directions; the gateway must keep reading while it writes.
  const auto& fx = fixture();
  Manifest big;
  for (int i = 0; i < 3000; ++i) {
    ManifestEntry e = fx.manifest.entries[static_cast<size_t>(i) % 3];
    e.output_path = e.output_path + "#" + std::to_string(i);  // unique record keys
    big.entries.push_back(e);
  }
  // Re-point the unique keys at the real files on disk.
  for (auto& e : big.entries) e.output_path = e.output_path.substr(0, e.output_path.find('#'));

  auto config = subprocess_config();
  config.batch_size = 3000;
  const auto records = score_batch(big, Split::Test, config, fx.dir.string());
  CHECK(records.size() == 3000);
  for (const auto& r : records) CHECK(r.spoof_probability == 0.25);
}

TEST_CASE("subprocess scorer reports a command that never answers") {
  const auto& fx = fixture();
  ScorerConfig config;
  config.kind = ScorerKind::Subprocess;
  config.endpoint_or_cmd = "true";  // exits immediately, answers nothing
  config.max_retries = 1;
  CHECK_THROWS_AS(score_batch(fx.manifest, Split::Test, config, fx.dir.string()), ScorerError);
}

TEST_CASE("http scorer round-trips against a local server") {
  const auto& fx = fixture();
  httplib::Server server;
  std::atomic<int> requests{0};
  server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json out;
    out["scores"] = nlohmann::json::array();
    for (const auto& p : body.at("paths")) {
      out["scores"].push_back({{"path", p}, {"spoof_probability", 0.75}});
    }
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ScorerConfig config;
  config.kind = ScorerKind::Http;
  config.endpoint_or_cmd = "http://127.0.0.1:" + std::to_string(port);
  config.name = "http";
  config.batch_size = 2;
  const auto records = score_batch(fx.manifest, Split::Test, config, fx.dir.string());
  REQUIRE(records.size() == 3);
  for (const auto& r : records) CHECK(r.spoof_probability == 0.75);
  CHECK(requests.load() == 2);  // 3 files in batches of 2

  server.stop();
  server_thread.join();
}

TEST_CASE("http scorer errors name the unreachable endpoint") {
  const auto& fx = fixture();
  ScorerConfig config;
  config.kind = ScorerKind::Http;
  config.endpoint_or_cmd = "http://127.0.0.1:1";  // nothing listens there
  config.max_retries = 0;
  CHECK_THROWS_WITH_AS(score_batch(fx.manifest, Split::Test, config, fx.dir.string()),
                       doctest::Contains("127.0.0.1:1"), ScorerError);
}

TEST_CASE("parse_scorer_spec understands the three kinds") {
  CHECK(parse_scorer_spec("reference").kind == ScorerKind::Reference);
  const auto sub = parse_scorer_spec("subprocess:python3 score.py --x");
  CHECK(sub.kind == ScorerKind::Subprocess);
  CHECK(sub.endpoint_or_cmd == "python3 score.py --x");
  CHECK(parse_scorer_spec("http://localhost:8000").kind == ScorerKind::Http);
  CHECK_THROWS_AS(parse_scorer_spec("carrier-pigeon"), ScorerError);
}

TEST_CASE("scores csv round-trips") {
  const fs::path path = fs::temp_directory_path() / "deepen_scores.csv";
  std::vector<ScoreRecord> records = {{"audio/a.wav", 0.125}, {"audio/b.wav", 1.0 / 3.0}};
  ScorerConfig config;
  write_scores_csv(records, config, Split::Test, path.string());
  const auto loaded = read_scores_csv(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].output_path == "audio/a.wav");
  CHECK(loaded[0].spoof_probability == 0.125);
  CHECK(loaded[1].spoof_probability == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}
