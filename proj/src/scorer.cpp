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

#include <unistd.h>
#include <sys/wait.h>
#include <signal.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

#include "deepen/dsp.hpp"
#include "deepen/io_util.hpp"

namespace deepen {

namespace fs = std::filesystem;

ScorerConfig parse_scorer_spec(const std::string& spec) {
  ScorerConfig config;
  if (spec == "reference") {
    config.kind = ScorerKind::Reference;
    config.name = "reference";
  } else if (spec.rfind("subprocess:", 0) == 0) {
    config.kind = ScorerKind::Subprocess;
    config.endpoint_or_cmd = spec.substr(std::string("subprocess:").size());
    config.name = "subprocess";
    if (config.endpoint_or_cmd.empty()) throw ScorerError("empty subprocess command");
  } else if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    config.kind = ScorerKind::Http;
    config.endpoint_or_cmd = spec;
    config.name = "http";
  } else {
    throw ScorerError("unknown scorer spec: " + spec +
                      " (expected reference, subprocess:CMD, or http://...)");
  }
  return config;
}

Label predict(const ScoreRecord& record, double threshold) {
  return record.spoof_probability >= threshold ? Label::Spoof : Label::Bonafide;
}

double reference_score(const AudioClip& clip) {
  if (clip.empty()) throw ScorerError("reference scorer: empty clip");
  const double flatness = dsp::spectral_flatness(clip);
  const double zcr = dsp::zero_crossing_rate(clip);
  const double high = dsp::high_band_energy_ratio(clip, 4000.0);
  const double t = 6.0 * (flatness - 0.2) + 2.0 * (zcr - 0.25) + 2.0 * (high - 0.25);
  return 1.0 / (1.0 + std::exp(-t));
}

std::vector<std::pair<size_t, size_t>> make_batches(size_t n, size_t batch_size) {
  if (batch_size == 0) batch_size = 1;
  std::vector<std::pair<size_t, size_t>> batches;
  for (size_t off = 0; off < n; off += batch_size) {
    batches.emplace_back(off, std::min(batch_size, n - off));
  }
  return batches;
}

namespace {

double validate_probability(double p, const std::string& path) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw ScorerError("scorer protocol violation: probability " + std::to_string(p) +
                      " out of [0, 1] for " + path);
  }
  return p;
}

// --- subprocess transport ------------------------------------------------
//
// Wire format, one JSON object per line:
//   to child:   {"path": "<absolute path>"}
//   from child: {"path": "...", "spoof_probability": <float in [0,1]>}
// The child must flush after each response line.
class SubprocessScorer {
 public:
  explicit SubprocessScorer(std::string cmd) : cmd_(std::move(cmd)) {}
  ~SubprocessScorer() { shutdown(); }

  void spawn() {
    shutdown();
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw ScorerError("scorer subprocess: pipe() failed");
    }
    pid_ = fork();
    if (pid_ < 0) throw ScorerError("scorer subprocess: fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", cmd_.c_str(), nullptr);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    in_ = fdopen(from_child[0], "r");
    out_ = fdopen(to_child[1], "w");
    if (in_ == nullptr || out_ == nullptr) {
      throw ScorerError("scorer subprocess: fdopen() failed");
    }
  }

  bool running() const { return pid_ > 0; }

  bool send_line(const std::string& line) {
    if (out_ == nullptr) return false;
    if (std::fputs(line.c_str(), out_) == EOF) return false;
    if (std::fputc('\n', out_) == EOF) return false;
    return std::fflush(out_) == 0;
  }

  bool read_line(std::string& line) {
    line.clear();
    if (in_ == nullptr) return false;
    int c;
    while ((c = std::fgetc(in_)) != EOF) {
      if (c == '\n') return true;
      line.push_back(static_cast<char>(c));
    }
    return !line.empty();
  }

  /// Force-terminates the child so a blocked writer thread sees EPIPE.
  void kill_process() {
    if (pid_ > 0) kill(pid_, SIGKILL);
  }

  void shutdown() {
    if (out_ != nullptr) {
      std::fclose(out_);
      out_ = nullptr;
    }
    if (in_ != nullptr) {
      std::fclose(in_);
      in_ = nullptr;
    }
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

 private:
  std::string cmd_;
  pid_t pid_ = -1;
  FILE* in_ = nullptr;
  FILE* out_ = nullptr;
};

struct WorkItem {
  size_t record_index;
  std::string abs_path;
  std::string manifest_path;
};

void score_with_subprocess(const std::vector<WorkItem>& items, const ScorerConfig& config,
                           std::vector<ScoreRecord>& records) {
  signal(SIGPIPE, SIG_IGN);
  SubprocessScorer child(config.endpoint_or_cmd);

  for (const auto& [off, size] : make_batches(items.size(), config.batch_size)) {
    int attempts = 0;
    for (;;) {
      try {
        if (!child.running()) child.spawn();

        // Requests go out on their own thread so a large batch cannot
        // deadlock on full pipes while the child is already answering.
        std::atomic<bool> write_ok{true};
        std::thread writer([&] {
          for (size_t i = off; i < off + size; ++i) {
            nlohmann::json req;
            req["path"] = items[i].abs_path;
            if (!child.send_line(req.dump())) {
              write_ok = false;
              return;
            }
          }
        });

        std::map<std::string, double> responses;
        std::string line;
        bool transport_ok = true;
        std::string bad_response;
        for (size_t i = 0; i < size && transport_ok; ++i) {
          if (!child.read_line(line)) {
            transport_ok = false;
            break;
          }
          try {
            const auto rsp = nlohmann::json::parse(line);
            responses[rsp.at("path").get<std::string>()] =
                rsp.at("spoof_probability").get<double>();
          } catch (const nlohmann::json::exception&) {
            bad_response = line;
            break;
          }
        }
        // The writer must be joined before anything can throw.
        if (!bad_response.empty() || !transport_ok) child.kill_process();
        writer.join();

        if (!bad_response.empty()) {
          throw ScorerError("scorer protocol violation: bad response from child: " +
                            bad_response);
        }
        if (!transport_ok || !write_ok) throw std::runtime_error("child stream closed");

        for (size_t i = off; i < off + size; ++i) {
          auto it = responses.find(items[i].abs_path);
          if (it == responses.end()) {
            throw ScorerError("scorer protocol violation: no response for " +
                              items[i].manifest_path);
          }
          records[items[i].record_index].spoof_probability =
              validate_probability(it->second, items[i].manifest_path);
        }
        break;
      } catch (const ScorerError&) {
        throw;  // protocol violations are not retried
      } catch (const std::exception&) {
        child.shutdown();
        if (++attempts > config.max_retries) {
          throw ScorerError("scorer subprocess failed after " + std::to_string(attempts) +
                            " attempts: " + config.endpoint_or_cmd);
        }
      }
    }
  }
}

// --- http transport ------------------------------------------------------
//
// POST /score {"paths": [...]} -> {"scores": [{"path", "spoof_probability"}]}
void score_with_http(const std::vector<WorkItem>& items, const ScorerConfig& config,
                     std::vector<ScoreRecord>& records) {
  const auto batches = make_batches(items.size(), config.batch_size);

  auto run_batch = [&](size_t off, size_t size) {
    httplib::Client client(config.endpoint_or_cmd);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);

    nlohmann::json req;
    req["paths"] = nlohmann::json::array();
    for (size_t i = off; i < off + size; ++i) req["paths"].push_back(items[i].abs_path);
    const std::string body = req.dump();

    int attempts = 0;
    for (;;) {
      auto result = client.Post("/score", body, "application/json");
      if (!result || result->status >= 500) {
        if (++attempts > config.max_retries) {
          throw ScorerError("scorer unreachable: " + config.endpoint_or_cmd +
                            (result ? " (status " + std::to_string(result->status) + ")"
                                    : " (no response)"));
        }
        continue;
      }
      if (result->status != 200) {
        throw ScorerError("scorer error " + std::to_string(result->status) + " from " +
                          config.endpoint_or_cmd);
      }

      std::map<std::string, double> responses;
      try {
        const auto rsp = nlohmann::json::parse(result->body);
        for (const auto& item : rsp.at("scores")) {
          responses[item.at("path").get<std::string>()] =
              item.at("spoof_probability").get<double>();
        }
      } catch (const nlohmann::json::exception&) {
        throw ScorerError("scorer protocol violation: bad response from " +
                          config.endpoint_or_cmd);
      }
      for (size_t i = off; i < off + size; ++i) {
        auto it = responses.find(items[i].abs_path);
        if (it == responses.end()) {
          throw ScorerError("scorer protocol violation: no score for " +
                            items[i].manifest_path);
        }
        records[items[i].record_index].spoof_probability =
            validate_probability(it->second, items[i].manifest_path);
      }
      return;
    }
  };

  parallel_for(batches.size(), config.parallelism, [&](size_t b) {
    run_batch(batches[b].first, batches[b].second);
  });
}

}  // namespace

std::vector<ScoreRecord> score_batch(const Manifest& manifest, Split split,
                                     const ScorerConfig& config, const std::string& audio_root) {
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) {
    throw ScorerError("threshold must be strictly inside (0, 1)");
  }

  std::vector<WorkItem> items;
  std::vector<ScoreRecord> records;
  for (const auto& entry : manifest.entries) {
    if (entry.split != split) continue;
    const fs::path p = fs::path(entry.output_path).is_absolute()
                           ? fs::path(entry.output_path)
                           : fs::path(audio_root) / entry.output_path;
    items.push_back({records.size(), fs::absolute(p).string(), entry.output_path});
    records.push_back({entry.output_path, 0.0});
  }

  for (const auto& item : items) {
    if (!fs::exists(item.abs_path)) {
      throw ScorerError("derived audio missing: " + item.abs_path);
    }
  }

  switch (config.kind) {
    case ScorerKind::Reference:
      parallel_for(items.size(), config.parallelism, [&](size_t i) {
        records[items[i].record_index].spoof_probability =
            reference_score(read_wav(items[i].abs_path));
      });
      break;
    case ScorerKind::Subprocess:
      score_with_subprocess(items, config, records);
      break;
    case ScorerKind::Http:
      score_with_http(items, config, records);
      break;
  }
  return records;
}

void write_scores_csv(const std::vector<ScoreRecord>& records, const ScorerConfig& config,
                      Split split, const std::string& path) {
  std::ostringstream out;
  out << "# scorer=" << config.name << ";threshold=" << config.threshold
      << ";split=" << to_string(split) << "\n";
  out << "output_path,spoof_probability\n";
  for (const auto& r : records) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", r.spoof_probability);
    out << r.output_path << ',' << buf << '\n';
  }
  atomic_write_file(path, out.str());
}

std::vector<ScoreRecord> read_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScorerError("cannot open scores file: " + path);
  std::vector<ScoreRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("output_path,", 0) == 0) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw ScorerError("bad scores line: " + line);
    records.push_back({line.substr(0, comma), std::stod(line.substr(comma + 1))});
  }
  return records;
}

}  // namespace deepen
