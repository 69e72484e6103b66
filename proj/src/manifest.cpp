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

#include "deepen/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deepen/io_util.hpp"

namespace deepen {

std::string to_string(Label l) { return l == Label::Bonafide ? "bonafide" : "spoof"; }
std::string to_string(Split s) { return s == Split::Train ? "train" : "test"; }

Label label_from_string(const std::string& s) {
  if (s == "bonafide") return Label::Bonafide;
  if (s == "spoof") return Label::Spoof;
  throw ManifestError("unknown label: \"" + s + "\"");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw ManifestError("unknown split: \"" + s + "\"");
}

void write_manifest_jsonl(const Manifest& manifest, const std::string& path) {
  std::string out;
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json row;
    row["source_path"] = e.source_path;
    row["output_path"] = e.output_path;
    row["label"] = to_string(e.label);
    row["attack"] = e.attack_name;
    row["seed"] = e.params.seed;
    row["params"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : e.params.values) row["params"][k] = v;
    row["split"] = to_string(e.split);
    row["degenerate"] = e.degenerate;
    out += row.dump();
    out += '\n';
  }
  atomic_write_file(path, out);
}

Manifest read_manifest_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest: " + path);
  Manifest manifest;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ManifestError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ManifestEntry entry;
    entry.source_path = row.at("source_path").get<std::string>();
    entry.output_path = row.at("output_path").get<std::string>();
    entry.label = label_from_string(row.at("label").get<std::string>());
    entry.attack_name = row.at("attack").get<std::string>();
    entry.params.attack_name = entry.attack_name;
    entry.params.seed = row.at("seed").get<uint64_t>();
    for (const auto& [k, v] : row.at("params").items()) {
      entry.params.values[k] = v.get<double>();
    }
    entry.split = split_from_string(row.at("split").get<std::string>());
    entry.degenerate = row.value("degenerate", false);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

void write_manifest_csv(const Manifest& manifest, const std::string& path) {
  std::ostringstream out;
  out << "source_path,output_path,label,attack,split,degenerate,seed,params\n";
  for (const auto& e : manifest.entries) {
    std::string params;
    for (const auto& [k, v] : e.params.values) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      if (!params.empty()) params += ';';
      params += k + "=" + buf;
    }
    out << csv_field(e.source_path) << ',' << csv_field(e.output_path) << ','
        << to_string(e.label) << ',' << e.attack_name << ',' << to_string(e.split) << ','
        << (e.degenerate ? "true" : "false") << ',' << e.params.seed << ','
        << csv_field(params) << '\n';
  }
  atomic_write_file(path, out.str());
}

}  // namespace deepen
