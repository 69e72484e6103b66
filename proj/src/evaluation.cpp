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

#include "deepen/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "deepen/io_util.hpp"

namespace deepen {

namespace {

// Shortest decimal form that parses back to the exact double.
std::string fmt(double v) { return nlohmann::json(v).dump(); }

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string fmt1(double v) { return fmt(v, "%.1f"); }

// Row order: no_attack first, then attacks sorted; bonafide before spoof.
bool row_less(const std::pair<std::string, Label>& a, const std::pair<std::string, Label>& b) {
  const bool a_base = a.first == "no_attack";
  const bool b_base = b.first == "no_attack";
  if (a_base != b_base) return a_base;
  if (a.first != b.first) return a.first < b.first;
  return static_cast<int>(a.second) < static_cast<int>(b.second);
}

}  // namespace

AccuracyMatrix accuracy_matrix(const Manifest& manifest, const std::vector<ScoreRecord>& records,
                               double threshold, const std::string& scorer_name, Split split) {
  std::map<std::string, double> by_path;
  for (const auto& r : records) {
    if (!by_path.emplace(r.output_path, r.spoof_probability).second) {
      throw EvaluationError("duplicate record for " + r.output_path);
    }
  }

  std::map<std::pair<std::string, Label>, std::pair<size_t, size_t>> cells;  // correct, total
  for (const auto& entry : manifest.entries) {
    if (entry.split != split) continue;
    auto it = by_path.find(entry.output_path);
    if (it == by_path.end()) {
      throw EvaluationError("missing record for " + entry.output_path);
    }
    const Label predicted = predict({entry.output_path, it->second}, threshold);
    auto& [correct, total] = cells[{entry.attack_name, entry.label}];
    if (predicted == entry.label) ++correct;
    ++total;
  }
  if (cells.empty()) throw EvaluationError("no entries in the requested split");

  AccuracyMatrix m;
  m.threshold = threshold;
  m.cols = {scorer_name};
  for (const auto& [key, value] : cells) m.rows.push_back(key);
  std::sort(m.rows.begin(), m.rows.end(), row_less);
  for (const auto& row : m.rows) {
    const auto& [correct, total] = cells.at(row);
    m.cells.push_back({100.0 * static_cast<double>(correct) / static_cast<double>(total)});
    m.counts.push_back({total});
  }
  return m;
}

DeltaMatrix delta_matrix(const AccuracyMatrix& defended, const AccuracyMatrix& baseline) {
  if (defended.rows != baseline.rows || defended.cols.size() != baseline.cols.size()) {
    throw EvaluationError("delta: matrices have different structure");
  }

  // Attack order with labels merged: first-occurrence order, deduplicated.
  std::vector<std::string> attacks;
  std::set<std::string> seen;
  for (const auto& [attack, label] : defended.rows) {
    if (seen.insert(attack).second) attacks.push_back(attack);
  }

  DeltaMatrix d;
  d.cols = attacks;
  for (size_t j = 0; j < defended.cols.size(); ++j) {
    d.rows.push_back(defended.cols[j]);
    std::vector<double> row;
    for (const auto& attack : attacks) {
      double acc_defended = 0.0;
      double acc_baseline = 0.0;
      size_t label_count = 0;
      for (size_t r = 0; r < defended.rows.size(); ++r) {
        if (defended.rows[r].first != attack) continue;
        acc_defended += defended.cells[r][j];
        acc_baseline += baseline.cells[r][j];
        ++label_count;
      }
      row.push_back((acc_defended - acc_baseline) / static_cast<double>(label_count));
    }
    double mean = 0.0;
    size_t n_attacks = 0;
    for (size_t k = 0; k < attacks.size(); ++k) {
      if (attacks[k] == "no_attack") continue;
      mean += row[k];
      ++n_attacks;
    }
    d.row_means.push_back(n_attacks > 0 ? mean / static_cast<double>(n_attacks) : 0.0);
    d.cells.push_back(std::move(row));
  }
  return d;
}

void append_scenarios(DeltaMatrix& base, const DeltaMatrix& extra) {
  if (base.rows.empty()) {
    base = extra;
    return;
  }
  if (base.cols != extra.cols) {
    throw EvaluationError("delta: scenario column sets differ");
  }
  for (size_t i = 0; i < extra.rows.size(); ++i) {
    base.rows.push_back(extra.rows[i]);
    base.cells.push_back(extra.cells[i]);
    base.row_means.push_back(extra.row_means[i]);
  }
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  if (s == "html") return ReportFormat::Html;
  throw EvaluationError("unknown report format: " + s);
}

double gradient_position(double accuracy) {
  if (accuracy >= 100.0) return 0.0;
  if (accuracy <= 50.0) return 1.0;
  return (100.0 - accuracy) / 50.0;
}

std::string gradient_color(double position) {
  position = std::clamp(position, 0.0, 1.0);
  // green #1a9850 -> red #d73027
  const int from[3] = {0x1a, 0x98, 0x50};
  const int to[3] = {0xd7, 0x30, 0x27};
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(from[0] + (to[0] - from[0]) * position)),
                static_cast<int>(std::lround(from[1] + (to[1] - from[1]) * position)),
                static_cast<int>(std::lround(from[2] + (to[2] - from[2]) * position)));
  return buf;
}

namespace {

constexpr double kDeltaHighlight = 5.0;  // strictly beyond +/-5 points

std::string html_header(const std::string& title) {
  return "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + title +
         "</title>\n<style>\n"
         "table { border-collapse: collapse; font-family: sans-serif; }\n"
         "th, td { border: 1px solid #999; padding: 4px 8px; text-align: right; }\n"
         "th { background: #eee; }\n"
         "td.attacked { font-weight: bold; border: 2px solid #b2182b; }\n"
         "td.improvement { background: #4393c3; color: white; }\n"
         "td.deterioration { background: #d6604d; color: white; }\n"
         "</style></head><body>\n";
}

}  // namespace

std::string render_report(const AccuracyMatrix& matrix, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "attack,label";
    for (const auto& col : matrix.cols) out << ',' << col;
    out << '\n';
    for (size_t r = 0; r < matrix.rows.size(); ++r) {
      out << matrix.rows[r].first << ',' << to_string(matrix.rows[r].second);
      for (double v : matrix.cells[r]) out << ',' << fmt(v);
      out << '\n';
    }
    return out.str();
  }

  if (format == ReportFormat::Markdown) {
    out << "| attack | label |";
    for (const auto& col : matrix.cols) out << ' ' << col << " |";
    out << "\n|---|---|";
    for (size_t j = 0; j < matrix.cols.size(); ++j) out << "---|";
    out << '\n';
    for (size_t r = 0; r < matrix.rows.size(); ++r) {
      out << "| " << matrix.rows[r].first << " | " << to_string(matrix.rows[r].second) << " |";
      for (double v : matrix.cells[r]) {
        if (v < 50.0) {
          out << " **" << fmt1(v) << "** (successful attack) |";
        } else {
          out << ' ' << fmt1(v) << " |";
        }
      }
      out << '\n';
    }
    return out.str();
  }

  out << html_header("accuracy [%]");
  out << "<table>\n<tr><th>attack</th><th>label</th>";
  for (const auto& col : matrix.cols) out << "<th>" << col << "</th>";
  out << "</tr>\n";
  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    out << "<tr><td>" << matrix.rows[r].first << "</td><td>" << to_string(matrix.rows[r].second)
        << "</td>";
    for (double v : matrix.cells[r]) {
      if (v < 50.0) {
        out << "<td class=\"attacked\" title=\"successful attack\">" << fmt1(v) << "</td>";
      } else {
        out << "<td style=\"background:" << gradient_color(gradient_position(v)) << "\">"
            << fmt1(v) << "</td>";
      }
    }
    out << "</tr>\n";
  }
  out << "</table>\n<p>Cells below 50% mark a successful attack (worse than random).</p>\n";
  out << "</body></html>\n";
  return out.str();
}

std::string render_report(const DeltaMatrix& matrix, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "scenario";
    for (const auto& col : matrix.cols) out << ',' << col;
    out << ",mean\n";
    for (size_t r = 0; r < matrix.rows.size(); ++r) {
      out << matrix.rows[r];
      for (double v : matrix.cells[r]) out << ',' << fmt(v);
      out << ',' << fmt(matrix.row_means[r]) << '\n';
    }
    return out.str();
  }

  auto signed1 = [](double v) { return (v >= 0 ? "+" : "") + fmt1(v); };

  if (format == ReportFormat::Markdown) {
    out << "| scenario |";
    for (const auto& col : matrix.cols) out << ' ' << col << " |";
    out << " mean |\n|---|";
    for (size_t j = 0; j <= matrix.cols.size(); ++j) out << "---|";
    out << '\n';
    for (size_t r = 0; r < matrix.rows.size(); ++r) {
      out << "| " << matrix.rows[r] << " |";
      for (double v : matrix.cells[r]) {
        if (v > kDeltaHighlight) {
          out << " **" << signed1(v) << "** (improvement) |";
        } else if (v < -kDeltaHighlight) {
          out << " **" << signed1(v) << "** (deterioration) |";
        } else {
          out << ' ' << signed1(v) << " |";
        }
      }
      out << ' ' << signed1(matrix.row_means[r]) << " |\n";
    }
    return out.str();
  }

  out << html_header("accuracy delta vs baseline [pp]");
  out << "<table>\n<tr><th>scenario</th>";
  for (const auto& col : matrix.cols) out << "<th>" << col << "</th>";
  out << "<th>mean</th></tr>\n";
  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    out << "<tr><td>" << matrix.rows[r] << "</td>";
    for (double v : matrix.cells[r]) {
      if (v > kDeltaHighlight) {
        out << "<td class=\"improvement\">" << signed1(v) << "</td>";
      } else if (v < -kDeltaHighlight) {
        out << "<td class=\"deterioration\">" << signed1(v) << "</td>";
      } else {
        out << "<td>" << signed1(v) << "</td>";
      }
    }
    out << "<td>" << signed1(matrix.row_means[r]) << "</td></tr>\n";
  }
  out << "</table>\n<p>Highlights mark changes of more than 5 percentage points "
         "against the baseline.</p>\n</body></html>\n";
  return out.str();
}

void write_accuracy_csv(const AccuracyMatrix& matrix, const std::string& path) {
  std::ostringstream out;
  out << "# type=accuracy;threshold=" << fmt(matrix.threshold) << ";seed=" << matrix.seed
      << ";scorers=";
  for (size_t j = 0; j < matrix.cols.size(); ++j) {
    if (j > 0) out << '|';
    out << matrix.cols[j];
  }
  out << '\n';
  out << "attack,label";
  for (const auto& col : matrix.cols) out << ',' << col << ',' << col << "_count";
  out << '\n';
  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    out << matrix.rows[r].first << ',' << to_string(matrix.rows[r].second);
    for (size_t j = 0; j < matrix.cols.size(); ++j) {
      out << ',' << fmt(matrix.cells[r][j]) << ',' << matrix.counts[r][j];
    }
    out << '\n';
  }
  atomic_write_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::map<std::string, std::string> parse_header_block(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::string body = line.substr(1);  // drop '#'
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) continue;
    std::string key = item.substr(0, eq);
    key.erase(0, key.find_first_not_of(' '));
    kv[key] = item.substr(eq + 1);
  }
  return kv;
}

}  // namespace

AccuracyMatrix read_accuracy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvaluationError("cannot open matrix: " + path);
  AccuracyMatrix m;
  std::string line;
  bool have_columns = false;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto kv = parse_header_block(line);
      if (kv.count("threshold")) m.threshold = std::stod(kv["threshold"]);
      if (kv.count("seed")) m.seed = std::stoull(kv["seed"]);
      continue;
    }
    const auto fields = split_csv_line(line);
    if (!have_columns) {
      if (fields.size() < 4 || fields[0] != "attack") {
        throw EvaluationError("bad accuracy matrix header in " + path);
      }
      for (size_t j = 2; j + 1 < fields.size(); j += 2) m.cols.push_back(fields[j]);
      have_columns = true;
      continue;
    }
    if (fields.size() != 2 + 2 * m.cols.size()) {
      throw EvaluationError("bad accuracy matrix row in " + path + ": " + line);
    }
    m.rows.emplace_back(fields[0], label_from_string(fields[1]));
    std::vector<double> cells;
    std::vector<size_t> counts;
    for (size_t j = 0; j < m.cols.size(); ++j) {
      cells.push_back(std::stod(fields[2 + 2 * j]));
      counts.push_back(static_cast<size_t>(std::stoull(fields[3 + 2 * j])));
    }
    m.cells.push_back(std::move(cells));
    m.counts.push_back(std::move(counts));
  }
  if (!have_columns) throw EvaluationError("empty accuracy matrix: " + path);
  return m;
}

void write_delta_csv(const DeltaMatrix& matrix, const std::string& path) {
  std::ostringstream out;
  out << "# type=delta\n";
  out << "scenario";
  for (const auto& col : matrix.cols) out << ',' << col;
  out << ",mean\n";
  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    out << matrix.rows[r];
    for (double v : matrix.cells[r]) out << ',' << fmt(v);
    out << ',' << fmt(matrix.row_means[r]) << '\n';
  }
  atomic_write_file(path, out.str());
}

DeltaMatrix read_delta_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvaluationError("cannot open matrix: " + path);
  DeltaMatrix m;
  std::string line;
  bool have_columns = false;
  bool has_mean_col = false;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    if (!have_columns) {
      if (fields.size() < 2) throw EvaluationError("bad delta matrix header in " + path);
      has_mean_col = fields.back() == "mean";
      for (size_t j = 1; j < fields.size() - (has_mean_col ? 1 : 0); ++j) {
        m.cols.push_back(fields[j]);
      }
      have_columns = true;
      continue;
    }
    if (fields.size() != 1 + m.cols.size() + (has_mean_col ? 1 : 0)) {
      throw EvaluationError("bad delta matrix row in " + path + ": " + line);
    }
    m.rows.push_back(fields[0]);
    std::vector<double> cells;
    for (size_t j = 0; j < m.cols.size(); ++j) cells.push_back(std::stod(fields[1 + j]));
    if (has_mean_col) {
      m.row_means.push_back(std::stod(fields.back()));
    } else {
      double mean = 0.0;
      size_t n = 0;
      for (size_t k = 0; k < m.cols.size(); ++k) {
        if (m.cols[k] == "no_attack") continue;
        mean += cells[k];
        ++n;
      }
      m.row_means.push_back(n > 0 ? mean / static_cast<double>(n) : 0.0);
    }
    m.cells.push_back(std::move(cells));
  }
  if (!have_columns) throw EvaluationError("empty delta matrix: " + path);
  return m;
}

}  // namespace deepen
