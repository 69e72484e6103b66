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

// Minimal subprocess-protocol scorer, used by the test suite and as a
// working example of the wire format. Reads one JSON object per line from
// stdin ({"path": "..."}), answers one per line on stdout:
//   {"path": "...", "spoof_probability": <float>}
//
// Flags:
//   --prob P       answer a constant probability (default 0.25)
//   --die-after N  exit after N responses (simulates a crashing child)

#include <cstdlib>
#include <iostream>
#include <string>

#include <json.hpp>

int main(int argc, char** argv) {
  double prob = 0.25;
  long die_after = -1;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--prob") prob = std::atof(argv[i + 1]);
    if (flag == "--die-after") die_after = std::atol(argv[i + 1]);
  }

  std::string line;
  long answered = 0;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    const auto request = nlohmann::json::parse(line);
    nlohmann::json response;
    response["path"] = request.at("path");
    response["spoof_probability"] = prob;
    std::cout << response.dump() << "\n" << std::flush;
    if (die_after >= 0 && ++answered >= die_after) return 0;
  }
  return 0;
}
