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

#include <iosfwd>
#include <string>
#include <vector>

namespace deepen {

/// Runs the command line. args excludes the program name. Exit code 0 on
/// success, 1 on usage errors, 2 on runtime failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Help text for one subcommand ("" for the top level), as printed by
/// `deepen <subcommand> --help`.
std::string cli_help(const std::string& subcommand);

}  // namespace deepen
