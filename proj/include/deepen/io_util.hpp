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

#include <functional>
#include <string>

namespace deepen {

/// Writes content to a sibling temp file, then renames over the target, so
/// readers never observe a partially written file.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);  // throws std::runtime_error

/// Runs fn(0..n-1) across up to `jobs` threads. Exceptions from workers are
/// rethrown on the caller thread (first one wins).
void parallel_for(size_t n, int jobs, const std::function<void(size_t)>& fn);

}  // namespace deepen
