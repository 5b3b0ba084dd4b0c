// Copyright 2026 The shardrisk Authors.
//
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

// The shardrisk command line: single-point queries, bound comparisons,
// sizing, sweeps and simulation, printed as CSV, JSON or a text table.

#ifndef SHARDRISK_CLI_HPP_
#define SHARDRISK_CLI_HPP_

#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace shardrisk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Value of the "schema" key every sweep config must carry.
inline constexpr std::string_view kSweepSchema = "shardrisk.sweep/1";

/// Runs one invocation. `args` excludes the program name. Results go to
/// `out` unless --output names a file; messages go to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace shardrisk::cli

#endif  // SHARDRISK_CLI_HPP_
