// Copyright 2026 The AHSC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AHSC_TOOLS_CLI_H_
#define AHSC_TOOLS_CLI_H_

#include <iosfwd>
#include <string>

#include "ahsc/nn.h"
#include "ahsc/hyper.h"

namespace ahsc::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitAllDiscarded = 4;
inline constexpr int kExitNumeric = 5;

// Parses argv (argv[0] is the program name) and runs one subcommand.
// Machine-readable output goes to `out`, diagnostics to `err`.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct Checkpoint {
  HyperConfig hyperparams;
  Model model;
};

// JSON checkpoint with the model shape, row-major weights and biases.
void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path);
// Throws kData on unreadable or malformed files.
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace ahsc::cli

#endif  // AHSC_TOOLS_CLI_H_
