// Copyright 2026 The specattr Authors.
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

#ifndef SPECATTR_TOOLS_CLI_H_
#define SPECATTR_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace specattr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitInvariantViolation = 2;

// Runs one subcommand. `args` excludes the program name. Diagnostics go to
// `err`, short progress lines to `out`; results are only ever files.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace specattr

#endif  // SPECATTR_TOOLS_CLI_H_
