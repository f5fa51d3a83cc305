// Copyright 2026 The Taskforge Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TASKFORGE_CLI_H_
#define TASKFORGE_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace taskforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs one `taskforge` subcommand. args[0] is the program name.
int CliDispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int CliDispatch(int argc, char** argv);

}  // namespace taskforge

#endif  // TASKFORGE_CLI_H_
