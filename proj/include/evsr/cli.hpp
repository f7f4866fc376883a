// Copyright 2026 The evsr Authors
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

#ifndef EVSR_CLI_HPP
#define EVSR_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace evsr
{
/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the tool on args (args[0] is the program name), writing reports to
/// out and diagnostics to err.
int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);

int cli_main(int argc, char ** argv);

}  // namespace evsr

#endif  // EVSR_CLI_HPP
