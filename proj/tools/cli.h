// Copyright 2026 The MVMN Authors.
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

#ifndef MVMN_TOOLS_CLI_H_
#define MVMN_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace mvmn::cli {

// Runs one subcommand. `args` excludes the program name. Returns 0 on
// success, 2 on a usage error and 1 on a runtime failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace mvmn::cli

#endif  // MVMN_TOOLS_CLI_H_
