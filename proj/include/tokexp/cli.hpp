// Copyright 2026 The tokexp Authors.
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

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tokexp::cli {

// Runs one subcommand. `args` excludes the program name. Returns the process
// exit status: 0 success, 2 config error, 3 input error, 4 internal error.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace tokexp::cli
