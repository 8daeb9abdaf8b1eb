/* Copyright 2026 The Spintraj Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spintraj::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kParse = 3,
  kDomain = 4,
  kNumeric = 5,
  kInternal = 6,
};

// args excludes the program name. Diagnostics go to `err` as one line.
int run_command(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace spintraj::cli
