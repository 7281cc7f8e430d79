/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fedmod::cli {

/// Exit codes. Library errors map to a code per error kind.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kParse = 3,
  kSchema = 4,
  kDomain = 5,
  kDegenerate = 6,
  kLookup = 7,
  kGraph = 8,
  kIo = 9,
  kUnavailable = 10,
  kInternal = 70,
};

int exit_code_for(std::string_view error_kind);

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fedmod::cli
