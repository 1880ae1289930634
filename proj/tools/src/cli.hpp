// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clifvqa::app {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// args excludes the program name. Command results go to out; logs and the
// effective configuration go to stderr.
int run_cli(const std::vector<std::string>& args, std::ostream& out);

}  // namespace clifvqa::app
