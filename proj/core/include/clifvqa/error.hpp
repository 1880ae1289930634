// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace clifvqa {

// Raised for bad user input: malformed manifests, corrupt caches, config
// errors, digest mismatches. The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace clifvqa
