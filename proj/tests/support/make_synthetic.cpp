// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

// Writes a synthetic brightness-rated dataset for smoke runs:
//   make_synthetic <dir> [count=24] [frames=8] [size=224] [seed=1]
#include <cstdlib>
#include <iostream>
#include <string>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_synthetic <dir> [count] [frames] [size] [seed]\n";
    return 1;
  }
  auto arg = [&](int i, unsigned long fallback) { return argc > i ? std::stoul(argv[i]) : fallback; };
  const auto size = arg(4, 224);
  const auto set = clifvqa::testing::synthetic_set(arg(2, 24), arg(3, 8), size, size, arg(5, 1));
  std::cout << clifvqa::testing::write_synthetic_set(argv[1], set).string() << '\n';
  return 0;
}
