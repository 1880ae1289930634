// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  return clifvqa::app::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout);
}
