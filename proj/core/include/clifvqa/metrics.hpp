// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace clifvqa {

// 1-based fractional ranks; tied values share the mean of their positions.
std::vector<double> fractional_ranks(std::span<const double> values);

// Sample Pearson correlation. Throws std::invalid_argument for n < 2 or a
// length mismatch and std::domain_error when either input is constant.
double plcc(std::span<const double> pred, std::span<const double> gt);

// Pearson correlation of fractional ranks.
double srocc(std::span<const double> pred, std::span<const double> gt);

// Kendall tau-b, O(n log n) (Knight's merge-sort algorithm). Throws
// std::domain_error when either input is entirely tied.
double krocc(std::span<const double> pred, std::span<const double> gt);

}  // namespace clifvqa
