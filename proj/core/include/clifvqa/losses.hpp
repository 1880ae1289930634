// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace clifvqa {

// Value plus gradient with respect to the predictions.
struct LossGrad {
  double value = 0.0;
  std::vector<double> grad;
};

// Pairwise hinge: (1/m^2) sum_ij max(0, |q_i - q_j| - f(q_i, q_j) (p_i - p_j)),
// f = +1 if q_i >= q_j else -1. Zero iff every ordered pair keeps its
// ground-truth order with at least the ground-truth gap.
LossGrad monotonicity_loss(std::span<const double> pred, std::span<const double> gt);

// (1 - PLCC(pred, gt)) / 2. Zero-variance input is defined as 0.5 (with a
// warning) and has zero gradient. Needs m >= 2.
LossGrad linearity_loss(std::span<const double> pred, std::span<const double> gt);

struct TotalLoss {
  double total = 0.0;
  double mon = 0.0;
  double lin = 0.0;
  std::vector<double> grad;
};

// alpha * monotonicity + beta * linearity.
TotalLoss total_loss(std::span<const double> pred, std::span<const double> gt, double alpha, double beta);

inline double loss_mon(std::span<const double> pred, std::span<const double> gt) {
  return monotonicity_loss(pred, gt).value;
}
inline double loss_lin(std::span<const double> pred, std::span<const double> gt) {
  return linearity_loss(pred, gt).value;
}

}  // namespace clifvqa
