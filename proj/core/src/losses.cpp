// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/losses.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace clifvqa {
namespace {

void check_lengths(std::span<const double> pred, std::span<const double> gt, std::size_t min_len) {
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("loss: length mismatch (" + std::to_string(pred.size()) + " predictions, " +
                                std::to_string(gt.size()) + " targets)");
  }
  if (pred.size() < min_len) {
    throw std::invalid_argument("loss: needs at least " + std::to_string(min_len) + " samples");
  }
}

}  // namespace

LossGrad monotonicity_loss(std::span<const double> pred, std::span<const double> gt) {
  check_lengths(pred, gt, 1);
  const std::size_t m = pred.size();
  const double norm = 1.0 / static_cast<double>(m * m);
  LossGrad out{0.0, std::vector<double>(m, 0.0)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double f = gt[i] >= gt[j] ? 1.0 : -1.0;
      const double margin = std::abs(gt[i] - gt[j]) - f * (pred[i] - pred[j]);
      if (margin > 0.0) {
        out.value += margin;
        out.grad[i] -= f * norm;
        out.grad[j] += f * norm;
      }
    }
  }
  out.value *= norm;
  return out;
}

LossGrad linearity_loss(std::span<const double> pred, std::span<const double> gt) {
  check_lengths(pred, gt, 2);
  const std::size_t m = pred.size();
  double pred_mean = 0.0, gt_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    pred_mean += pred[i];
    gt_mean += gt[i];
  }
  pred_mean /= static_cast<double>(m);
  gt_mean /= static_cast<double>(m);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = pred[i] - pred_mean, dy = gt[i] - gt_mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  LossGrad out{0.5, std::vector<double>(m, 0.0)};
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    spdlog::warn("linearity loss: zero-variance {}; correlation undefined, using 0.5",
                 sxx > 0.0 ? "targets" : "predictions");
    return out;
  }
  const double denom = std::sqrt(sxx * syy);
  const double r = sxy / denom;
  out.value = (1.0 - r) / 2.0;
  // dr/dp_i = (y_i - ybar) / sqrt(Sxx Syy) - r (x_i - xbar) / Sxx
  for (std::size_t i = 0; i < m; ++i) {
    const double dr = (gt[i] - gt_mean) / denom - r * (pred[i] - pred_mean) / sxx;
    out.grad[i] = -0.5 * dr;
  }
  return out;
}

TotalLoss total_loss(std::span<const double> pred, std::span<const double> gt, double alpha, double beta) {
  const auto mon = monotonicity_loss(pred, gt);
  const auto lin = linearity_loss(pred, gt);
  TotalLoss out;
  out.mon = mon.value;
  out.lin = lin.value;
  out.total = alpha * mon.value + beta * lin.value;
  out.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) out.grad[i] = alpha * mon.grad[i] + beta * lin.grad[i];
  return out;
}

}  // namespace clifvqa
