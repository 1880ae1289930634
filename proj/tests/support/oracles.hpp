// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent reference implementations for tests: straightforward
// definitions, quadratic where that is the obvious formulation.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace clifvqa::testing {

// rank_i = 1 + #{j : v_j < v_i} + (#{j : v_j == v_i} - 1) / 2
inline std::vector<double> oracle_ranks(std::span<const double> v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (double x : v) {
      if (x < v[i]) less += 1.0;
      if (x == v[i]) equal += 1.0;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double oracle_pearson(std::span<const double> a, std::span<const double> b) {
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

inline double oracle_spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = oracle_ranks(a), rb = oracle_ranks(b);
  return oracle_pearson(ra, rb);
}

// Kendall tau-b by enumerating every unordered pair.
inline double oracle_kendall(std::span<const double> a, std::span<const double> b) {
  double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      pairs += 1;
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0) ties_a += 1;
      if (db == 0) ties_b += 1;
      if (da != 0 && db != 0) (da * db > 0 ? concordant : discordant) += 1;
    }
  return (concordant - discordant) / std::sqrt((pairs - ties_a) * (pairs - ties_b));
}

// Pairwise hinge summed over all ordered pairs, divided by m^2.
inline double oracle_loss_mon(std::span<const double> pred, std::span<const double> gt) {
  double sum = 0;
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const double f = gt[i] >= gt[j] ? 1.0 : -1.0;
      sum += std::max(0.0, std::abs(gt[i] - gt[j]) - f * (pred[i] - pred[j]));
    }
  return sum / static_cast<double>(gt.size() * gt.size());
}

// Central differences of f with respect to every entry of x.
inline std::vector<double> numeric_gradient(const std::function<double()>& f, std::span<double> x,
                                            double eps = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + eps;
    const double up = f();
    x[i] = keep - eps;
    const double down = f();
    x[i] = keep;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

// |a - b| relative to the larger magnitude, floored so exact zeros compare sanely.
inline double relative_error(double a, double b, double floor = 1e-4) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace clifvqa::testing
