// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/splits.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "clifvqa/error.hpp"
#include "clifvqa/hashing.hpp"
#include "clifvqa/metrics.hpp"

namespace clifvqa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename F>
double defined_or_nan(const char* name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    spdlog::warn("{} undefined: {}", name, e.what());
    return kNaN;
  }
}

double nan_mean(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double nan_median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

template <typename Reduce>
EvalReport summarize(std::span<const EvalReport> reports, Reduce reduce) {
  std::vector<double> s, p, k, n;
  for (const auto& r : reports) {
    s.push_back(r.srocc);
    p.push_back(r.plcc);
    k.push_back(r.krocc);
    n.push_back(static_cast<double>(r.n));
  }
  EvalReport out;
  out.srocc = reduce(s);
  out.plcc = reduce(p);
  out.krocc = reduce(k);
  out.n = reports.empty() ? 0 : static_cast<std::size_t>(std::llround(reduce(n)));
  return out;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

EvalReport evaluate(std::span<const double> pred, std::span<const double> mos, std::size_t split_id) {
  if (pred.size() != mos.size()) throw std::invalid_argument("evaluate: prediction/label length mismatch");
  EvalReport r;
  r.n = pred.size();
  r.split_id = split_id;
  r.srocc = defined_or_nan("SROCC", [&] { return srocc(pred, mos); });
  r.plcc = defined_or_nan("PLCC", [&] { return plcc(pred, mos); });
  r.krocc = defined_or_nan("KROCC", [&] { return krocc(pred, mos); });
  return r;
}

void SplitConfig::validate() const {
  if (splits == 0) throw ValidationError("eval.splits must be >= 1");
  if (!(train_frac > 0.0 && train_frac <= 1.0)) throw ValidationError("eval.train_frac must lie in (0, 1]");
}

std::vector<Split> make_splits(std::size_t n, const SplitConfig& config) {
  config.validate();
  if (n < 10) throw ValidationError("random splits need at least 10 videos, got " + std::to_string(n));
  const auto n_train = static_cast<std::size_t>(std::llround(config.train_frac * static_cast<double>(n)));
  if (n_train >= n) throw ValidationError("empty test split (train_frac " + std::to_string(config.train_frac) + " of " + std::to_string(n) + " videos)");
  if (n_train < 2) throw ValidationError("training split has fewer than 2 videos");
  std::vector<Split> out;
  for (std::size_t s = 0; s < config.splits; ++s) {
    SplitMix64 rng(derive_seed(config.seed, 1000 + s));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i - 1)]);
    Split split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    out.push_back(std::move(split));
  }
  return out;
}

SplitSummary run_splits(std::span<const VideoSample> data, const ModelConfig& model, const TrainConfig& train,
                        const SplitConfig& config) {
  const auto splits = make_splits(data.size(), config);
  SplitSummary summary;
  for (std::size_t s = 0; s < splits.size(); ++s) {
    std::vector<VideoSample> train_set, test_set;
    for (auto i : splits[s].train) train_set.push_back(data[i]);
    for (auto i : splits[s].test) test_set.push_back(data[i]);
    ModelConfig mc = model;
    mc.seed = derive_seed(model.seed, 2000 + s);
    TrainConfig tc = train;
    tc.seed = derive_seed(train.seed, 3000 + s);
    QualityModel m(mc);
    const auto result = fit(m, train_set, tc);
    const auto pred = predict(m, test_set, result.scaler, result.calibration);
    std::vector<double> mos;
    for (const auto& v : test_set) mos.push_back(v.mos);
    summary.reports.push_back(evaluate(pred, mos, s));
    spdlog::info("split {}: SROCC {:.4f} PLCC {:.4f} KROCC {:.4f} (n={})", s, summary.reports.back().srocc,
                 summary.reports.back().plcc, summary.reports.back().krocc, summary.reports.back().n);
  }
  summary.mean = summarize_mean(summary.reports);
  summary.median = summarize_median(summary.reports);
  return summary;
}

EvalReport summarize_mean(std::span<const EvalReport> reports) { return summarize(reports, nan_mean); }
EvalReport summarize_median(std::span<const EvalReport> reports) { return summarize(reports, nan_median); }

nlohmann::json report_json(const EvalReport& r) {
  return {{"split_id", r.split_id},
          {"n", r.n},
          {"srocc", number_or_null(r.srocc)},
          {"plcc", number_or_null(r.plcc)},
          {"krocc", number_or_null(r.krocc)}};
}

nlohmann::json summary_json(const SplitSummary& s) {
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& r : s.reports) splits.push_back(report_json(r));
  auto strip = [](const EvalReport& r) {
    return nlohmann::json{{"srocc", number_or_null(r.srocc)}, {"plcc", number_or_null(r.plcc)},
                          {"krocc", number_or_null(r.krocc)}};
  };
  return {{"splits", splits}, {"mean", strip(s.mean)}, {"median", strip(s.median)}};
}

std::string reports_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out.precision(10);
  out << "split_id,n,srocc,plcc,krocc\n";
  for (const auto& r : reports) out << r.split_id << ',' << r.n << ',' << r.srocc << ',' << r.plcc << ',' << r.krocc << '\n';
  return out.str();
}

std::string summary_csv(const SplitSummary& s) {
  std::ostringstream out;
  out.precision(10);
  out << "split,n,srocc,plcc,krocc\n";
  for (const auto& r : s.reports) out << r.split_id << ',' << r.n << ',' << r.srocc << ',' << r.plcc << ',' << r.krocc << '\n';
  out << "mean," << s.mean.n << ',' << s.mean.srocc << ',' << s.mean.plcc << ',' << s.mean.krocc << '\n';
  out << "median," << s.median.n << ',' << s.median.srocc << ',' << s.median.plcc << ',' << s.median.krocc << '\n';
  return out.str();
}

}  // namespace clifvqa
