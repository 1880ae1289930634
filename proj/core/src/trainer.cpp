// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/trainer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "clifvqa/error.hpp"
#include "clifvqa/hashing.hpp"
#include "clifvqa/losses.hpp"
#include "clifvqa/metrics.hpp"

namespace clifvqa {

void TrainConfig::validate() const {
  if (alpha < 0.0 || beta < 0.0 || !(alpha + beta > 0.0)) throw ValidationError("train.alpha/beta must be >= 0 with a positive sum");
  if (lr_backbone < 0.0 || lr_other < 0.0) throw ValidationError("learning rates must be non-negative");
  if (weight_decay < 0.0) throw ValidationError("train.weight_decay must be non-negative");
  if (batch < 2) throw ValidationError("train.batch must be >= 2 (the linearity loss is a batch correlation)");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"alpha", alpha},           {"beta", beta},     {"lr_backbone", lr_backbone},
          {"lr_other", lr_other},     {"batch", batch},   {"epochs", epochs},
          {"seed", seed},             {"weight_decay", weight_decay}, {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2}, {"adam_eps", adam_eps}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.alpha = j.at("alpha").get<double>();
  c.beta = j.at("beta").get<double>();
  c.lr_backbone = j.at("lr_backbone").get<double>();
  c.lr_other = j.at("lr_other").get<double>();
  c.batch = j.at("batch").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  return c;
}

MosScaler::MosScaler(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(hi_ > lo_)) throw std::invalid_argument("MosScaler needs hi > lo");
}

MosScaler MosScaler::fit(std::span<const double> mos) {
  if (mos.empty()) throw std::invalid_argument("MosScaler::fit on an empty set");
  const auto [lo, hi] = std::minmax_element(mos.begin(), mos.end());
  if (*hi == *lo) {
    spdlog::warn("all training MOS values equal {}; using a unit range", *lo);
    return MosScaler(*lo, *lo + 1.0);
  }
  return MosScaler(*lo, *hi);
}

OutputCalibration OutputCalibration::fit(std::span<const double> raw, std::span<const double> target) {
  if (raw.size() != target.size() || raw.empty()) throw std::invalid_argument("calibration needs paired, non-empty scores");
  const auto n = static_cast<double>(raw.size());
  const double mx = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
  const double my = std::accumulate(target.begin(), target.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    sxx += (raw[i] - mx) * (raw[i] - mx);
    sxy += (raw[i] - mx) * (target[i] - my);
  }
  OutputCalibration c;
  if (sxx == 0.0) {
    c.scale = 0.0;
  } else if (sxy <= 0.0) {
    // Never flip the ranking: an anti-correlated fit keeps unit slope.
    c.scale = 1.0;
  } else {
    c.scale = sxy / sxx;
  }
  c.offset = my - c.scale * mx;
  return c;
}

AdamW::AdamW(std::vector<Parameter*> params, const TrainConfig& config) : params_(std::move(params)), config_(config) {
  for (auto* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void AdamW::step() {
  ++step_;
  const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    if (!p.trainable) continue;
    const double lr = p.group == ParamGroup::kBackbone ? config_.lr_backbone : config_.lr_other;
    auto w = p.value.data();
    auto g = p.grad.data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      if (lr == 0.0) continue;
      w[i] *= 1.0 - lr * config_.weight_decay;
      w[i] -= lr * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + config_.adam_eps);
    }
  }
}

namespace {

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch, SplitMix64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i - 1)]);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch)));
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

double safe_srocc(std::span<const double> a, std::span<const double> b) {
  try {
    return srocc(a, b);
  } catch (const std::domain_error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

TrainResult fit(QualityModel& model, std::span<const VideoSample> data, const TrainConfig& config) {
  config.validate();
  if (data.size() < 2) throw ValidationError("training needs at least 2 samples");

  std::vector<double> mos;
  for (const auto& s : data) mos.push_back(s.mos);
  TrainResult result;
  result.scaler = MosScaler::fit(mos);
  std::vector<double> target(mos.size());
  for (std::size_t i = 0; i < mos.size(); ++i) target[i] = result.scaler.normalize(mos[i]);

  AdamW optimizer(model.parameters(), config);
  std::vector<QualityModel::Tape> tapes;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    SplitMix64 rng(derive_seed(config.seed, epoch));
    const auto batches = make_batches(data.size(), config.batch, rng);
    EpochLog log;
    log.epoch = epoch + 1;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& idx = batches[b];
      tapes.assign(idx.size(), {});
      std::vector<double> pred(idx.size()), gt(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        pred[k] = model.forward(data[idx[k]], &tapes[k]);
        gt[k] = target[idx[k]];
      }
      const auto loss = total_loss(pred, gt, config.alpha, config.beta);
      if (!std::isfinite(loss.total)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch + 1 << ", batch " << b + 1 << " (mon=" << loss.mon
            << ", lin=" << loss.lin << "); first sample '" << data[idx.front()].video_id << "'";
        throw std::runtime_error(msg.str());
      }
      model.zero_grad();
      for (std::size_t k = 0; k < idx.size(); ++k) model.backward(tapes[k], loss.grad[k]);
      optimizer.step();
      log.total += loss.total;
      log.mon += loss.mon;
      log.lin += loss.lin;
    }
    const auto nb = static_cast<double>(batches.size());
    log.total /= nb;
    log.mon /= nb;
    log.lin /= nb;
    std::vector<double> scores;
    for (const auto& s : data) scores.push_back(model.forward(s));
    log.train_srocc = safe_srocc(scores, target);
    spdlog::debug("epoch {}: loss {:.6f} (mon {:.6f}, lin {:.6f}) train SROCC {:.4f}", log.epoch, log.total, log.mon,
                  log.lin, log.train_srocc);
    result.log.push_back(log);
  }
  std::vector<double> raw;
  for (const auto& s : data) raw.push_back(model.forward(s));
  result.calibration = OutputCalibration::fit(raw, target);
  return result;
}

std::vector<double> predict(const QualityModel& model, std::span<const VideoSample> data, const MosScaler& scaler,
                            const OutputCalibration& calibration) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(scaler.denormalize(calibration.apply(model.forward(s))));
  return out;
}

std::string format_log_csv(const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,total,mon,lin,train_srocc\n";
  for (const auto& e : log) out << e.epoch << ',' << e.total << ',' << e.mon << ',' << e.lin << ',' << e.train_srocc << '\n';
  return out.str();
}

}  // namespace clifvqa
