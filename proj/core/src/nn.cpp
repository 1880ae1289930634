// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include "clifvqa/nn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace clifvqa {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  return cdf + x * pdf;
}

Parameter::Parameter(std::string name_, Shape shape, ParamGroup group_, bool trainable_)
    : name(std::move(name_)), value(shape), grad(shape), group(group_), trainable(trainable_) {}

void init_uniform_fan_in(Tensor& t, std::size_t fan_in, SplitMix64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
}

void linear_forward(const Tensor& w, const Tensor& b, std::span<const double> x, std::span<double> y) {
  const std::size_t out = w.dim(0), in = w.dim(1);
  if (x.size() != in || y.size() != out || b.size() != out) {
    throw std::invalid_argument("linear_forward: size mismatch (W " + shape_to_string(w.shape()) +
                                ", x " + std::to_string(x.size()) + ")");
  }
  const double* wp = w.data().data();
  for (std::size_t o = 0; o < out; ++o) {
    double acc = b[o];
    const double* row = wp + o * in;
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void linear_backward(const Tensor& w, std::span<const double> x, std::span<const double> dy,
                     Tensor& dw, Tensor& db, std::span<double> dx) {
  const std::size_t out = w.dim(0), in = w.dim(1);
  double* dwp = dw.data().data();
  for (std::size_t o = 0; o < out; ++o) {
    const double g = dy[o];
    db[o] += g;
    if (g == 0.0) continue;
    double* row = dwp + o * in;
    for (std::size_t i = 0; i < in; ++i) row[i] += g * x[i];
  }
  if (dx.empty()) return;
  const double* wp = w.data().data();
  for (std::size_t i = 0; i < in; ++i) dx[i] = 0.0;
  for (std::size_t o = 0; o < out; ++o) {
    const double g = dy[o];
    if (g == 0.0) continue;
    const double* row = wp + o * in;
    for (std::size_t i = 0; i < in; ++i) dx[i] += g * row[i];
  }
}

TwoLayerMlp::TwoLayerMlp(const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out,
                         ParamGroup group)
    : fc1_w(prefix + ".fc1.weight", {hidden, in}, group),
      fc1_b(prefix + ".fc1.bias", {hidden}, group),
      fc2_w(prefix + ".fc2.weight", {out, hidden}, group),
      fc2_b(prefix + ".fc2.bias", {out}, group),
      in_(in),
      hidden_(hidden),
      out_(out) {
  if (in == 0 || hidden == 0 || out == 0) throw std::invalid_argument("TwoLayerMlp: zero-sized layer");
}

void TwoLayerMlp::init(SplitMix64& rng) {
  init_uniform_fan_in(fc1_w.value, in_, rng);
  init_uniform_fan_in(fc1_b.value, in_, rng);
  init_uniform_fan_in(fc2_w.value, hidden_, rng);
  init_uniform_fan_in(fc2_b.value, hidden_, rng);
}

std::vector<double> TwoLayerMlp::forward(std::span<const double> x, std::size_t rows, Tape* tape) const {
  if (x.size() != rows * in_) {
    throw std::invalid_argument("TwoLayerMlp '" + fc1_w.name + "': expected " + std::to_string(rows) + "x" +
                                std::to_string(in_) + " input, got " + std::to_string(x.size()) + " values");
  }
  std::vector<double> pre(rows * hidden_);
  std::vector<double> act(hidden_);
  std::vector<double> y(rows * out_);
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<double> h(pre.data() + r * hidden_, hidden_);
    linear_forward(fc1_w.value, fc1_b.value, x.subspan(r * in_, in_), h);
    for (std::size_t k = 0; k < hidden_; ++k) act[k] = gelu(h[k]);
    linear_forward(fc2_w.value, fc2_b.value, act, std::span<double>(y.data() + r * out_, out_));
  }
  if (tape) {
    tape->rows = rows;
    tape->input.assign(x.begin(), x.end());
    tape->hidden = std::move(pre);
  }
  return y;
}

std::vector<double> TwoLayerMlp::backward(const Tape& tape, std::span<const double> grad_out,
                                          bool want_input_grad) {
  if (grad_out.size() != tape.rows * out_) throw std::invalid_argument("TwoLayerMlp::backward: size mismatch");
  std::vector<double> dx(want_input_grad ? tape.rows * in_ : 0);
  std::vector<double> act(hidden_), dact(hidden_);
  for (std::size_t r = 0; r < tape.rows; ++r) {
    const double* h = tape.hidden.data() + r * hidden_;
    for (std::size_t k = 0; k < hidden_; ++k) act[k] = gelu(h[k]);
    linear_backward(fc2_w.value, act, grad_out.subspan(r * out_, out_), fc2_w.grad, fc2_b.grad, dact);
    for (std::size_t k = 0; k < hidden_; ++k) dact[k] *= gelu_grad(h[k]);
    std::span<double> dxr = want_input_grad ? std::span<double>(dx.data() + r * in_, in_) : std::span<double>();
    linear_backward(fc1_w.value, std::span<const double>(tape.input.data() + r * in_, in_), dact, fc1_w.grad,
                    fc1_b.grad, dxr);
  }
  return dx;
}

}  // namespace clifvqa
