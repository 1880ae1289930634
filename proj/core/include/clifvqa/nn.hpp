// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "clifvqa/hashing.hpp"
#include "clifvqa/tensor.hpp"

namespace clifvqa {

// Exact (erf) GELU and its derivative.
double gelu(double x);
double gelu_grad(double x);

// Optimiser parameter groups; the spatial backbone trains at its own rate.
enum class ParamGroup { kBackbone, kOther };

struct Parameter {
  Parameter(std::string name, Shape shape, ParamGroup group = ParamGroup::kOther, bool trainable = true);

  std::string name;
  Tensor value;
  Tensor grad;
  ParamGroup group;
  bool trainable;

  void zero_grad() { grad.fill(0.0); }
};

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_uniform_fan_in(Tensor& t, std::size_t fan_in, SplitMix64& rng);

// y = W x + b with W [out, in].
void linear_forward(const Tensor& w, const Tensor& b, std::span<const double> x, std::span<double> y);
// dW += dy x^T, db += dy, and dx = W^T dy when dx is non-empty.
void linear_backward(const Tensor& w, std::span<const double> x, std::span<const double> dy,
                     Tensor& dw, Tensor& db, std::span<double> dx);

// Linear -> GELU -> Linear, applied independently to each input row. Shared
// weights across rows: the temporal MLP runs it per semantic channel, the
// conv head per voxel (a 1x1x1 convolution), the regressor on one row.
class TwoLayerMlp {
 public:
  struct Tape {
    std::size_t rows = 0;
    std::vector<double> input;   // [rows, in]
    std::vector<double> hidden;  // pre-activation, [rows, hidden]
  };

  TwoLayerMlp(const std::string& prefix, std::size_t in, std::size_t hidden, std::size_t out,
              ParamGroup group = ParamGroup::kOther);

  std::size_t in_dim() const { return in_; }
  std::size_t hidden_dim() const { return hidden_; }
  std::size_t out_dim() const { return out_; }

  void init(SplitMix64& rng);

  // x is [rows, in] row-major; returns [rows, out].
  std::vector<double> forward(std::span<const double> x, std::size_t rows, Tape* tape = nullptr) const;
  // Accumulates parameter gradients; returns dL/dx ([rows, in]) if want_input_grad.
  std::vector<double> backward(const Tape& tape, std::span<const double> grad_out, bool want_input_grad);

  std::vector<Parameter*> parameters() { return {&fc1_w, &fc1_b, &fc2_w, &fc2_b}; }
  std::vector<const Parameter*> parameters() const { return {&fc1_w, &fc1_b, &fc2_w, &fc2_b}; }

  Parameter fc1_w;
  Parameter fc1_b;
  Parameter fc2_w;
  Parameter fc2_b;

 private:
  std::size_t in_;
  std::size_t hidden_;
  std::size_t out_;
};

}  // namespace clifvqa
