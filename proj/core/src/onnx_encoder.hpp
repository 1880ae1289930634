// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include "clifvqa/encoder.hpp"

namespace clifvqa::detail {

// Defined in onnx_encoder.cpp when built with ONNX Runtime; otherwise raises
// ValidationError explaining how to enable the backend.
std::unique_ptr<Encoder> make_onnx_encoder(const EncoderConfig& config);

}  // namespace clifvqa::detail
