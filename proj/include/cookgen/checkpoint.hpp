// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "cookgen/model.hpp"

namespace cookgen {

// Single-file format: one JSON header line (format_version, variant,
// dimensions, ordered tensor manifest) followed by the tensors as raw
// little-endian 32-bit floats concatenated in manifest order. Values are
// f64 in memory, so a round-trip costs one f32 rounding.
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace cookgen
