// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint container:
//   "VNRL" | u32 format version | u32 tensor count |
//   per tensor: u32 name length | name bytes | u32 rank | u64 dims[rank] | f64 values
// All integers and floats little-endian.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vesnav/nn/tensor.hpp"

namespace vesnav::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

std::vector<std::uint8_t> encode_tensors(const NamedTensors& tensors);
NamedTensors decode_tensors(const std::vector<std::uint8_t>& bytes);

void save_tensors(const std::string& path, const NamedTensors& tensors);
NamedTensors load_tensors(const std::string& path);

}  // namespace vesnav::nn
