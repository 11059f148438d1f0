#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "medfront/autodiff/tensor.hpp"

namespace medfront::autodiff {

// Binary parameter checkpoint. Layout: magic "MFCK", version u32, then one
// record per parameter: name length u32, UTF-8 name, rank u32, dims u64
// each, values f64 each — all integers and floats little-endian. Records
// run to end of file. Round-trips values bit-for-bit.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(
    const std::string& path,
    const std::vector<std::pair<std::string, Tensor>>& params);

// Loaded tensors do not require grad. Malformed or truncated files throw
// DataError naming the byte offset.
std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::string& path);

}  // namespace medfront::autodiff
