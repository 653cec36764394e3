#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sparseview/field.h"

namespace sparseview {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout, all integers and doubles little-endian:
//   "SVCK" magic, u32 version,
//   i32 trunk_layers, i32 trunk_width, i32 position_frequencies,
//   i32 direction_frequencies, f64 position_scale,
//   u32 array count, then per array:
//     u32 name length, name bytes, u32 rank, u64 dims[rank], f64 values[].
std::vector<std::uint8_t> serialize_checkpoint(const FieldParams& params);
FieldParams deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const FieldParams& params);
FieldParams load_checkpoint(const std::filesystem::path& path);

}  // namespace sparseview
