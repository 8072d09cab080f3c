#pragma once

// ".bcmc" container, little-endian:
//   "BCMC" | u32 version | u64 dims[3] | u64 padded_dims[3] | u32 source scalar
//   | u32 rate_bits | f32 global_min | f32 global_max | f32 mins[total]
//   | f32 maxs[total] | bitstream

#include "bcmc/codec.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace bcmc {

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::size_t kFixedHeaderBytes = 72;

/// Header bytes including the per-block range tables.
std::size_t container_header_bytes(std::uint32_t total_blocks);
std::size_t container_size(std::uint32_t total_blocks, std::uint32_t rate_bits);

std::vector<std::byte> serialize_container(const CompressedVolume& cv);
/// Throws FormatError on bad magic, version, or truncated/oversized data.
CompressedVolume parse_container(std::span<const std::byte> bytes);

void write_container(const std::filesystem::path& path, const CompressedVolume& cv);
CompressedVolume read_container(const std::filesystem::path& path);

std::vector<std::byte> read_file(const std::filesystem::path& path);

} // namespace bcmc
