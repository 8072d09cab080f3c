#pragma once

// Data-parallel building blocks. Device-level entry points operate on the
// first `n` elements of possibly larger buffers; host-level overloads upload,
// run the same kernels, and download for convenience and testing.

#include "bcmc/device.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace bcmc {

inline constexpr std::uint32_t kScanGroupSize = 256;
inline constexpr std::uint32_t kSortThreads = 64;
inline constexpr std::uint32_t kSortItemsPerThread = 4;
inline constexpr std::uint32_t kRadixBits = 4;

/// offsets[i] = sum of input[0..i); total[0] = sum of input[0..n).
void exclusive_scan(Device& device, const Buffer<std::uint32_t>& input, std::size_t n,
                    Buffer<std::uint32_t>& offsets, Buffer<std::uint32_t>& total);

/// out[offsets[i]] = i wherever mask[i] == 1.
void stream_compact_ids(Device& device, const Buffer<std::uint32_t>& mask, const Buffer<std::uint32_t>& offsets,
                        std::size_t n, Buffer<std::uint32_t>& out);

/// out[offsets[i]] = values[i] wherever mask[i] == 1.
void stream_compact(Device& device, const Buffer<std::uint32_t>& mask, const Buffer<std::uint32_t>& offsets,
                    const Buffer<std::uint32_t>& values, std::size_t n, Buffer<std::uint32_t>& out);

/// Stable sort of the first `n` (key, value) pairs by descending key.
void sort_by_key_desc(Device& device, Buffer<std::uint32_t>& keys, Buffer<std::uint32_t>& values, std::size_t n);

struct ScanResult {
    std::vector<std::uint32_t> offsets;
    std::uint32_t total = 0;
};

ScanResult exclusive_scan(Device& device, std::span<const std::uint32_t> input);
std::vector<std::uint32_t> stream_compact_ids(Device& device, std::span<const std::uint32_t> mask,
                                              std::span<const std::uint32_t> offsets);
std::vector<std::uint32_t> stream_compact(Device& device, std::span<const std::uint32_t> mask,
                                          std::span<const std::uint32_t> offsets,
                                          std::span<const std::uint32_t> values);
/// Throws ParameterError when the lengths differ.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
sort_by_key_desc(Device& device, std::span<const std::uint32_t> keys, std::span<const std::uint32_t> values);

} // namespace bcmc
