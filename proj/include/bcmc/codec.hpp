#pragma once

// Fixed-rate transform codec for independent 4^3 float blocks.
//
// Block layout (LSB-first bit order, block-aligned bytes):
//   bit 0        nonzero flag; a zero block stops here
//   bits 1..8    common exponent biased by 127
//   bits 9..     negabinary coefficient bit planes, MSB plane first, each
//                plane as its first n bits verbatim followed by group tests
// and zero padding to exactly 64 * rate bits.

#include "bcmc/volume.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bcmc {

inline constexpr std::uint32_t kMinRate = 2;
inline constexpr std::uint32_t kMaxRate = 32;
inline constexpr std::uint32_t kExponentBits = 9;
inline constexpr int kExponentBias = 127;

using Block = std::array<float, kBlockVoxels>;

/// Bytes occupied by one encoded block.
constexpr std::size_t block_bytes(std::uint32_t rate_bits) { return (std::size_t{kBlockVoxels} * rate_bits + 7) / 8; }

/// Coefficient order from low to high sequency; entry i is the row-major
/// index of the i-th coefficient emitted.
const std::array<std::uint8_t, kBlockVoxels>& sequency_order();

/// Throws ParameterError for rates outside [kMinRate, kMaxRate].
void check_rate(std::uint32_t rate_bits);

/// Encodes into `out`, which must hold block_bytes(rate_bits) bytes.
void encode_block(std::span<const float, kBlockVoxels> values, std::uint32_t rate_bits, std::span<std::byte> out);
std::vector<std::byte> encode_block(std::span<const float, kBlockVoxels> values, std::uint32_t rate_bits);

/// Throws DecodeError if `payload` is shorter than block_bytes(rate_bits).
Block decode_block(std::span<const std::byte> payload, std::uint32_t rate_bits);

struct CompressedVolume {
    Extent3 dims{};
    Extent3 padded_dims{};
    BlockGrid grid;
    ScalarType source_type = ScalarType::f32;
    std::uint32_t rate_bits = 0;
    ValueRange global_range;
    /// Ranges of the decoded blocks, i.e. the data the surface is computed from.
    BlockRanges ranges;
    std::vector<std::byte> bitstream;

    std::span<const std::byte> block_payload(std::uint32_t id) const;
};

CompressedVolume compress_volume(const VolumeF32& vol, std::uint32_t rate_bits,
                                 ScalarType source_type = ScalarType::f32);

/// Decodes every block into a padded volume with the container's extents.
VolumeF32 decompress_volume(const CompressedVolume& cv);

} // namespace bcmc
