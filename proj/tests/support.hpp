#pragma once

#include "bcmc/codec.hpp"
#include "bcmc/device.hpp"
#include "bcmc/pipeline.hpp"
#include "bcmc/reference.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace bcmc::test {

/// Per-coordinate tolerance between dequantized pipeline vertices and the
/// unquantized serial surface: half a quantization step plus float slack.
inline constexpr double kVertexTolerance = 0.5 * (4.0 / 1023.0) + 1e-5;

std::vector<std::uint32_t> random_u32(std::size_t n, std::uint64_t seed, std::uint32_t bound);
std::vector<std::uint32_t> random_mask(std::size_t n, std::uint64_t seed, double density);

/// Random block whose values span several binary orders of magnitude.
Block random_block(std::mt19937_64& gen);

struct MatchReport {
    bool ok = false;
    std::size_t oracle_triangles = 0;
    std::size_t pipeline_triangles = 0;
    double max_deviation = 0.0;
    std::string detail;
};

/// Matches pipeline triangles to oracle triangles keyed by owning block and
/// cell: both sides list a block's triangles in cell order, then table order.
MatchReport match_surfaces(const reference::TriangleSoup& oracle, std::span<const PackedVertex> vertices,
                           const BlockGrid& grid, double tolerance = kVertexTolerance);

/// Every intermediate buffer of a manually staged pipeline run, keyed by
/// "<kernel>/<frame>". Floats are stored as their bit patterns.
std::map<std::string, std::vector<std::uint32_t>> staged_run(Backend backend, const CompressedVolume& cv,
                                                              double cache_fraction,
                                                              const std::vector<float>& isovalues);

struct FuzzSummary {
    std::map<std::string, std::size_t> cases;      ///< kernel -> cases compared
    std::map<std::string, std::size_t> mismatches;  ///< kernel -> differing cases
    std::size_t total_cases() const;
    std::size_t total_mismatches() const;
};

/// Runs every kernel on both executors over randomized inputs and compares
/// the output buffers element-wise.
FuzzSummary backend_fuzz(std::uint64_t seed, std::size_t rounds);

} // namespace bcmc::test
