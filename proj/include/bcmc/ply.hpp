#pragma once

#include <filesystem>
#include <ostream>
#include <span>

namespace bcmc {

/// Binary little-endian PLY of a triangle soup: float x, y, z per vertex and
/// faces (3i, 3i + 1, 3i + 2).
void write_ply(std::ostream& out, std::span<const float> positions);
void write_ply(const std::filesystem::path& path, std::span<const float> positions);

} // namespace bcmc
