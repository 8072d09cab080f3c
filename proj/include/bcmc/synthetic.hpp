#pragma once

#include "bcmc/volume.hpp"

#include <cstdint>

namespace bcmc {

/// Radial field f(p) = n/2 - |p - c| on an n^3 grid centred at c; the level
/// set at v is a sphere of radius n/2 - v, so surfaces for higher values
/// nest inside those for lower values.
VolumeF32 make_nested_spheres(std::uint32_t n);

/// Independent uniform [0, 1) samples from a seeded generator.
VolumeF32 make_random_volume(const Extent3& dims, std::uint64_t seed);

} // namespace bcmc
