#include "bcmc/synthetic.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace bcmc {

VolumeF32 make_nested_spheres(std::uint32_t n)
{
    const double c = (n - 1) / 2.0;
    const double radius = n / 2.0;
    std::vector<float> v(std::size_t{n} * n * n);
    for (std::uint32_t z = 0; z < n; ++z)
        for (std::uint32_t y = 0; y < n; ++y)
            for (std::uint32_t x = 0; x < n; ++x) {
                const double d = std::sqrt((x - c) * (x - c) + (y - c) * (y - c) + (z - c) * (z - c));
                v[x + std::size_t{n} * (y + std::size_t{n} * z)] = static_cast<float>(radius - d);
            }
    return make_volume({n, n, n}, v);
}

VolumeF32 make_random_volume(const Extent3& dims, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::vector<float> v(dims[0] * dims[1] * dims[2]);
    for (float& f : v) f = static_cast<float>(gen() >> 40) * 0x1p-24f;
    return make_volume(dims, v);
}

} // namespace bcmc
