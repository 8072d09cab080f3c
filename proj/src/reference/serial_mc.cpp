#include "bcmc/mc_tables.hpp"
#include "bcmc/reference.hpp"

namespace bcmc::reference {

TriangleSoup serial_marching_cubes(const VolumeF32& vol, float isovalue)
{
    TriangleSoup soup;
    if (vol.dims[0] < 2 || vol.dims[1] < 2 || vol.dims[2] < 2) return soup;

    for (std::uint32_t z = 0; z + 1 < vol.dims[2]; ++z)
        for (std::uint32_t y = 0; y + 1 < vol.dims[1]; ++y)
            for (std::uint32_t x = 0; x + 1 < vol.dims[0]; ++x) {
                std::array<float, 8> v{};
                std::array<std::array<float, 3>, 8> p{};
                unsigned cube = 0;
                for (unsigned k = 0; k < 8; ++k) {
                    const auto& o = mc::kCornerOffsets[k];
                    p[k] = {float(x + o[0]), float(y + o[1]), float(z + o[2])};
                    v[k] = vol.at(x + o[0], y + o[1], z + o[2]);
                    if (v[k] > isovalue) cube |= 1u << k;
                }
                const auto& row = mc::kTriTable[cube];
                for (unsigned e = 0; e < 16 && row[e] != -1; ++e) {
                    const auto& ends = mc::kEdgeCorners[static_cast<unsigned>(row[e])];
                    const unsigned a = ends[0], b = ends[1];
                    const float t = (isovalue - v[a]) / (v[b] - v[a]);
                    for (unsigned axis = 0; axis < 3; ++axis) {
                        soup.positions.push_back(p[a][axis] + t * (p[b][axis] - p[a][axis]));
                    }
                    if (e % 3 == 0) soup.cells.push_back({x, y, z});
                }
            }
    return soup;
}

} // namespace bcmc::reference
