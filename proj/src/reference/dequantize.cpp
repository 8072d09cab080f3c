#include "bcmc/error.hpp"
#include "bcmc/reference.hpp"

namespace bcmc::reference {

TriangleSoup dequantize(std::span<const PackedVertex> vertices, const BlockGrid& grid)
{
    TriangleSoup soup;
    soup.positions.reserve(vertices.size() * 3);
    for (const PackedVertex& v : vertices) {
        if (v.word0 >> 30) throw FormatError("packed vertex has nonzero reserved bits");
        if (v.word1 >= grid.total) throw FormatError("packed vertex references a block outside the grid");
        const BlockCoord b = grid.coords(v.word1);
        for (unsigned axis = 0; axis < 3; ++axis) {
            const std::uint32_t q = (v.word0 >> (10 * axis)) & 0x3ffu;
            soup.positions.push_back(float(b[axis] * kBlockEdge) + float(q) / float(kQuantMax) * float(kBlockEdge));
        }
    }
    return soup;
}

} // namespace bcmc::reference
