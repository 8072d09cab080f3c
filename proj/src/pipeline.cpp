#include "bcmc/pipeline.hpp"

#include "bcmc/mc_tables.hpp"
#include "bcmc/primitives.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace bcmc {

namespace {

constexpr std::uint32_t kThreads = kBlockVoxels;
constexpr std::uint32_t kTileEdge = kBlockEdge + 1;
constexpr std::uint32_t kReduceSteps = 6; // log2(kThreads)

struct TileShared {
    std::array<float, kTileEdge * kTileEdge * kTileEdge> tile;
    std::array<std::uint32_t, 8> valid;  // neighbour at offset (o & 1, o >> 1 & 1, o >> 2) usable
    std::array<std::uint32_t, 3> extent;
    std::array<std::uint32_t, kThreads> cases;
    std::array<std::uint32_t, kThreads> a;
    std::array<std::uint32_t, kThreads> b;
};

struct Cell {
    std::uint32_t i, j, k;
    std::uint32_t crossing; // bit a set when the cell reaches into the +a neighbour
};

Cell cell_of(std::uint32_t local)
{
    Cell c{local & 3u, (local >> 2) & 3u, local >> 4, 0};
    c.crossing = (c.i == 3 ? 1u : 0u) | (c.j == 3 ? 2u : 0u) | (c.k == 3 ? 4u : 0u);
    return c;
}

std::uint32_t tile_index(std::uint32_t x, std::uint32_t y, std::uint32_t z) { return x + kTileEdge * (y + kTileEdge * z); }

/// Slot of the block at offset `o` from `bc`, or -1 if it is outside the
/// grid, inactive or not resident.
std::int32_t neighbour_slot(const SurfaceInputs& in, const BlockCoord& bc, std::uint32_t o)
{
    const auto& n = in.volume.grid.nblocks;
    const BlockCoord nc{bc[0] + (o & 1u), bc[1] + ((o >> 1) & 1u), bc[2] + ((o >> 2) & 1u)};
    if (nc[0] >= n[0] || nc[1] >= n[1] || nc[2] >= n[2]) return -1;
    const std::uint32_t id = nc[0] + n[0] * (nc[1] + n[1] * nc[2]);
    if (!in.active.span()[id]) return -1;
    return in.block_slot.span()[id];
}

BlockCoord coords_of(const BlockGrid& grid, std::uint32_t id)
{
    const auto& n = grid.nblocks;
    return {id % n[0], (id / n[0]) % n[1], id / (n[0] * n[1])};
}

// Phase 0 of every surface kernel: the block's own voxel plus whichever
// neighbour voxels this thread's cell reaches.
void load_tile(const SurfaceInputs& in, const BlockCoord& bc, std::uint32_t local, TileShared& sh)
{
    const Cell c = cell_of(local);
    auto pool = in.pool.span();
    for (std::uint32_t o = 0; o < 8; ++o) {
        if ((o & ~c.crossing) != 0) continue;
        const std::int32_t slot = neighbour_slot(in, bc, o);
        if (slot < 0) continue;
        const std::uint32_t x = c.i + (o & 1u), y = c.j + ((o >> 1) & 1u), z = c.k + ((o >> 2) & 1u);
        const std::size_t src = std::size_t(slot) * kBlockVoxels + (x & 3u) + 4 * (y & 3u) + 16 * (z & 3u);
        sh.tile[tile_index(x, y, z)] = pool[src];
    }
    if (local == 0) {
        for (std::uint32_t o = 0; o < 8; ++o) sh.valid[o] = neighbour_slot(in, bc, o) >= 0 ? 1u : 0u;
        for (std::uint32_t a = 0; a < 3; ++a) sh.extent[a] = sh.valid[1u << a] ? kTileEdge : kBlockEdge;
    }
}

bool processable(const SurfaceInputs& in, const BlockCoord& bc, std::uint32_t local, const TileShared& sh)
{
    const Cell c = cell_of(local);
    for (std::uint32_t o = 0; o < 8; ++o) {
        if ((o & ~c.crossing) == 0 && !sh.valid[o]) return false;
    }
    if (c.i + 1 >= sh.extent[0] || c.j + 1 >= sh.extent[1] || c.k + 1 >= sh.extent[2]) return false;
    const auto& dims = in.volume.dims;
    return bc[0] * 4ull + c.i + 1 < dims[0] && bc[1] * 4ull + c.j + 1 < dims[1] && bc[2] * 4ull + c.k + 1 < dims[2];
}

float corner_value(const TileShared& sh, const Cell& c, std::uint32_t corner)
{
    const auto& d = mc::kCornerOffsets[corner];
    return sh.tile[tile_index(c.i + d[0], c.j + d[1], c.k + d[2])];
}

/// MC case of this thread's cell, 0 when the cell is not processable.
std::uint32_t cell_case(const SurfaceInputs& in, const BlockCoord& bc, std::uint32_t local, const TileShared& sh)
{
    if (!processable(in, bc, local, sh)) return 0;
    const Cell c = cell_of(local);
    std::uint32_t index = 0;
    for (std::uint32_t k = 0; k < 8; ++k) {
        if (corner_value(sh, c, k) > in.isovalue) index |= 1u << k;
    }
    return index;
}

template <typename Body>
void per_block(Device& device, const SurfaceInputs& in, const Buffer<std::uint32_t>& ids, std::uint32_t n,
               std::uint32_t phases, Body&& body)
{
    auto id_list = ids.span();
    device.dispatch<TileShared>({n, kThreads, phases}, [&](const Invocation& inv, TileShared& sh, std::uint32_t phase) {
        const std::uint32_t block = id_list[inv.group];
        const BlockCoord bc = coords_of(in.volume.grid, block);
        if (phase == 0) {
            load_tile(in, bc, inv.local, sh);
        } else {
            body(inv, sh, phase, block, bc);
        }
    });
}

} // namespace

std::uint32_t quantize_coordinate(float local)
{
    const long q = std::lround(static_cast<double>(local) / kBlockEdge * kQuantMax);
    return static_cast<std::uint32_t>(std::clamp<long>(q, 0, kQuantMax));
}

PackedVertex pack_vertex(std::uint32_t qx, std::uint32_t qy, std::uint32_t qz, std::uint32_t block)
{
    return {qx | (qy << 10) | (qz << 20), block};
}

void select_active_blocks(Device& device, const DeviceVolume& volume, float isovalue, Buffer<std::uint32_t>& active)
{
    auto mins = volume.mins.span();
    auto maxs = volume.maxs.span();
    auto out = active.span();
    const auto n = volume.grid.nblocks;
    device.dispatch_threads(volume.grid.total, kThreads, [&](std::uint32_t b) {
        const BlockCoord bc = coords_of(volume.grid, b);
        std::uint32_t hit = 0;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const std::int64_t x = std::int64_t(bc[0]) + dx, y = std::int64_t(bc[1]) + dy,
                                       z = std::int64_t(bc[2]) + dz;
                    if (x < 0 || y < 0 || z < 0 || x >= n[0] || y >= n[1] || z >= n[2]) continue;
                    const auto nb = static_cast<std::size_t>(x + n[0] * (y + std::int64_t(n[1]) * z));
                    const float lo = std::min(mins[b], mins[nb]);
                    const float hi = std::max(maxs[b], maxs[nb]);
                    if (lo <= isovalue && isovalue < hi) hit = 1;
                }
        out[b] = hit;
    });
}

void mark_processable(Device& device, const SurfaceInputs& in, const Buffer<std::uint32_t>& block_ids,
                      std::uint32_t n_blocks, Buffer<std::uint32_t>& out)
{
    auto flags = out.span();
    per_block(device, in, block_ids, n_blocks, 2,
              [&](const Invocation& inv, TileShared& sh, std::uint32_t, std::uint32_t, const BlockCoord& bc) {
                  flags[inv.global] = processable(in, bc, inv.local, sh) ? 1u : 0u;
              });
}

void filter_occupied(Device& device, const SurfaceInputs& in, const Buffer<std::uint32_t>& active_ids,
                     std::uint32_t n_active, Buffer<std::uint32_t>& occupied)
{
    auto occ = occupied.span();
    per_block(device, in, active_ids, n_active, 3,
              [&](const Invocation& inv, TileShared& sh, std::uint32_t phase, std::uint32_t block,
                  const BlockCoord& bc) {
                  if (phase == 1) {
                      sh.a[inv.local] = mc::kTriangleCount[cell_case(in, bc, inv.local, sh)];
                  } else if (inv.local == 0) {
                      std::uint32_t any = 0;
                      for (std::uint32_t t = 0; t < kThreads; ++t) any |= sh.a[t];
                      occ[block] = any != 0 ? 1u : 0u;
                  }
              });
}

void count_block_vertices(Device& device, const SurfaceInputs& in, const Buffer<std::uint32_t>& occupied_ids,
                          std::uint32_t n_occ, Buffer<std::uint32_t>& counts)
{
    auto out = counts.span();
    per_block(device, in, occupied_ids, n_occ, 2 + kReduceSteps,
              [&](const Invocation& inv, TileShared& sh, std::uint32_t phase, std::uint32_t, const BlockCoord& bc) {
                  const std::uint32_t l = inv.local;
                  if (phase == 1) {
                      sh.a[l] = 3u * mc::kTriangleCount[cell_case(in, bc, l, sh)];
                      return;
                  }
                  // Tree reduction; the last step leaves the sum in a[0].
                  const std::uint32_t stride = (kThreads / 2) >> (phase - 2);
                  if (l < stride) sh.a[l] += sh.a[l + stride];
                  if (stride == 1 && l == 0) out[inv.group] = sh.a[0];
              });
}

void compute_vertices(Device& device, const SurfaceInputs& in, const Buffer<std::uint32_t>& occupied_ids,
                      std::uint32_t n_occ, const Buffer<std::uint32_t>& offsets, Buffer<std::uint32_t>& vertices)
{
    auto base = offsets.span();
    auto out = vertices.span();
    per_block(device, in, occupied_ids, n_occ, 3 + kReduceSteps,
              [&](const Invocation& inv, TileShared& sh, std::uint32_t phase, std::uint32_t block,
                  const BlockCoord& bc) {
                  const std::uint32_t l = inv.local;
                  if (phase == 1) {
                      sh.cases[l] = cell_case(in, bc, l, sh);
                      sh.a[l] = 3u * mc::kTriangleCount[sh.cases[l]];
                      return;
                  }
                  if (phase < 2 + kReduceSteps) {
                      // Hillis-Steele inclusive scan, ping-ponging between a and b.
                      const std::uint32_t step = phase - 2;
                      const std::uint32_t stride = 1u << step;
                      auto& src = step % 2 == 0 ? sh.a : sh.b;
                      auto& dst = step % 2 == 0 ? sh.b : sh.a;
                      dst[l] = src[l] + (l >= stride ? src[l - stride] : 0u);
                      return;
                  }
                  const auto& inclusive = kReduceSteps % 2 == 0 ? sh.a : sh.b;
                  std::size_t v = std::size_t{base[inv.group]} + (l > 0 ? inclusive[l - 1] : 0u);
                  const std::uint32_t cube = sh.cases[l];
                  const Cell c = cell_of(l);
                  const auto& tri = mc::kTriTable[cube];
                  for (std::uint32_t e = 0; e < 3u * mc::kTriangleCount[cube]; ++e, ++v) {
                      const auto& corners = mc::kEdgeCorners[static_cast<std::size_t>(tri[e])];
                      const float v0 = corner_value(sh, c, corners[0]);
                      const float v1 = corner_value(sh, c, corners[1]);
                      const float t = (in.isovalue - v0) / (v1 - v0);
                      const auto& d0 = mc::kCornerOffsets[corners[0]];
                      const auto& d1 = mc::kCornerOffsets[corners[1]];
                      const std::array<std::uint32_t, 3> cell{c.i, c.j, c.k};
                      std::array<std::uint32_t, 3> q{};
                      for (std::uint32_t a = 0; a < 3; ++a) {
                          const float p0 = static_cast<float>(cell[a] + d0[a]);
                          const float p1 = static_cast<float>(cell[a] + d1[a]);
                          q[a] = quantize_coordinate(p0 + t * (p1 - p0));
                      }
                      const PackedVertex pv = pack_vertex(q[0], q[1], q[2], block);
                      out[2 * v] = pv.word0;
                      out[2 * v + 1] = pv.word1;
                  }
              });
}

IsosurfacePipeline::IsosurfacePipeline(Device& device, const CompressedVolume& cv, PipelineOptions options)
    : device_(device),
      volume_(upload_volume(device, cv)),
      cache_(device, volume_, options.cache_fraction),
      total_(cv.grid.total),
      active_(device.create_buffer<std::uint32_t>(total_)),
      active_offsets_(device.create_buffer<std::uint32_t>(total_)),
      active_ids_(device.create_buffer<std::uint32_t>(total_)),
      occupied_(device.create_buffer<std::uint32_t>(total_)),
      occupied_offsets_(device.create_buffer<std::uint32_t>(total_)),
      occupied_ids_(device.create_buffer<std::uint32_t>(total_)),
      block_counts_(device.create_buffer<std::uint32_t>(total_)),
      block_offsets_(device.create_buffer<std::uint32_t>(total_)),
      scan_total_(device.create_buffer<std::uint32_t>(1)),
      vertices_(device.create_buffer<std::uint32_t>(0))
{
}

SurfaceResult IsosurfacePipeline::compute_surface(float isovalue, bool download_vertices)
{
    SurfaceResult result;
    FrameStats& st = result.stats;
    st.isovalue = isovalue;

    const auto inputs = [&] {
        return SurfaceInputs{volume_, active_, cache_.block_slots(), cache_.pool(), isovalue};
    };

    CommandList commands;
    commands.record("select_active", [&](Device& d) {
        select_active_blocks(d, volume_, isovalue, active_);
        exclusive_scan(d, active_, total_, active_offsets_, scan_total_);
        st.n_active = d.read_scalar(scan_total_);
        stream_compact_ids(d, active_, active_offsets_, total_, active_ids_);
    });
    commands.record("cache_update", [&](Device&) {
        const CacheUpdateResult u = cache_.update(active_, st.n_active);
        st.n_new = u.n_new;
        st.hit_rate = u.hit_rate;
        st.cache_grew = u.grew;
    });
    commands.record("filter_occupied", [&](Device& d) {
        auto occ = occupied_.span();
        d.dispatch_threads(total_, kThreads, [&](std::uint32_t b) { occ[b] = 0; });
        filter_occupied(d, inputs(), active_ids_, st.n_active, occupied_);
        exclusive_scan(d, occupied_, total_, occupied_offsets_, scan_total_);
        st.n_occ = d.read_scalar(scan_total_);
        stream_compact_ids(d, occupied_, occupied_offsets_, total_, occupied_ids_);
    });
    commands.record("count_vertices", [&](Device& d) {
        count_block_vertices(d, inputs(), occupied_ids_, st.n_occ, block_counts_);
        exclusive_scan(d, block_counts_, st.n_occ, block_offsets_, scan_total_);
        st.vertex_count = d.read_scalar(scan_total_);
        if (st.vertex_count > vertex_capacity_) {
            const std::size_t grown = std::max<std::size_t>(st.vertex_count, vertex_capacity_ + vertex_capacity_ / 2);
            const std::size_t capacity = (grown + 63) / 64 * 64;
            vertices_ = d.create_buffer<std::uint32_t>(2 * capacity);
            vertex_capacity_ = capacity;
        }
    });
    commands.record("compute_vertices", [&](Device& d) {
        compute_vertices(d, inputs(), occupied_ids_, st.n_occ, block_offsets_, vertices_);
    });

    try {
        st.passes = device_.submit(commands);
    } catch (const OutOfMemoryError& e) {
        st.cache_bytes = cache_.pool_bytes();
        throw SurfaceOutOfMemoryError(e.what(), st);
    }
    for (const auto& p : st.passes) st.total_ms += p.ms;
    st.cache_bytes = cache_.pool_bytes();

    result.vertex_count = st.vertex_count;
    if (download_vertices && st.vertex_count > 0) {
        const auto words = device_.download(vertices_, 2 * std::size_t{st.vertex_count});
        result.vertices.resize(st.vertex_count);
        for (std::size_t v = 0; v < st.vertex_count; ++v) result.vertices[v] = {words[2 * v], words[2 * v + 1]};
    }
    return result;
}

} // namespace bcmc
