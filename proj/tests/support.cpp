#include "support.hpp"

#include "bcmc/block_cache.hpp"
#include "bcmc/device_volume.hpp"
#include "bcmc/primitives.hpp"
#include "bcmc/synthetic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

namespace bcmc::test {

std::vector<std::uint32_t> random_u32(std::size_t n, std::uint64_t seed, std::uint32_t bound)
{
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::uint32_t> dist(0, bound);
    std::vector<std::uint32_t> v(n);
    for (auto& x : v) x = dist(gen);
    return v;
}

std::vector<std::uint32_t> random_mask(std::size_t n, std::uint64_t seed, double density)
{
    std::mt19937_64 gen(seed);
    std::bernoulli_distribution bit(density);
    std::vector<std::uint32_t> v(n);
    for (auto& x : v) x = bit(gen) ? 1u : 0u;
    return v;
}

Block random_block(std::mt19937_64& gen)
{
    std::uniform_real_distribution<float> unit(-1.f, 1.f);
    std::uniform_int_distribution<int> exponent(-20, 20);
    std::uniform_int_distribution<int> kind(0, 9);
    Block b{};
    const int k = kind(gen);
    if (k == 0) return b;
    const float scale = std::ldexp(1.f, exponent(gen));
    const float offset = k < 3 ? unit(gen) * scale * 4.f : 0.f;
    for (auto& v : b) v = offset + unit(gen) * scale;
    return b;
}

MatchReport match_surfaces(const reference::TriangleSoup& oracle, std::span<const PackedVertex> vertices,
                           const BlockGrid& grid, double tolerance)
{
    MatchReport r;
    r.oracle_triangles = oracle.triangle_count();
    r.pipeline_triangles = vertices.size() / 3;
    if (vertices.size() % 3 != 0) {
        r.detail = "vertex count not divisible by 3";
        return r;
    }
    if (r.oracle_triangles != r.pipeline_triangles) {
        r.detail = "triangle count " + std::to_string(r.pipeline_triangles) + " vs oracle " +
                   std::to_string(r.oracle_triangles);
        return r;
    }

    struct Key {
        std::uint32_t block;
        std::uint32_t cell;
    };
    std::vector<Key> keys(r.oracle_triangles);
    for (std::size_t t = 0; t < keys.size(); ++t) {
        const auto& c = oracle.cells[t];
        keys[t].block = grid.id({c[0] / 4, c[1] / 4, c[2] / 4});
        keys[t].cell = (c[0] % 4) + 4 * (c[1] % 4) + 16 * (c[2] % 4);
    }
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(keys[a].block, keys[a].cell) < std::tie(keys[b].block, keys[b].cell);
    });

    const reference::TriangleSoup got = reference::dequantize(vertices, grid);
    for (std::size_t t = 0; t < order.size(); ++t) {
        const std::size_t o = order[t];
        for (std::size_t v = 0; v < 3; ++v) {
            if (vertices[3 * t + v].word1 != keys[o].block) {
                r.detail = "triangle " + std::to_string(t) + " emitted by block " +
                           std::to_string(vertices[3 * t + v].word1) + ", oracle block " + std::to_string(keys[o].block);
                return r;
            }
        }
        for (std::size_t k = 0; k < 9; ++k) {
            const double d = std::fabs(double(got.positions[9 * t + k]) - double(oracle.positions[9 * o + k]));
            r.max_deviation = std::max(r.max_deviation, d);
        }
    }
    r.ok = r.max_deviation <= tolerance;
    if (!r.ok) {
        std::ostringstream s;
        s << "max deviation " << r.max_deviation << " exceeds " << tolerance;
        r.detail = s.str();
    }
    return r;
}

namespace {

std::vector<std::uint32_t> bits(std::span<const float> f)
{
    std::vector<std::uint32_t> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::bit_cast<std::uint32_t>(f[i]);
    return out;
}

std::vector<std::uint32_t> bits(std::span<const std::int32_t> v)
{
    std::vector<std::uint32_t> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<std::uint32_t>(v[i]);
    return out;
}

template <typename T>
std::vector<T> head(const Buffer<T>& b, std::size_t n)
{
    auto s = b.span();
    return {s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n)};
}

using Outputs = std::vector<std::vector<std::uint32_t>>;

/// Runs `kernel` on a fresh device of each backend and compares outputs.
template <typename Kernel>
void compare(FuzzSummary& summary, const std::string& name, Kernel&& kernel)
{
    Device gpu(Backend::gpu);
    Device cpu(Backend::cpu);
    const Outputs a = kernel(gpu);
    const Outputs b = kernel(cpu);
    ++summary.cases[name];
    summary.mismatches[name] += a != b ? 1 : 0;
}

CompressedVolume random_compressed(std::mt19937_64& gen)
{
    std::uniform_int_distribution<std::uint64_t> extent(2, 20);
    const Extent3 dims{extent(gen), extent(gen), extent(gen)};
    const std::uint32_t rates[] = {2, 4, 8};
    const std::uint32_t rate = rates[gen() % 3];
    if (gen() % 2 == 0) return compress_volume(make_random_volume(dims, gen()), rate);
    // Smooth field: a few overlapping spheres.
    std::vector<float> v(dims[0] * dims[1] * dims[2]);
    std::uniform_real_distribution<float> pos(0.f, 20.f);
    const float cx = pos(gen), cy = pos(gen), cz = pos(gen);
    for (std::uint64_t z = 0; z < dims[2]; ++z)
        for (std::uint64_t y = 0; y < dims[1]; ++y)
            for (std::uint64_t x = 0; x < dims[0]; ++x)
                v[x + dims[0] * (y + dims[1] * z)] =
                    std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy) + (z - cz) * (z - cz)) / 20.f;
    return compress_volume(make_volume(dims, v), rate);
}

/// A consistent slot/block bijection with random ages.
struct CacheFixture {
    std::vector<std::uint32_t> ages;
    std::vector<std::int32_t> slot_block;
    std::vector<std::int32_t> block_slot;
};

CacheFixture random_cache(std::mt19937_64& gen, std::uint32_t slots, std::uint32_t blocks)
{
    CacheFixture f;
    f.ages.resize(slots);
    f.slot_block.assign(slots, -1);
    f.block_slot.assign(blocks, -1);
    std::vector<std::uint32_t> ids(blocks);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), gen);
    for (std::uint32_t s = 0; s < slots; ++s) {
        const auto r = gen() % 8;
        f.ages[s] = r == 0 ? kAgeMax : r == 1 ? kAgeMax - 1 : static_cast<std::uint32_t>(gen() % 16);
        if (s < blocks && gen() % 4 != 0) {
            f.slot_block[s] = static_cast<std::int32_t>(ids[s]);
            f.block_slot[ids[s]] = static_cast<std::int32_t>(s);
        }
    }
    return f;
}

} // namespace

std::map<std::string, std::vector<std::uint32_t>> staged_run(Backend backend, const CompressedVolume& cv,
                                                              double cache_fraction,
                                                              const std::vector<float>& isovalues)
{
    std::map<std::string, std::vector<std::uint32_t>> out;
    Device d(backend);
    const DeviceVolume vol = upload_volume(d, cv);
    BlockCache cache(d, vol, cache_fraction);
    const std::uint32_t total = cv.grid.total;

    auto active = d.create_buffer<std::uint32_t>(total);
    auto active_offsets = d.create_buffer<std::uint32_t>(total);
    auto active_ids = d.create_buffer<std::uint32_t>(total);
    auto occ = d.create_buffer<std::uint32_t>(total);
    auto occ_offsets = d.create_buffer<std::uint32_t>(total);
    auto occ_ids = d.create_buffer<std::uint32_t>(total);
    auto counts = d.create_buffer<std::uint32_t>(total);
    auto offsets = d.create_buffer<std::uint32_t>(total);
    auto sum = d.create_buffer<std::uint32_t>(1);

    for (std::size_t f = 0; f < isovalues.size(); ++f) {
        const std::string tag = "/" + std::to_string(f);
        const float iso = isovalues[f];
        select_active_blocks(d, vol, iso, active);
        out["select_active" + tag] = head(active, total);
        exclusive_scan(d, active, total, active_offsets, sum);
        const std::uint32_t n_active = d.read_scalar(sum);
        stream_compact_ids(d, active, active_offsets, total, active_ids);
        out["compact_active" + tag] = head(active_ids, n_active);

        const auto u = cache.update(active, n_active);
        out["cache_update" + tag] = {u.n_new, u.grew ? 1u : 0u, cache.slot_count()};
        out["cache_block_slot" + tag] = bits(std::span<const std::int32_t>(cache.block_slot_map()));
        out["cache_slot_block" + tag] = bits(std::span<const std::int32_t>(cache.slot_blocks()));
        out["cache_ages" + tag] = cache.ages();
        out["cache_pool" + tag] = bits(std::span<const float>(cache.pool_data()));

        const SurfaceInputs in{vol, active, cache.block_slots(), cache.pool(), iso};
        auto flags = d.create_buffer<std::uint32_t>(std::size_t{n_active} * kBlockVoxels);
        mark_processable(d, in, active_ids, n_active, flags);
        out["processable" + tag] = head(flags, flags.size());

        std::fill(occ.span().begin(), occ.span().end(), 0u);
        filter_occupied(d, in, active_ids, n_active, occ);
        out["occupancy" + tag] = head(occ, total);
        exclusive_scan(d, occ, total, occ_offsets, sum);
        const std::uint32_t n_occ = d.read_scalar(sum);
        stream_compact_ids(d, occ, occ_offsets, total, occ_ids);

        count_block_vertices(d, in, occ_ids, n_occ, counts);
        out["counts" + tag] = head(counts, n_occ);
        exclusive_scan(d, counts, n_occ, offsets, sum);
        const std::uint32_t n_vertices = d.read_scalar(sum);
        auto vertices = d.create_buffer<std::uint32_t>(2 * std::size_t{n_vertices});
        compute_vertices(d, in, occ_ids, n_occ, offsets, vertices);
        out["vertices" + tag] = head(vertices, vertices.size());
    }
    return out;
}

std::size_t FuzzSummary::total_cases() const
{
    std::size_t n = 0;
    for (const auto& [k, v] : cases) n += v;
    return n;
}

std::size_t FuzzSummary::total_mismatches() const
{
    std::size_t n = 0;
    for (const auto& [k, v] : mismatches) n += v;
    return n;
}

FuzzSummary backend_fuzz(std::uint64_t seed, std::size_t rounds)
{
    FuzzSummary summary;
    std::mt19937_64 gen(seed);
    auto length = [&] {
        const auto r = gen() % 10;
        if (r == 0) return std::size_t(gen() % 4);
        if (r == 1) return std::size_t(60000 + gen() % 10000);
        return std::size_t(gen() % 3000);
    };

    for (std::size_t round = 0; round < rounds; ++round) {
        {
            const auto input = random_u32(length(), gen(), 1000);
            compare(summary, "scan", [&](Device& d) {
                auto in = d.upload(std::span<const std::uint32_t>(input));
                auto off = d.create_buffer<std::uint32_t>(input.size());
                auto tot = d.create_buffer<std::uint32_t>(1);
                exclusive_scan(d, in, input.size(), off, tot);
                return Outputs{head(off, off.size()), head(tot, 1)};
            });
        }
        {
            const std::size_t n = length();
            const auto mask = random_mask(n, gen(), double(gen() % 101) / 100.0);
            const auto values = random_u32(n, gen(), 0xffffffffu);
            compare(summary, "compact_ids", [&](Device& d) {
                const auto scan = exclusive_scan(d, mask);
                return Outputs{stream_compact_ids(d, mask, scan.offsets)};
            });
            compare(summary, "compact", [&](Device& d) {
                const auto scan = exclusive_scan(d, mask);
                return Outputs{stream_compact(d, mask, scan.offsets, values)};
            });
        }
        {
            const std::size_t n = length();
            const std::uint32_t bound = gen() % 2 ? 7u : 0xffffffffu;
            const auto keys = random_u32(n, gen(), bound);
            const auto values = random_u32(n, gen(), 0xffffffffu);
            compare(summary, "sort", [&](Device& d) {
                auto [k, v] = sort_by_key_desc(d, keys, values);
                return Outputs{k, v};
            });
        }
        {
            const std::uint32_t blocks = 1 + gen() % 600;
            const std::uint32_t slots = 1 + gen() % 300;
            const CacheFixture fx = random_cache(gen, slots, blocks);
            const auto act = random_mask(blocks, gen(), double(gen() % 101) / 100.0);
            compare(summary, "increment_slot_age", [&](Device& d) {
                auto ages = d.upload(std::span<const std::uint32_t>(fx.ages));
                auto sb = d.upload(std::span<const std::int32_t>(fx.slot_block));
                auto avail = d.create_buffer<std::uint32_t>(slots, 7u);
                increment_slot_age(d, ages, sb, avail, slots);
                return Outputs{head(ages, slots), head(avail, slots)};
            });
            compare(summary, "mark_new_blocks", [&](Device& d) {
                auto ages = d.upload(std::span<const std::uint32_t>(fx.ages));
                auto sb = d.upload(std::span<const std::int32_t>(fx.slot_block));
                auto bs = d.upload(std::span<const std::int32_t>(fx.block_slot));
                auto a = d.upload(std::span<const std::uint32_t>(act));
                auto avail = d.create_buffer<std::uint32_t>(slots);
                auto fresh = d.create_buffer<std::uint32_t>(blocks, 9u);
                increment_slot_age(d, ages, sb, avail, slots);
                mark_new_blocks(d, a, bs, ages, avail, fresh, blocks);
                return Outputs{head(ages, slots), head(avail, slots), head(fresh, blocks)};
            });

            // Host-side selection of new blocks and victim slots.
            std::vector<std::uint32_t> fresh_ids, victims;
            for (std::uint32_t b = 0; b < blocks; ++b)
                if (act[b] && fx.block_slot[b] < 0) fresh_ids.push_back(b);
            for (std::uint32_t s = 0; s < slots; ++s)
                if (fx.slot_block[s] < 0 || !act[static_cast<std::uint32_t>(fx.slot_block[s])]) victims.push_back(s);
            std::stable_sort(victims.begin(), victims.end(),
                             [&](std::uint32_t l, std::uint32_t r) { return fx.ages[l] > fx.ages[r]; });
            const auto n_new = static_cast<std::uint32_t>(std::min(fresh_ids.size(), victims.size()));
            compare(summary, "assign_slots", [&](Device& d) {
                auto ids = d.upload(std::span<const std::uint32_t>(fresh_ids));
                auto vs = d.upload(std::span<const std::uint32_t>(victims));
                auto sb = d.upload(std::span<const std::int32_t>(fx.slot_block));
                auto bs = d.upload(std::span<const std::int32_t>(fx.block_slot));
                auto ages = d.upload(std::span<const std::uint32_t>(fx.ages));
                assign_slots(d, ids, vs, n_new, sb, bs, ages);
                return Outputs{bits(sb.span()), bits(bs.span()), head(ages, slots)};
            });
        }
        {
            const CompressedVolume cv = random_compressed(gen);
            const std::uint32_t total = cv.grid.total;
            const std::uint32_t slots = total + static_cast<std::uint32_t>(gen() % 8);
            std::vector<std::uint32_t> perm(slots);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), gen);
            std::vector<std::int32_t> slot_of(total);
            for (std::uint32_t b = 0; b < total; ++b) slot_of[b] = static_cast<std::int32_t>(perm[b]);
            std::vector<std::uint32_t> ids;
            for (std::uint32_t b = 0; b < total; ++b)
                if (gen() % 3 != 0) ids.push_back(b);
            std::vector<float> pool(std::size_t{slots} * kBlockVoxels, -1.f);
            compare(summary, "decompress", [&](Device& d) {
                const DeviceVolume vol = upload_volume(d, cv);
                auto id_buf = d.upload(std::span<const std::uint32_t>(ids));
                auto so = d.upload(std::span<const std::int32_t>(slot_of));
                auto p = d.upload(std::span<const float>(pool));
                gpu_decompress_blocks(d, vol, id_buf, ids.size(), so, p);
                return Outputs{bits(p.span())};
            });
        }
        {
            const CompressedVolume cv = random_compressed(gen);
            const double fraction = 0.05 + double(gen() % 96) / 100.0;
            const float lo = cv.global_range.min, hi = cv.global_range.max;
            std::uniform_real_distribution<float> iso(lo - 0.05f * (hi - lo), hi);
            const std::vector<float> isovalues{iso(gen), iso(gen)};
            const auto a = staged_run(Backend::gpu, cv, fraction, isovalues);
            const auto b = staged_run(Backend::cpu, cv, fraction, isovalues);
            const std::pair<const char*, const char*> kernels[] = {
                {"select_active", "select_active"}, {"compact_active", "compact_ids"},
                {"cache_update", "cache_update"},   {"cache_block_slot", "cache_update"},
                {"cache_slot_block", "cache_update"}, {"cache_ages", "cache_update"},
                {"cache_pool", "decompress"},       {"processable", "processable"},
                {"occupancy", "occupancy"},         {"counts", "counts"},
                {"vertices", "vertices"},
            };
            std::map<std::string, bool> differs;
            for (const auto& [buffer, kernel] : kernels) {
                for (std::size_t f = 0; f < isovalues.size(); ++f) {
                    const std::string key = std::string(buffer) + "/" + std::to_string(f);
                    differs[kernel] = differs[kernel] || a.at(key) != b.at(key);
                }
            }
            for (const auto& [kernel, bad] : differs) {
                ++summary.cases[std::string("pipeline:") + kernel];
                summary.mismatches[std::string("pipeline:") + kernel] += bad ? 1 : 0;
            }
        }
    }
    return summary;
}

} // namespace bcmc::test
