#include "bcmc/block_cache.hpp"

#include "bcmc/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bcmc {

namespace {

constexpr std::uint32_t kThreads = 64;

std::vector<std::uint32_t> snapshot(const Buffer<std::uint32_t>& b, std::size_t n)
{
    auto s = b.span();
    return {s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n)};
}

} // namespace

std::uint32_t grown_slot_count(std::uint32_t slot_count, std::uint32_t n_new, std::uint32_t n_avail)
{
    const std::uint32_t deficit = n_new - n_avail;
    const std::uint32_t headroom = (slot_count + 3) / 4;
    return slot_count + std::max(deficit, headroom);
}

std::uint32_t initial_slot_count(std::uint32_t total_blocks, double fraction)
{
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ParameterError("cache fraction must be in (0, 1], got " + std::to_string(fraction));
    }
    const auto slots = static_cast<std::uint32_t>(std::ceil(fraction * total_blocks));
    return std::max<std::uint32_t>(1, slots);
}

void increment_slot_age(Device& device, Buffer<std::uint32_t>& ages, const Buffer<std::int32_t>& slot_block,
                        Buffer<std::uint32_t>& avail, std::uint32_t slot_count)
{
    auto age = ages.span();
    auto blocks = slot_block.span();
    auto av = avail.span();
    device.dispatch_threads(slot_count, kThreads, [&](std::uint32_t s) {
        age[s] = age[s] >= kAgeMax ? kAgeMax : age[s] + 1;
        av[s] = blocks[s] == -1 ? 1u : 0u;
    });
}

void mark_new_blocks(Device& device, const Buffer<std::uint32_t>& active, const Buffer<std::int32_t>& block_slot,
                     Buffer<std::uint32_t>& ages, Buffer<std::uint32_t>& avail, Buffer<std::uint32_t>& new_mask,
                     std::uint32_t total_blocks)
{
    auto act = active.span();
    auto slot_of = block_slot.span();
    auto age = ages.span();
    auto av = avail.span();
    auto fresh = new_mask.span();
    device.dispatch_threads(total_blocks, kThreads, [&](std::uint32_t b) {
        const std::int32_t s = slot_of[b];
        if (act[b]) {
            if (s >= 0) {
                age[s] = 0;
                av[s] = 0;
                fresh[b] = 0;
            } else {
                fresh[b] = 1;
            }
        } else {
            fresh[b] = 0;
            if (s >= 0) av[s] = 1;
        }
    });
}

void assign_slots(Device& device, const Buffer<std::uint32_t>& new_ids, const Buffer<std::uint32_t>& sorted_slots,
                  std::uint32_t n_new, Buffer<std::int32_t>& slot_block, Buffer<std::int32_t>& block_slot,
                  Buffer<std::uint32_t>& ages)
{
    auto ids = new_ids.span();
    auto slots = sorted_slots.span();
    auto blocks = slot_block.span();
    auto slot_of = block_slot.span();
    auto age = ages.span();
    device.dispatch_threads(n_new, kThreads, [&](std::uint32_t i) {
        const std::uint32_t s = slots[i];
        const std::uint32_t b = ids[i];
        const std::int32_t prior = blocks[s];
        if (prior >= 0) slot_of[prior] = -1;
        blocks[s] = static_cast<std::int32_t>(b);
        slot_of[b] = static_cast<std::int32_t>(s);
        age[s] = 0;
    });
}

BlockCache::BlockCache(Device& device, const DeviceVolume& volume, double initial_fraction)
    : device_(device),
      volume_(volume),
      total_(volume.grid.total),
      slot_count_(initial_slot_count(volume.grid.total, initial_fraction)),
      ages_(device.create_buffer<std::uint32_t>(slot_count_, kAgeMax)),
      slot_block_(device.create_buffer<std::int32_t>(slot_count_, -1)),
      block_slot_(device.create_buffer<std::int32_t>(total_, -1)),
      pool_(device.create_buffer<float>(std::size_t{slot_count_} * kBlockVoxels)),
      avail_(device.create_buffer<std::uint32_t>(slot_count_)),
      avail_offsets_(device.create_buffer<std::uint32_t>(slot_count_)),
      avail_ids_(device.create_buffer<std::uint32_t>(slot_count_)),
      avail_ages_(device.create_buffer<std::uint32_t>(slot_count_)),
      new_mask_(device.create_buffer<std::uint32_t>(total_)),
      new_offsets_(device.create_buffer<std::uint32_t>(total_)),
      new_ids_(device.create_buffer<std::uint32_t>(total_)),
      scan_total_(device.create_buffer<std::uint32_t>(1))
{
}

void BlockCache::grow(std::uint32_t new_count)
{
    // Allocate everything before committing so an allocation failure leaves
    // the cache untouched.
    auto ages = device_.grow(ages_, new_count, kAgeMax);
    auto slot_block = device_.grow(slot_block_, new_count, -1);
    auto avail = device_.grow(avail_, new_count, 1u);
    auto avail_offsets = device_.create_buffer<std::uint32_t>(new_count);
    auto avail_ids = device_.create_buffer<std::uint32_t>(new_count);
    auto avail_ages = device_.create_buffer<std::uint32_t>(new_count);
    auto pool = device_.grow(pool_, std::size_t{new_count} * kBlockVoxels);

    ages_ = std::move(ages);
    slot_block_ = std::move(slot_block);
    avail_ = std::move(avail);
    avail_offsets_ = std::move(avail_offsets);
    avail_ids_ = std::move(avail_ids);
    avail_ages_ = std::move(avail_ages);
    pool_ = std::move(pool);
    slot_count_ = new_count;
}

CacheUpdateResult BlockCache::update(const Buffer<std::uint32_t>& active, std::uint32_t n_active)
{
    if (active.size() < total_) {
        throw ParameterError("active mask shorter than the block count");
    }
    CacheUpdateResult result;
    result.n_active = n_active;

    increment_slot_age(device_, ages_, slot_block_, avail_, slot_count_);
    mark_new_blocks(device_, active, block_slot_, ages_, avail_, new_mask_, total_);

    exclusive_scan(device_, new_mask_, total_, new_offsets_, scan_total_);
    result.n_new = device_.read_scalar(scan_total_);
    exclusive_scan(device_, avail_, slot_count_, avail_offsets_, scan_total_);
    std::uint32_t n_avail = device_.read_scalar(scan_total_);

    result.hit_rate = n_active == 0 ? 1.0 : double(n_active - result.n_new) / double(n_active);
    if (result.n_new == 0) {
        return result;
    }

    if (result.n_new > n_avail) {
        grow(grown_slot_count(slot_count_, result.n_new, n_avail));
        result.grew = true;
        exclusive_scan(device_, avail_, slot_count_, avail_offsets_, scan_total_);
        n_avail = device_.read_scalar(scan_total_);
    }

    stream_compact_ids(device_, new_mask_, new_offsets_, total_, new_ids_);
    stream_compact_ids(device_, avail_, avail_offsets_, slot_count_, avail_ids_);
    stream_compact(device_, avail_, avail_offsets_, ages_, slot_count_, avail_ages_);
    sort_by_key_desc(device_, avail_ages_, avail_ids_, n_avail);

    assign_slots(device_, new_ids_, avail_ids_, result.n_new, slot_block_, block_slot_, ages_);
    gpu_decompress_blocks(device_, volume_, new_ids_, result.n_new, block_slot_, pool_);
    return result;
}

CacheUpdateResult BlockCache::update(std::span<const std::uint32_t> active)
{
    if (active.size() != total_) {
        throw ParameterError("active mask length must equal the block count");
    }
    std::uint32_t n_active = 0;
    for (std::uint32_t a : active) n_active += a != 0;
    auto mask = device_.upload(active);
    return update(mask, n_active);
}

std::vector<std::uint32_t> BlockCache::ages() const { return snapshot(ages_, slot_count_); }

std::vector<std::int32_t> BlockCache::slot_blocks() const
{
    auto s = slot_block_.span();
    return {s.begin(), s.end()};
}

std::vector<std::int32_t> BlockCache::block_slot_map() const
{
    auto s = block_slot_.span();
    return {s.begin(), s.end()};
}

std::vector<float> BlockCache::pool_data() const
{
    auto s = pool_.span();
    return {s.begin(), s.end()};
}

} // namespace bcmc
