#include "bcmc/primitives.hpp"

#include <array>
#include <bit>

namespace bcmc {

namespace {

constexpr std::uint32_t kScanSteps = std::countr_zero(kScanGroupSize);
constexpr std::uint32_t kRadixDigits = 1u << kRadixBits;
constexpr std::uint32_t kSortTile = kSortThreads * kSortItemsPerThread;

std::uint32_t groups_for(std::size_t n, std::uint32_t per_group)
{
    return static_cast<std::uint32_t>((n + per_group - 1) / per_group);
}

struct ScanShared {
    std::array<std::uint32_t, kScanGroupSize> a;
    std::array<std::uint32_t, kScanGroupSize> b;
};

// Offsets only; the caller derives the total.
void scan_offsets(Device& device, const Buffer<std::uint32_t>& input, std::size_t n, Buffer<std::uint32_t>& offsets)
{
    if (n == 0) {
        return;
    }
    const std::uint32_t groups = groups_for(n, kScanGroupSize);
    auto group_sums = device.create_buffer<std::uint32_t>(groups);

    auto in = input.span();
    auto out = offsets.span();
    auto sums = group_sums.span();
    // Hillis-Steele inclusive scan in shared memory, double-buffered.
    device.dispatch<ScanShared>(
        {groups, kScanGroupSize, kScanSteps + 2}, [&](const Invocation& inv, ScanShared& sh, std::uint32_t phase) {
            const std::uint32_t l = inv.local;
            if (phase == 0) {
                sh.a[l] = inv.global < n ? in[inv.global] : 0;
            } else if (phase <= kScanSteps) {
                const std::uint32_t stride = 1u << (phase - 1);
                auto& src = phase % 2 == 1 ? sh.a : sh.b;
                auto& dst = phase % 2 == 1 ? sh.b : sh.a;
                dst[l] = src[l] + (l >= stride ? src[l - stride] : 0);
            } else {
                const auto& inclusive = kScanSteps % 2 == 0 ? sh.a : sh.b;
                if (inv.global < n) {
                    out[inv.global] = l > 0 ? inclusive[l - 1] : 0;
                }
                if (l == kScanGroupSize - 1) {
                    sums[inv.group] = inclusive[l];
                }
            }
        });

    if (groups == 1) {
        return;
    }
    auto group_offsets = device.create_buffer<std::uint32_t>(groups);
    scan_offsets(device, group_sums, groups, group_offsets);
    auto add = group_offsets.span();
    device.dispatch_threads(n, kScanGroupSize, [&](std::uint32_t i) { out[i] += add[i / kScanGroupSize]; });
}

struct SortShared {
    std::array<std::array<std::uint32_t, kRadixDigits>, kSortThreads> counts;
    std::array<std::array<std::uint32_t, kRadixDigits>, kSortThreads> prefix;
};

std::uint32_t digit_of(std::uint32_t key, std::uint32_t shift) { return (~key >> shift) & (kRadixDigits - 1); }

void count_digits(const Invocation& inv, SortShared& sh, std::span<const std::uint32_t> keys, std::size_t n,
                  std::uint32_t shift)
{
    auto& row = sh.counts[inv.local];
    row.fill(0);
    const std::size_t first = std::size_t{inv.group} * kSortTile + std::size_t{inv.local} * kSortItemsPerThread;
    for (std::uint32_t j = 0; j < kSortItemsPerThread; ++j) {
        if (first + j < n) {
            ++row[digit_of(keys[first + j], shift)];
        }
    }
}

// One stable counting pass on a 4-bit digit of the complemented key.
void radix_pass(Device& device, std::span<const std::uint32_t> keys_in, std::span<const std::uint32_t> vals_in,
                std::span<std::uint32_t> keys_out, std::span<std::uint32_t> vals_out, std::size_t n,
                std::uint32_t shift)
{
    const std::uint32_t groups = groups_for(n, kSortTile);
    // Digit-major layout: scanning it yields each (digit, tile) output base.
    const std::size_t hist_len = std::size_t{kRadixDigits} * groups;
    auto hist = device.create_buffer<std::uint32_t>(hist_len);
    auto hist_offsets = device.create_buffer<std::uint32_t>(hist_len);
    auto hist_total = device.create_buffer<std::uint32_t>(1);

    auto h = hist.span();
    device.dispatch<SortShared>({groups, kSortThreads, 2}, [&](const Invocation& inv, SortShared& sh, std::uint32_t phase) {
        if (phase == 0) {
            count_digits(inv, sh, keys_in, n, shift);
        } else if (inv.local < kRadixDigits) {
            std::uint32_t sum = 0;
            for (std::uint32_t t = 0; t < kSortThreads; ++t) sum += sh.counts[t][inv.local];
            h[std::size_t{inv.local} * groups + inv.group] = sum;
        }
    });

    exclusive_scan(device, hist, hist_len, hist_offsets, hist_total);

    auto base = hist_offsets.span();
    device.dispatch<SortShared>({groups, kSortThreads, 3}, [&](const Invocation& inv, SortShared& sh, std::uint32_t phase) {
        if (phase == 0) {
            count_digits(inv, sh, keys_in, n, shift);
        } else if (phase == 1) {
            if (inv.local < kRadixDigits) {
                std::uint32_t run = 0;
                for (std::uint32_t t = 0; t < kSortThreads; ++t) {
                    sh.prefix[t][inv.local] = run;
                    run += sh.counts[t][inv.local];
                }
            }
        } else {
            auto& rank = sh.prefix[inv.local];
            const std::size_t first = std::size_t{inv.group} * kSortTile + std::size_t{inv.local} * kSortItemsPerThread;
            for (std::uint32_t j = 0; j < kSortItemsPerThread; ++j) {
                const std::size_t i = first + j;
                if (i < n) {
                    const std::uint32_t d = digit_of(keys_in[i], shift);
                    const std::size_t dst = base[std::size_t{d} * groups + inv.group] + rank[d]++;
                    keys_out[dst] = keys_in[i];
                    vals_out[dst] = vals_in[i];
                }
            }
        }
    });
}

} // namespace

void exclusive_scan(Device& device, const Buffer<std::uint32_t>& input, std::size_t n,
                    Buffer<std::uint32_t>& offsets, Buffer<std::uint32_t>& total)
{
    scan_offsets(device, input, n, offsets);
    auto in = input.span();
    auto out = offsets.span();
    auto t = total.span();
    device.dispatch_threads(1, 1, [&](std::uint32_t) { t[0] = n > 0 ? out[n - 1] + in[n - 1] : 0; });
}

void stream_compact_ids(Device& device, const Buffer<std::uint32_t>& mask, const Buffer<std::uint32_t>& offsets,
                        std::size_t n, Buffer<std::uint32_t>& out)
{
    auto m = mask.span();
    auto o = offsets.span();
    auto dst = out.span();
    device.dispatch_threads(n, kScanGroupSize, [&](std::uint32_t i) {
        if (m[i]) dst[o[i]] = i;
    });
}

void stream_compact(Device& device, const Buffer<std::uint32_t>& mask, const Buffer<std::uint32_t>& offsets,
                    const Buffer<std::uint32_t>& values, std::size_t n, Buffer<std::uint32_t>& out)
{
    auto m = mask.span();
    auto o = offsets.span();
    auto v = values.span();
    auto dst = out.span();
    device.dispatch_threads(n, kScanGroupSize, [&](std::uint32_t i) {
        if (m[i]) dst[o[i]] = v[i];
    });
}

void sort_by_key_desc(Device& device, Buffer<std::uint32_t>& keys, Buffer<std::uint32_t>& values, std::size_t n)
{
    if (n < 2) {
        return;
    }
    auto tmp_keys = device.create_buffer<std::uint32_t>(n);
    auto tmp_vals = device.create_buffer<std::uint32_t>(n);
    for (std::uint32_t shift = 0; shift < 32; shift += 2 * kRadixBits) {
        radix_pass(device, keys.span(), values.span(), tmp_keys.span(), tmp_vals.span(), n, shift);
        radix_pass(device, tmp_keys.span(), tmp_vals.span(), keys.span(), values.span(), n, shift + kRadixBits);
    }
}

ScanResult exclusive_scan(Device& device, std::span<const std::uint32_t> input)
{
    auto in = device.upload(input);
    auto offsets = device.create_buffer<std::uint32_t>(input.size());
    auto total = device.create_buffer<std::uint32_t>(1);
    exclusive_scan(device, in, input.size(), offsets, total);
    return {device.download(offsets), device.read_scalar(total)};
}

std::vector<std::uint32_t> stream_compact_ids(Device& device, std::span<const std::uint32_t> mask,
                                              std::span<const std::uint32_t> offsets)
{
    const std::size_t count = mask.empty() ? 0 : offsets.back() + mask.back();
    auto m = device.upload(mask);
    auto o = device.upload(offsets);
    auto out = device.create_buffer<std::uint32_t>(count);
    stream_compact_ids(device, m, o, mask.size(), out);
    return device.download(out);
}

std::vector<std::uint32_t> stream_compact(Device& device, std::span<const std::uint32_t> mask,
                                          std::span<const std::uint32_t> offsets,
                                          std::span<const std::uint32_t> values)
{
    if (values.size() != mask.size()) {
        throw ParameterError("stream_compact: values and mask lengths differ");
    }
    const std::size_t count = mask.empty() ? 0 : offsets.back() + mask.back();
    auto m = device.upload(mask);
    auto o = device.upload(offsets);
    auto v = device.upload(values);
    auto out = device.create_buffer<std::uint32_t>(count);
    stream_compact(device, m, o, v, mask.size(), out);
    return device.download(out);
}

std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
sort_by_key_desc(Device& device, std::span<const std::uint32_t> keys, std::span<const std::uint32_t> values)
{
    if (keys.size() != values.size()) {
        throw ParameterError("sort_by_key_desc: keys and values lengths differ");
    }
    auto k = device.upload(keys);
    auto v = device.upload(values);
    sort_by_key_desc(device, k, v, keys.size());
    return {device.download(k), device.download(v)};
}

} // namespace bcmc
