#include "bcmc/primitives.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace bcmc;

namespace {

std::vector<std::uint32_t> serial_scan(const std::vector<std::uint32_t>& v)
{
    std::vector<std::uint32_t> out(v.size());
    std::uint32_t run = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = run;
        run += v[i];
    }
    return out;
}

} // namespace

TEST_SUITE("primitives")
{
    TEST_CASE("scan examples")
    {
        Device d;
        const auto empty = exclusive_scan(d, std::span<const std::uint32_t>{});
        CHECK(empty.offsets.empty());
        CHECK(empty.total == 0);
        const std::vector<std::uint32_t> in{1, 0, 1, 1};
        const auto r = exclusive_scan(d, in);
        CHECK(r.offsets == std::vector<std::uint32_t>{0, 1, 1, 2});
        CHECK(r.total == 3);
    }

    TEST_CASE("scan matches serial fold across sizes")
    {
        for (Backend b : {Backend::gpu, Backend::cpu}) {
            Device d(b);
            for (std::size_t n : {1u, 255u, 256u, 257u, 65536u + 7u, 70000u}) {
                const auto in = test::random_u32(n, n, 100);
                const auto r = exclusive_scan(d, in);
                CHECK(r.offsets == serial_scan(in));
                CHECK(r.total == std::accumulate(in.begin(), in.end(), 0u));
            }
        }
    }

    TEST_CASE("scan input is left unmodified and totals are additive")
    {
        Device d;
        const auto a = test::random_u32(1000, 1, 50);
        const auto b = test::random_u32(777, 2, 50);
        std::vector<std::uint32_t> ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        auto buf = d.upload(std::span<const std::uint32_t>(ab));
        auto off = d.create_buffer<std::uint32_t>(ab.size());
        auto tot = d.create_buffer<std::uint32_t>(1);
        exclusive_scan(d, buf, ab.size(), off, tot);
        CHECK(d.download(buf) == ab);
        CHECK(d.read_scalar(tot) == exclusive_scan(d, a).total + exclusive_scan(d, b).total);
    }

    TEST_CASE("compaction examples")
    {
        Device d;
        const std::vector<std::uint32_t> zeros{0, 0, 0};
        CHECK(stream_compact_ids(d, zeros, exclusive_scan(d, zeros).offsets).empty());
        const std::vector<std::uint32_t> mask{1, 0, 1, 1};
        CHECK(stream_compact_ids(d, mask, exclusive_scan(d, mask).offsets) == std::vector<std::uint32_t>{0, 2, 3});
        const std::vector<std::uint32_t> m2{0, 1, 1}, values{9, 7, 5};
        CHECK(stream_compact(d, m2, exclusive_scan(d, m2).offsets, values) == std::vector<std::uint32_t>{7, 5});
        CHECK(stream_compact(d, zeros, exclusive_scan(d, zeros).offsets, values).empty());
    }

    TEST_CASE("compaction matches serial filter")
    {
        Device d;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto mask = test::random_mask(100000, seed, 0.1 + 0.2 * double(seed));
            const auto values = test::random_u32(100000, seed + 100, 0xffffffffu);
            const auto scan = exclusive_scan(d, mask);
            std::vector<std::uint32_t> ids, kept;
            for (std::uint32_t i = 0; i < mask.size(); ++i)
                if (mask[i]) {
                    ids.push_back(i);
                    kept.push_back(values[i]);
                }
            CHECK(stream_compact_ids(d, mask, scan.offsets) == ids);
            CHECK(stream_compact(d, mask, scan.offsets, values) == kept);
            CHECK(ids.size() == scan.total);
        }
    }

    TEST_CASE("sort examples")
    {
        Device d;
        const auto [ek, ev] = sort_by_key_desc(d, std::span<const std::uint32_t>{}, std::span<const std::uint32_t>{});
        CHECK(ek.empty());
        CHECK(ev.empty());
        const std::vector<std::uint32_t> keys{1, 3, 3, 0}, values{10, 11, 12, 13};
        const auto [k, v] = sort_by_key_desc(d, keys, values);
        CHECK(k == std::vector<std::uint32_t>{3, 3, 1, 0});
        CHECK(v == std::vector<std::uint32_t>{11, 12, 10, 13});
        const std::vector<std::uint32_t> shorter{1};
        CHECK_THROWS_AS(sort_by_key_desc(d, keys, shorter), ParameterError);
    }

    TEST_CASE("sort matches serial stable sort")
    {
        for (Backend b : {Backend::gpu, Backend::cpu}) {
            Device d(b);
            for (std::uint32_t bound : {0u, 3u, 1000u, 0xffffffffu}) {
                const std::size_t n = 50000;
                const auto keys = test::random_u32(n, bound, bound);
                std::vector<std::uint32_t> values(n);
                std::iota(values.begin(), values.end(), 0);
                std::vector<std::size_t> order(n);
                std::iota(order.begin(), order.end(), 0);
                std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return keys[l] > keys[r]; });
                std::vector<std::uint32_t> ek(n), ev(n);
                for (std::size_t i = 0; i < n; ++i) {
                    ek[i] = keys[order[i]];
                    ev[i] = values[order[i]];
                }
                const auto [k, v] = sort_by_key_desc(d, keys, values);
                CHECK(k == ek);
                CHECK(v == ev);
            }
        }
    }

    TEST_CASE("sort keeps equal-key runs in input order")
    {
        Device d;
        // Long runs of equal keys spanning several tiles, including the
        // extreme keys.
        std::vector<std::uint32_t> keys;
        for (std::uint32_t k : {5u, 0xffffffffu, 5u, 0u, 0xffffffffu, 7u})
            for (int i = 0; i < 700; ++i) keys.push_back(k);
        std::vector<std::uint32_t> values(keys.size());
        std::iota(values.begin(), values.end(), 0);
        const auto [k, v] = sort_by_key_desc(d, keys, values);
        for (std::size_t i = 1; i < k.size(); ++i) {
            CHECK(k[i - 1] >= k[i]);
            if (k[i - 1] == k[i]) CHECK(v[i - 1] < v[i]);
        }
    }
}
