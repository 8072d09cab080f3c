#include "bcmc/block_cache.hpp"
#include "bcmc/error.hpp"
#include "bcmc/reference.hpp"
#include "bcmc/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bcmc;
using reference::LruStep;

TEST_SUITE("reference")
{
    TEST_CASE("serial marching cubes basics")
    {
        const std::vector<float> c(27, 1.f);
        CHECK(reference::serial_marching_cubes(make_volume({3, 3, 3}, c), 0.5f).positions.empty());

        std::vector<float> v(8, 0.f);
        v[7] = 2.f;
        const auto soup = reference::serial_marching_cubes(make_volume({2, 2, 2}, v), 1.f);
        CHECK(soup.triangle_count() == 1);
        CHECK(soup.cells.size() == 1);
    }

    TEST_CASE("sphere surface is well formed")
    {
        const std::uint32_t n = 32;
        std::vector<float> v(n * n * n);
        const float c = 15.5f;
        for (std::uint32_t z = 0; z < n; ++z)
            for (std::uint32_t y = 0; y < n; ++y)
                for (std::uint32_t x = 0; x < n; ++x)
                    v[x + n * (y + n * z)] = std::sqrt((x - c) * (x - c) + (y - c) * (y - c) + (z - c) * (z - c));
        const float radius = 10.f;
        const auto soup = reference::serial_marching_cubes(make_volume({n, n, n}, v), radius);
        REQUIRE(soup.triangle_count() > 1000);
        for (std::size_t t = 0; t < soup.triangle_count(); ++t) {
            const float* p = &soup.positions[9 * t];
            const float ux = p[3] - p[0], uy = p[4] - p[1], uz = p[5] - p[2];
            const float vx = p[6] - p[0], vy = p[7] - p[1], vz = p[8] - p[2];
            const float cx = uy * vz - uz * vy, cy = uz * vx - ux * vz, cz = ux * vy - uy * vx;
            CHECK(std::sqrt(cx * cx + cy * cy + cz * cz) > 0.f);
            for (int k = 0; k < 9; ++k) {
                CHECK(p[k] >= 0.f);
                CHECK(p[k] <= float(n - 1));
            }
            for (int k = 0; k < 3; ++k) {
                const float r = std::sqrt((p[3 * k] - c) * (p[3 * k] - c) + (p[3 * k + 1] - c) * (p[3 * k + 1] - c) +
                                          (p[3 * k + 2] - c) * (p[3 * k + 2] - c));
                CHECK(std::fabs(r - radius) < 0.1f);
            }
        }
    }

    TEST_CASE("LRU simulator examples")
    {
        const std::uint32_t A = 10, B = 20;
        const auto two = reference::serial_lru_simulate(2, grown_slot_count, {{A}, {B}, {A}});
        REQUIRE(two.size() == 3);
        CHECK(two[0].resident == std::set<std::uint32_t>{A});
        CHECK(two[1].resident == std::set<std::uint32_t>{A, B});
        CHECK(two[2].resident == std::set<std::uint32_t>{A, B});
        CHECK(two[0].hits == 0);
        CHECK(two[1].hits == 0);
        CHECK(two[2].hits == 1);

        const auto one = reference::serial_lru_simulate(1, grown_slot_count, {{A}, {B}, {A}});
        CHECK(one[0].resident == std::set<std::uint32_t>{A});
        CHECK(one[1].resident == std::set<std::uint32_t>{B});
        CHECK(one[2].resident == std::set<std::uint32_t>{A});
        CHECK(one[1].misses == 1);
        CHECK(one[2].misses == 1);

        const auto grown = reference::serial_lru_simulate(1, grown_slot_count, {{1, 2, 3}});
        CHECK(grown[0].slot_count == 3);
        CHECK(grown[0].resident == std::set<std::uint32_t>{1, 2, 3});
    }

    TEST_CASE("dequantize examples")
    {
        const BlockGrid g = BlockGrid::for_padded_dims({8, 8, 8});
        const std::vector<PackedVertex> v{pack_vertex(0, 0, 0, 0), pack_vertex(1023, 1023, 1023, 0),
                                          pack_vertex(0, 0, 0, 7)};
        const auto soup = reference::dequantize(v, g);
        CHECK(soup.positions == std::vector<float>{0, 0, 0, 4, 4, 4, 4, 4, 4});

        const std::vector<PackedVertex> reserved{{1u << 30, 0}};
        CHECK_THROWS_AS(reference::dequantize(reserved, g), FormatError);
        const std::vector<PackedVertex> outside{{0, 8}};
        CHECK_THROWS_AS(reference::dequantize(outside, g), FormatError);
    }

    TEST_CASE("quantize inverts dequantize on sampled packed vertices")
    {
        const BlockGrid g = BlockGrid::for_padded_dims({64, 64, 64});
        std::mt19937_64 gen(1);
        std::vector<PackedVertex> v(1'000'000);
        for (auto& pv : v) pv = {static_cast<std::uint32_t>(gen() & 0x3fffffffu), static_cast<std::uint32_t>(gen() % g.total)};
        const auto soup = reference::dequantize(v, g);
        std::size_t bad = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const BlockCoord b = g.coords(v[i].word1);
            std::uint32_t q[3];
            for (int a = 0; a < 3; ++a) q[a] = quantize_coordinate(soup.positions[3 * i + a] - float(4 * b[a]));
            bad += pack_vertex(q[0], q[1], q[2], v[i].word1) == v[i] ? 0 : 1;
        }
        CHECK(bad == 0);
    }
}
