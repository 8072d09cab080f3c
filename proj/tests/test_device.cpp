#include "bcmc/device.hpp"

#include <doctest.h>

#include <chrono>
#include <numeric>

using namespace bcmc;

TEST_SUITE("device")
{
    TEST_CASE("empty submission completes")
    {
        Device d;
        CommandList empty;
        CHECK(d.submit(empty).empty());
    }

    TEST_CASE("fill kernel")
    {
        for (Backend b : {Backend::gpu, Backend::cpu}) {
            Device d(b);
            auto buf = d.create_buffer<std::uint32_t>(1000);
            auto s = buf.span();
            d.dispatch_threads(1000, 64, [&](std::uint32_t i) { s[i] = i; });
            std::vector<std::uint32_t> expect(1000);
            std::iota(expect.begin(), expect.end(), 0);
            CHECK(d.download(buf) == expect);
        }
    }

    TEST_CASE("barrier phases are ordered within a workgroup")
    {
        for (Backend b : {Backend::gpu, Backend::cpu}) {
            Device d(b);
            struct Shared {
                std::uint32_t v[64];
            };
            auto out = d.create_buffer<std::uint32_t>(64 * 8);
            auto o = out.span();
            d.dispatch<Shared>({8, 64, 2}, [&](const Invocation& inv, Shared& sh, std::uint32_t phase) {
                if (phase == 0) sh.v[inv.local] = inv.global;
                else o[inv.global] = sh.v[63 - inv.local];
            });
            for (std::uint32_t g = 0; g < 8; ++g)
                for (std::uint32_t l = 0; l < 64; ++l) CHECK(o[g * 64 + l] == g * 64 + 63 - l);
        }
    }

    TEST_CASE("executors differ in intra-phase order")
    {
        // A kernel that depends on unguaranteed thread order must diverge.
        auto run = [](Backend b) {
            Device d(b);
            struct Shared {
                std::uint32_t last;
            };
            auto out = d.create_buffer<std::uint32_t>(1);
            auto o = out.span();
            d.dispatch<Shared>({1, 64, 2}, [&](const Invocation& inv, Shared& sh, std::uint32_t phase) {
                if (phase == 0) sh.last = inv.local;
                else if (inv.local == 0) o[0] = sh.last;
            });
            return o[0];
        };
        CHECK(run(Backend::cpu) == 63);
        CHECK(run(Backend::gpu) == 0);
    }

    TEST_CASE("scalar readback is counted")
    {
        Device d;
        const std::vector<std::uint32_t> v{0, 4, 2};
        auto buf = d.upload(std::span<const std::uint32_t>(v));
        CHECK(d.read_scalar(buf, 1) == 4);
        CHECK(d.read_scalars(buf, 2) == std::vector<std::uint32_t>{0, 4});
        CHECK(d.transfer_stats().scalar_reads == 2);
        CHECK(d.transfer_stats().scalar_elements == 3);
        CHECK_THROWS_AS(d.read_scalars(buf, 4), BoundsError);
    }

    TEST_CASE("memory budget")
    {
        Device d(Backend::gpu, 1024);
        auto a = d.create_buffer<float>(200);
        CHECK(d.bytes_allocated() == 800);
        CHECK_THROWS_AS(d.create_buffer<float>(100), OutOfMemoryError);
        CHECK(d.bytes_allocated() == 800);
        {
            auto b = d.create_buffer<std::uint32_t>(50);
            CHECK(d.bytes_allocated() == 1000);
        }
        CHECK(d.bytes_allocated() == 800);
        a = Buffer<float>{};
        CHECK(d.bytes_allocated() == 0);
    }

    TEST_CASE("grow keeps contents and fills the tail")
    {
        Device d;
        const std::vector<std::int32_t> v{3, 1, 4};
        auto buf = d.upload(std::span<const std::int32_t>(v));
        auto g = d.grow(buf, 5, -1);
        CHECK(d.download(g) == std::vector<std::int32_t>{3, 1, 4, -1, -1});
    }

    TEST_CASE("pass timings")
    {
        Device d;
        CommandList cl;
        for (const char* label : {"select_active", "cache_update", "filter_occupied", "count_vertices", "compute_vertices"}) {
            cl.record(label, [](Device&) {
                volatile double x = 0;
                for (int i = 0; i < 10000; ++i) x = x + i;
            });
        }
        const auto start = std::chrono::steady_clock::now();
        const auto t = d.submit(cl);
        const std::chrono::duration<double, std::milli> wall = std::chrono::steady_clock::now() - start;
        REQUIRE(t.size() == 5);
        double sum = 0;
        for (const auto& p : t) {
            CHECK(p.ms >= 0.0);
            sum += p.ms;
        }
        CHECK(t[0].label == "select_active");
        CHECK(t[4].label == "compute_vertices");
        CHECK(sum <= wall.count());

        PassTimes acc;
        acc.add(t);
        acc.add(t);
        CHECK(acc.passes().size() == 5);
        CHECK(acc.total_ms() == doctest::Approx(2 * sum));
    }

    TEST_CASE("backend names")
    {
        CHECK(parse_backend("gpu") == Backend::gpu);
        CHECK(parse_backend("cpu") == Backend::cpu);
        CHECK(to_string(Backend::cpu) == "cpu");
        CHECK_THROWS_AS(parse_backend("metal"), ParameterError);
    }
}
