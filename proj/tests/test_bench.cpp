#include "bcmc/bench.hpp"
#include "bcmc/synthetic.hpp"

#include <doctest.h>

using namespace bcmc;

TEST_SUITE("bench")
{
    TEST_CASE("isovalue sequences")
    {
        BenchConfig c;
        c.lo = 1.f;
        c.hi = 3.f;
        c.count = 5;
        c.mode = BenchMode::sweep_up;
        CHECK(bench_isovalues(c) == std::vector<float>{1.f, 1.5f, 2.f, 2.5f, 3.f});
        c.mode = BenchMode::sweep_down;
        CHECK(bench_isovalues(c) == std::vector<float>{3.f, 2.5f, 2.f, 1.5f, 1.f});
        c.count = 1;
        CHECK(bench_isovalues(c) == std::vector<float>{1.f});

        c.mode = BenchMode::random;
        c.count = 10000;
        c.seed = 3;
        const auto r = bench_isovalues(c);
        for (float v : r) {
            CHECK(v >= 1.f);
            CHECK(v < 3.f);
        }
        CHECK(bench_isovalues(c) == r);
        c.seed = 4;
        CHECK(bench_isovalues(c) != r);
    }

    TEST_CASE("config validation")
    {
        BenchConfig c;
        c.lo = 2.f;
        c.hi = 2.f;
        CHECK_THROWS_AS(validate(c), ParameterError);
        c.hi = 3.f;
        c.count = 0;
        CHECK_THROWS_AS(validate(c), ParameterError);
        CHECK(parse_bench_mode("sweep-up") == BenchMode::sweep_up);
        CHECK(to_string(BenchMode::sweep_down) == "sweep-down");
        CHECK_THROWS_AS(parse_bench_mode("up"), ParameterError);
    }

    TEST_CASE("first frame is discarded and repeats hit the cache")
    {
        const CompressedVolume cv = compress_volume(make_nested_spheres(32), 4);
        Device d;
        BenchConfig c;
        const std::vector<float> same(10, 5.f);
        const BenchReport r = run_bench(d, cv, c, same);
        REQUIRE(r.frames.size() == 9);
        for (const auto& f : r.frames) CHECK(f.hit_rate == 1.0);
        CHECK(r.mean_hit_rate == 1.0);
        CHECK(r.peak_cache_bytes > 0);
        CHECK(r.mean_ms_per_pass.size() == 5);
    }

    TEST_CASE("report schema")
    {
        const CompressedVolume cv = compress_volume(make_nested_spheres(16), 4);
        Device d;
        BenchConfig c;
        c.mode = BenchMode::sweep_up;
        c.count = 4;
        c.lo = 1.f;
        c.hi = 5.f;
        const auto j = to_json(run_bench(d, cv, c));
        CHECK(j["config"]["mode"] == "sweep-up");
        CHECK(j["config"]["count"] == 4);
        REQUIRE(j["frames"].size() == 3);
        for (const char* key : {"isovalue", "n_active", "n_new", "n_occ", "vertex_count", "hit_rate", "cache_bytes",
                                "total_ms", "pass_ms"})
            CHECK(j["frames"][0].contains(key));
        CHECK(j["frames"][0]["isovalue"].get<double>() == doctest::Approx(7.0 / 3.0).epsilon(1e-6));
        for (const char* key : {"mean_hit_rate", "mean_ms_per_pass", "peak_cache_bytes"})
            CHECK(j["summary"].contains(key));
    }
}
