#pragma once

// Repeated isosurface extraction over a sequence of isovalues with a
// persistent cache. The first computation warms up the device and is not
// recorded.

#include "bcmc/codec.hpp"
#include "bcmc/device.hpp"
#include "bcmc/pipeline.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bcmc {

enum class BenchMode { random, sweep_up, sweep_down };

std::string_view to_string(BenchMode mode);
/// Accepts "random", "sweep-up" or "sweep-down".
BenchMode parse_bench_mode(std::string_view name);

struct BenchConfig {
    BenchMode mode = BenchMode::random;
    std::uint32_t count = 100;
    float lo = 0.f;
    float hi = 1.f;
    std::uint64_t seed = 0;
    Backend backend = Backend::gpu;
    double cache_fraction = 0.10;
};

/// Throws ParameterError unless lo < hi and count >= 1.
void validate(const BenchConfig& config);

/// `count` isovalues: uniform in [lo, hi) for random mode, evenly spaced
/// over [lo, hi] otherwise.
std::vector<float> bench_isovalues(const BenchConfig& config);

struct BenchReport {
    BenchConfig config;
    std::vector<FrameStats> frames;
    double mean_hit_rate = 1.0;
    std::vector<PassTiming> mean_ms_per_pass;
    std::uint64_t peak_cache_bytes = 0;
};

BenchReport run_bench(Device& device, const CompressedVolume& cv, const BenchConfig& config);
/// Runs an explicit isovalue sequence; config supplies the cache fraction.
BenchReport run_bench(Device& device, const CompressedVolume& cv, const BenchConfig& config,
                      std::span<const float> isovalues);

nlohmann::ordered_json to_json(const FrameStats& stats);
nlohmann::ordered_json to_json(const BenchConfig& config);
nlohmann::ordered_json to_json(const BenchReport& report);

} // namespace bcmc
