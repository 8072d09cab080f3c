#include "bcmc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace bcmc {

std::string_view to_string(BenchMode mode)
{
    switch (mode) {
    case BenchMode::random: return "random";
    case BenchMode::sweep_up: return "sweep-up";
    case BenchMode::sweep_down: return "sweep-down";
    }
    return "random";
}

BenchMode parse_bench_mode(std::string_view name)
{
    if (name == "random") return BenchMode::random;
    if (name == "sweep-up") return BenchMode::sweep_up;
    if (name == "sweep-down") return BenchMode::sweep_down;
    throw ParameterError("unknown bench mode '" + std::string(name) + "' (expected random, sweep-up or sweep-down)");
}

void validate(const BenchConfig& config)
{
    if (!(config.lo < config.hi)) throw ParameterError("isovalue range needs lo < hi");
    if (config.count < 1) throw ParameterError("bench count must be at least 1");
}

std::vector<float> bench_isovalues(const BenchConfig& config)
{
    validate(config);
    std::vector<float> values(config.count);
    const double lo = config.lo, hi = config.hi;
    if (config.mode == BenchMode::random) {
        std::mt19937_64 gen(config.seed);
        for (float& v : values) {
            const double u = static_cast<double>(gen() >> 11) * 0x1p-53;
            v = static_cast<float>(lo + (hi - lo) * u);
            if (v >= config.hi) v = std::nextafter(config.hi, config.lo);
        }
        return values;
    }
    for (std::uint32_t i = 0; i < config.count; ++i) {
        const double t = config.count == 1 ? 0.0 : double(i) / double(config.count - 1);
        values[i] = static_cast<float>(lo + (hi - lo) * t);
    }
    if (config.mode == BenchMode::sweep_down) std::reverse(values.begin(), values.end());
    return values;
}

BenchReport run_bench(Device& device, const CompressedVolume& cv, const BenchConfig& config)
{
    const std::vector<float> isovalues = bench_isovalues(config);
    return run_bench(device, cv, config, isovalues);
}

BenchReport run_bench(Device& device, const CompressedVolume& cv, const BenchConfig& config,
                      std::span<const float> isovalues)
{
    BenchReport report;
    report.config = config;

    IsosurfacePipeline pipeline(device, cv, {config.cache_fraction});
    PassTimes pass_sums;
    double hit_sum = 0.0;
    for (std::size_t i = 0; i < isovalues.size(); ++i) {
        SurfaceResult r = pipeline.compute_surface(isovalues[i], false);
        report.peak_cache_bytes = std::max(report.peak_cache_bytes, r.stats.cache_bytes);
        if (i == 0) continue;
        hit_sum += r.stats.hit_rate;
        pass_sums.add(r.stats.passes);
        report.frames.push_back(std::move(r.stats));
    }

    const auto n = static_cast<double>(report.frames.size());
    if (!report.frames.empty()) {
        report.mean_hit_rate = hit_sum / n;
        for (PassTiming p : pass_sums.passes()) {
            p.ms /= n;
            report.mean_ms_per_pass.push_back(p);
        }
    }
    return report;
}

nlohmann::ordered_json to_json(const FrameStats& stats)
{
    nlohmann::ordered_json passes = nlohmann::ordered_json::object();
    for (const auto& p : stats.passes) passes[p.label] = p.ms;
    return {
        {"isovalue", stats.isovalue},
        {"n_active", stats.n_active},
        {"n_new", stats.n_new},
        {"n_occ", stats.n_occ},
        {"vertex_count", stats.vertex_count},
        {"hit_rate", stats.hit_rate},
        {"cache_bytes", stats.cache_bytes},
        {"cache_grew", stats.cache_grew},
        {"total_ms", stats.total_ms},
        {"pass_ms", passes},
    };
}

nlohmann::ordered_json to_json(const BenchConfig& config)
{
    return {
        {"mode", to_string(config.mode)},
        {"count", config.count},
        {"range", {config.lo, config.hi}},
        {"seed", config.seed},
        {"backend", to_string(config.backend)},
        {"cache_fraction", config.cache_fraction},
    };
}

nlohmann::ordered_json to_json(const BenchReport& report)
{
    nlohmann::ordered_json frames = nlohmann::ordered_json::array();
    for (const auto& f : report.frames) frames.push_back(to_json(f));
    nlohmann::ordered_json passes = nlohmann::ordered_json::object();
    for (const auto& p : report.mean_ms_per_pass) passes[p.label] = p.ms;
    return {
        {"config", to_json(report.config)},
        {"frames", frames},
        {"summary",
         {
             {"mean_hit_rate", report.mean_hit_rate},
             {"mean_ms_per_pass", passes},
             {"peak_cache_bytes", report.peak_cache_bytes},
         }},
    };
}

} // namespace bcmc
