#include "cli.hpp"

#include "bcmc/bench.hpp"
#include "bcmc/container.hpp"
#include "bcmc/error.hpp"
#include "bcmc/pipeline.hpp"
#include "bcmc/ply.hpp"
#include "bcmc/reference.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>

namespace bcmc::cli {

namespace {

ScalarType parse_scalar_type(const std::string& name)
{
    if (name == "u8") return ScalarType::u8;
    if (name == "u16") return ScalarType::u16;
    if (name == "f32") return ScalarType::f32;
    throw ParameterError("unknown scalar type '" + name + "' (expected u8, u16 or f32)");
}

std::string_view scalar_name(ScalarType type)
{
    switch (type) {
    case ScalarType::u8: return "u8";
    case ScalarType::u16: return "u16";
    case ScalarType::f32: return "f32";
    }
    return "?";
}

std::string extent_string(const Extent3& e)
{
    return std::to_string(e[0]) + "x" + std::to_string(e[1]) + "x" + std::to_string(e[2]);
}

struct CompressArgs {
    std::string input, output, type = "f32";
    std::vector<std::uint64_t> dims;
    std::uint32_t rate = 4;
};

struct ExtractArgs {
    std::string input, output, backend = "gpu";
    float isovalue = 0.f;
    double cache_fraction = 0.10;
};

struct BenchArgs {
    std::string input, output, mode = "random", backend = "gpu";
    std::uint32_t count = 100;
    std::vector<float> range;
    std::uint64_t seed = 0;
    double cache_fraction = 0.10;
};

int cmd_compress(const CompressArgs& a, std::ostream& out)
{
    const ScalarType type = parse_scalar_type(a.type);
    const Extent3 dims{a.dims.at(0), a.dims.at(1), a.dims.at(2)};
    const auto raw = read_file(a.input);
    const VolumeF32 vol = load_raw(raw, dims, type);
    const CompressedVolume cv = compress_volume(vol, a.rate, type);
    write_container(a.output, cv);

    const std::size_t compressed = container_size(cv.grid.total, cv.rate_bits);
    out << "original:   " << raw.size() << " bytes\n"
        << "compressed: " << compressed << " bytes (payload " << cv.bitstream.size() << ")\n"
        << "ratio:      " << std::fixed << std::setprecision(2) << double(raw.size()) / double(compressed) << "\n";
    return kExitOk;
}

int cmd_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err)
{
    const CompressedVolume cv = read_container(a.input);
    Device device(parse_backend(a.backend));
    IsosurfacePipeline pipeline(device, cv, {a.cache_fraction});
    SurfaceResult result;
    try {
        result = pipeline.compute_surface(a.isovalue);
    } catch (const SurfaceOutOfMemoryError& e) {
        err << "error: " << e.what() << "\n";
        out << to_json(e.stats()).dump() << "\n";
        return kExitOutOfMemory;
    }
    const auto soup = reference::dequantize(result.vertices, cv.grid);
    write_ply(a.output, soup.positions);
    out << to_json(result.stats).dump() << "\n";
    return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err)
{
    BenchConfig config;
    config.mode = parse_bench_mode(a.mode);
    config.count = a.count;
    config.lo = a.range.at(0);
    config.hi = a.range.at(1);
    config.seed = a.seed;
    config.backend = parse_backend(a.backend);
    config.cache_fraction = a.cache_fraction;
    validate(config);

    const CompressedVolume cv = read_container(a.input);
    Device device(config.backend);
    BenchReport report;
    try {
        report = run_bench(device, cv, config);
    } catch (const SurfaceOutOfMemoryError& e) {
        err << "error: " << e.what() << "\n";
        out << to_json(e.stats()).dump() << "\n";
        return kExitOutOfMemory;
    }

    const auto json = to_json(report);
    std::ofstream file(a.output);
    if (!file) throw Error("cannot open " + a.output + " for writing");
    file << json.dump(2) << "\n";
    if (!file) throw Error("failed writing " + a.output);
    out << json["summary"].dump() << "\n";
    return kExitOk;
}

int cmd_info(const std::string& input, std::ostream& out)
{
    const CompressedVolume cv = read_container(input);
    out << "dims:        " << extent_string(cv.dims) << "\n"
        << "padded_dims: " << extent_string(cv.padded_dims) << "\n"
        << "source_type: " << scalar_name(cv.source_type) << "\n"
        << "rate_bits:   " << cv.rate_bits << "\n"
        << "blocks:      " << cv.grid.total << " (" << cv.grid.nblocks[0] << "x" << cv.grid.nblocks[1] << "x"
        << cv.grid.nblocks[2] << ")\n"
        << "range:       " << cv.global_range.min << " " << cv.global_range.max << "\n"
        << "size:        " << container_size(cv.grid.total, cv.rate_bits) << " bytes\n";
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Marching Cubes on block-compressed volumes", "bcmc"};
    app.require_subcommand(1);

    CompressArgs ca;
    auto* compress = app.add_subcommand("compress", "Compress a raw volume into a .bcmc container");
    compress->add_option("input", ca.input, "Raw little-endian volume")->required();
    compress->add_option("--dims", ca.dims, "Extent X,Y,Z")->required()->delimiter(',')->expected(3);
    compress->add_option("--type", ca.type, "u8, u16 or f32")->capture_default_str();
    compress->add_option("--rate", ca.rate, "Bits per voxel")->capture_default_str();
    compress->add_option("-o,--output", ca.output, "Container path")->required();

    ExtractArgs ea;
    auto* extract = app.add_subcommand("extract", "Extract one isosurface to a PLY mesh");
    extract->add_option("container", ea.input)->required();
    extract->add_option("--isovalue", ea.isovalue)->required();
    extract->add_option("--backend", ea.backend, "gpu or cpu")->capture_default_str();
    extract->add_option("--cache-fraction", ea.cache_fraction)->capture_default_str();
    extract->add_option("-o,--output", ea.output, "PLY path")->required();

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Run an isovalue sequence and record per-frame statistics");
    bench->add_option("container", ba.input)->required();
    bench->add_option("--mode", ba.mode, "random, sweep-up or sweep-down")->capture_default_str();
    bench->add_option("--count", ba.count)->capture_default_str();
    bench->add_option("--range", ba.range, "LO,HI")->required()->delimiter(',')->expected(2);
    bench->add_option("--seed", ba.seed)->capture_default_str();
    bench->add_option("--cache-fraction", ba.cache_fraction)->capture_default_str();
    bench->add_option("--backend", ba.backend, "gpu or cpu")->capture_default_str();
    bench->add_option("-o,--output", ba.output, "JSON stats path")->required();

    std::string info_input;
    auto* info = app.add_subcommand("info", "Print a container header summary");
    info->add_option("container", info_input)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (compress->parsed()) return cmd_compress(ca, out);
        if (extract->parsed()) return cmd_extract(ea, out, err);
        if (bench->parsed()) return cmd_bench(ba, out, err);
        return cmd_info(info_input, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

} // namespace bcmc::cli
