#include "bcmc/container.hpp"

#include "bcmc/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace bcmc {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 4> kMagic = {'B', 'C', 'M', 'C'};

class Writer {
public:
    explicit Writer(std::vector<std::byte>& out) : out_(out) {}

    template <typename T>
    void put(const T& v)
    {
        const auto* p = reinterpret_cast<const std::byte*>(&v);
        out_.insert(out_.end(), p, p + sizeof(T));
    }

    void put_bytes(std::span<const std::byte> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

private:
    std::vector<std::byte>& out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::byte> in) : in_(in) {}

    template <typename T>
    T get()
    {
        T v;
        std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
        return v;
    }

    std::span<const std::byte> take(std::size_t n)
    {
        if (in_.size() - pos_ < n) {
            throw FormatError("truncated container");
        }
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return in_.size() - pos_; }

private:
    std::span<const std::byte> in_;
    std::size_t pos_ = 0;
};

} // namespace

std::size_t container_header_bytes(std::uint32_t total_blocks)
{
    return kFixedHeaderBytes + 2 * sizeof(float) * std::size_t{total_blocks};
}

std::size_t container_size(std::uint32_t total_blocks, std::uint32_t rate_bits)
{
    return container_header_bytes(total_blocks) + std::size_t{total_blocks} * block_bytes(rate_bits);
}

std::vector<std::byte> serialize_container(const CompressedVolume& cv)
{
    std::vector<std::byte> out;
    out.reserve(container_size(cv.grid.total, cv.rate_bits));
    Writer w(out);
    w.put(kMagic);
    w.put(kContainerVersion);
    for (auto d : cv.dims) w.put(std::uint64_t{d});
    for (auto d : cv.padded_dims) w.put(std::uint64_t{d});
    w.put(static_cast<std::uint32_t>(cv.source_type));
    w.put(cv.rate_bits);
    w.put(cv.global_range.min);
    w.put(cv.global_range.max);
    w.put_bytes(std::as_bytes(std::span(cv.ranges.mins)));
    w.put_bytes(std::as_bytes(std::span(cv.ranges.maxs)));
    w.put_bytes(cv.bitstream);
    return out;
}

CompressedVolume parse_container(std::span<const std::byte> bytes)
{
    Reader r(bytes);
    if (r.get<std::array<char, 4>>() != kMagic) {
        throw FormatError("bad magic: not a .bcmc container");
    }
    const auto version = r.get<std::uint32_t>();
    if (version != kContainerVersion) {
        throw FormatError("unsupported container version " + std::to_string(version));
    }

    CompressedVolume cv;
    for (auto& d : cv.dims) d = r.get<std::uint64_t>();
    for (auto& d : cv.padded_dims) d = r.get<std::uint64_t>();
    for (int a = 0; a < 3; ++a) {
        if (cv.dims[a] == 0 || cv.padded_dims[a] != round_up_to_block(cv.dims[a])) {
            throw FormatError("inconsistent volume extents in header");
        }
    }
    const auto scalar = r.get<std::uint32_t>();
    if (scalar > static_cast<std::uint32_t>(ScalarType::f32)) {
        throw FormatError("unknown source scalar code " + std::to_string(scalar));
    }
    cv.source_type = static_cast<ScalarType>(scalar);
    cv.rate_bits = r.get<std::uint32_t>();
    if (cv.rate_bits < kMinRate || cv.rate_bits > kMaxRate) {
        throw FormatError("rate out of range: " + std::to_string(cv.rate_bits));
    }
    cv.global_range.min = r.get<float>();
    cv.global_range.max = r.get<float>();
    try {
        cv.grid = BlockGrid::for_padded_dims(cv.padded_dims);
    } catch (const Error& e) {
        throw FormatError(e.what());
    }

    const std::size_t total = cv.grid.total;
    const std::size_t payload = total * block_bytes(cv.rate_bits);
    if (r.remaining() != 2 * sizeof(float) * total + payload) {
        throw FormatError("container length does not match header (" + std::to_string(r.remaining()) +
                          " bytes after fixed header)");
    }
    cv.ranges.mins.resize(total);
    cv.ranges.maxs.resize(total);
    std::memcpy(cv.ranges.mins.data(), r.take(total * sizeof(float)).data(), total * sizeof(float));
    std::memcpy(cv.ranges.maxs.data(), r.take(total * sizeof(float)).data(), total * sizeof(float));
    const auto stream = r.take(payload);
    cv.bitstream.assign(stream.begin(), stream.end());
    return cv;
}

std::vector<std::byte> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::byte> bytes(size);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) {
        throw Error("failed reading " + path.string());
    }
    return bytes;
}

void write_container(const std::filesystem::path& path, const CompressedVolume& cv)
{
    const auto bytes = serialize_container(cv);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("failed writing " + path.string());
    }
}

CompressedVolume read_container(const std::filesystem::path& path) { return parse_container(read_file(path)); }

} // namespace bcmc
