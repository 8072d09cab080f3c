#include "bcmc/codec.hpp"

#include "bcmc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bcmc {

namespace {

constexpr std::uint8_t idx(int x, int y, int z) { return static_cast<std::uint8_t>(x + 4 * y + 16 * z); }

// Sorted by total sequency x + y + z.
constexpr std::array<std::uint8_t, kBlockVoxels> kSequencyOrder = {
    idx(0, 0, 0),
    idx(1, 0, 0), idx(0, 1, 0), idx(0, 0, 1),
    idx(0, 1, 1), idx(1, 0, 1), idx(1, 1, 0), idx(2, 0, 0), idx(0, 2, 0), idx(0, 0, 2),
    idx(1, 1, 1), idx(2, 1, 0), idx(2, 0, 1), idx(0, 2, 1), idx(1, 2, 0), idx(1, 0, 2), idx(0, 1, 2),
    idx(3, 0, 0), idx(0, 3, 0), idx(0, 0, 3),
    idx(2, 1, 1), idx(1, 2, 1), idx(1, 1, 2), idx(0, 2, 2), idx(2, 0, 2), idx(2, 2, 0),
    idx(3, 1, 0), idx(3, 0, 1), idx(0, 3, 1), idx(1, 3, 0), idx(1, 0, 3), idx(0, 1, 3),
    idx(1, 2, 2), idx(2, 1, 2), idx(2, 2, 1), idx(3, 1, 1), idx(1, 3, 1), idx(1, 1, 3),
    idx(3, 2, 0), idx(3, 0, 2), idx(0, 3, 2), idx(2, 3, 0), idx(2, 0, 3), idx(0, 2, 3),
    idx(2, 2, 2), idx(3, 2, 1), idx(3, 1, 2), idx(1, 3, 2), idx(2, 3, 1), idx(2, 1, 3), idx(1, 2, 3),
    idx(0, 3, 3), idx(3, 0, 3), idx(3, 3, 0),
    idx(3, 2, 2), idx(2, 3, 2), idx(2, 2, 3), idx(1, 3, 3), idx(3, 1, 3), idx(3, 3, 1),
    idx(2, 3, 3), idx(3, 2, 3), idx(3, 3, 2),
    idx(3, 3, 3),
};

constexpr std::uint32_t kNegabinaryMask = 0xaaaaaaaau;
constexpr int kIntPrecision = 32;

// Two's complement wrap-around arithmetic for the lifting steps.
std::int32_t add(std::int32_t a, std::int32_t b) { return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) + static_cast<std::uint32_t>(b)); }
std::int32_t sub(std::int32_t a, std::int32_t b) { return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) - static_cast<std::uint32_t>(b)); }
std::int32_t twice(std::int32_t a) { return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) << 1); }

void forward_lift(std::int32_t* p, int stride)
{
    std::int32_t x = p[0], y = p[stride], z = p[2 * stride], w = p[3 * stride];
    x = add(x, w); x >>= 1; w = sub(w, x);
    z = add(z, y); z >>= 1; y = sub(y, z);
    x = add(x, z); x >>= 1; z = sub(z, x);
    w = add(w, y); w >>= 1; y = sub(y, w);
    w = add(w, y >> 1); y = sub(y, w >> 1);
    p[0] = x; p[stride] = y; p[2 * stride] = z; p[3 * stride] = w;
}

void inverse_lift(std::int32_t* p, int stride)
{
    std::int32_t x = p[0], y = p[stride], z = p[2 * stride], w = p[3 * stride];
    y = add(y, w >> 1); w = sub(w, y >> 1);
    y = add(y, w); w = twice(w); w = sub(w, y);
    z = add(z, x); x = twice(x); x = sub(x, z);
    y = add(y, z); z = twice(z); z = sub(z, y);
    w = add(w, x); x = twice(x); x = sub(x, w);
    p[0] = x; p[stride] = y; p[2 * stride] = z; p[3 * stride] = w;
}

void forward_transform(std::array<std::int32_t, kBlockVoxels>& b)
{
    for (int z = 0; z < 4; ++z)
        for (int y = 0; y < 4; ++y) forward_lift(b.data() + 4 * y + 16 * z, 1);
    for (int x = 0; x < 4; ++x)
        for (int z = 0; z < 4; ++z) forward_lift(b.data() + 16 * z + x, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) forward_lift(b.data() + 4 * y + x, 16);
}

void inverse_transform(std::array<std::int32_t, kBlockVoxels>& b)
{
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) inverse_lift(b.data() + 4 * y + x, 16);
    for (int x = 0; x < 4; ++x)
        for (int z = 0; z < 4; ++z) inverse_lift(b.data() + 16 * z + x, 4);
    for (int z = 0; z < 4; ++z)
        for (int y = 0; y < 4; ++y) inverse_lift(b.data() + 4 * y + 16 * z, 1);
}

std::uint32_t to_negabinary(std::int32_t x) { return (static_cast<std::uint32_t>(x) + kNegabinaryMask) ^ kNegabinaryMask; }
std::int32_t from_negabinary(std::uint32_t x) { return static_cast<std::int32_t>((x ^ kNegabinaryMask) - kNegabinaryMask); }

class BitWriter {
public:
    explicit BitWriter(std::span<std::byte> out) : out_(out) {}

    bool put(bool bit)
    {
        if (bit) {
            out_[pos_ >> 3] |= std::byte{static_cast<unsigned char>(1u << (pos_ & 7))};
        }
        ++pos_;
        return bit;
    }

    /// Writes the low `n` bits of `x` and returns the remaining high bits.
    std::uint64_t put_bits(std::uint64_t x, unsigned n)
    {
        for (unsigned i = 0; i < n; ++i, x >>= 1) {
            put(x & 1u);
        }
        return x;
    }

private:
    std::span<std::byte> out_;
    std::size_t pos_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::byte> in) : in_(in) {}

    bool get()
    {
        const bool bit = (std::to_integer<unsigned>(in_[pos_ >> 3]) >> (pos_ & 7)) & 1u;
        ++pos_;
        return bit;
    }

    std::uint64_t get_bits(unsigned n)
    {
        std::uint64_t x = 0;
        for (unsigned i = 0; i < n; ++i) {
            x |= static_cast<std::uint64_t>(get()) << i;
        }
        return x;
    }

private:
    std::span<const std::byte> in_;
    std::size_t pos_ = 0;
};

void encode_planes(BitWriter& w, std::uint64_t budget, const std::array<std::uint32_t, kBlockVoxels>& data)
{
    unsigned n = 0;
    for (int k = kIntPrecision - 1; budget && k >= 0; --k) {
        std::uint64_t x = 0;
        for (unsigned i = 0; i < kBlockVoxels; ++i) {
            x |= static_cast<std::uint64_t>((data[i] >> k) & 1u) << i;
        }
        const auto m = static_cast<unsigned>(std::min<std::uint64_t>(n, budget));
        budget -= m;
        x = w.put_bits(x, m);
        // Group tests: a 1 announces another significant coefficient, then
        // the following 0 bits skip over insignificant ones.
        for (; n < kBlockVoxels && budget && (budget--, w.put(x != 0)); x >>= 1, n++) {
            for (; n < kBlockVoxels - 1 && budget && (budget--, !w.put(x & 1u)); x >>= 1, n++) {
            }
        }
    }
}

void decode_planes(BitReader& r, std::uint64_t budget, std::array<std::uint32_t, kBlockVoxels>& data)
{
    data.fill(0);
    unsigned n = 0;
    for (int k = kIntPrecision - 1; budget && k >= 0; --k) {
        const auto m = static_cast<unsigned>(std::min<std::uint64_t>(n, budget));
        budget -= m;
        std::uint64_t x = r.get_bits(m);
        for (; n < kBlockVoxels && budget && (budget--, r.get()); x += std::uint64_t{1} << n++) {
            for (; n < kBlockVoxels - 1 && budget && (budget--, !r.get()); n++) {
            }
        }
        for (unsigned i = 0; x; ++i, x >>= 1) {
            data[i] += static_cast<std::uint32_t>(x & 1u) << k;
        }
    }
}

int block_exponent(std::span<const float, kBlockVoxels> values)
{
    float peak = 0.f;
    for (float v : values) {
        peak = std::max(peak, std::fabs(v));
    }
    if (peak == 0.f) {
        return -kExponentBias;
    }
    int e = 0;
    std::frexp(peak, &e);
    return std::max(e, 1 - kExponentBias);
}

} // namespace

const std::array<std::uint8_t, kBlockVoxels>& sequency_order() { return kSequencyOrder; }

void check_rate(std::uint32_t rate_bits)
{
    if (rate_bits < kMinRate || rate_bits > kMaxRate) {
        throw ParameterError("rate must be in [" + std::to_string(kMinRate) + ", " + std::to_string(kMaxRate) +
                             "] bits per voxel, got " + std::to_string(rate_bits));
    }
}

void encode_block(std::span<const float, kBlockVoxels> values, std::uint32_t rate_bits, std::span<std::byte> out)
{
    check_rate(rate_bits);
    if (out.size() < block_bytes(rate_bits)) {
        throw ParameterError("output span too small for one encoded block");
    }
    for (float v : values) {
        if (!std::isfinite(v)) {
            throw EncodeError("cannot encode non-finite value");
        }
    }
    std::fill_n(out.begin(), block_bytes(rate_bits), std::byte{0});

    BitWriter w(out);
    const int emax = block_exponent(values);
    const int biased = emax + kExponentBias;
    if (biased <= 0) {
        w.put(false);
        return;
    }
    w.put(true);
    w.put_bits(static_cast<std::uint64_t>(biased), kExponentBits - 1);

    std::array<std::int32_t, kBlockVoxels> ints{};
    for (unsigned i = 0; i < kBlockVoxels; ++i) {
        ints[i] = static_cast<std::int32_t>(std::ldexp(values[i], kIntPrecision - 2 - emax));
    }
    forward_transform(ints);

    std::array<std::uint32_t, kBlockVoxels> coeffs{};
    for (unsigned i = 0; i < kBlockVoxels; ++i) {
        coeffs[i] = to_negabinary(ints[kSequencyOrder[i]]);
    }
    encode_planes(w, std::uint64_t{kBlockVoxels} * rate_bits - kExponentBits, coeffs);
}

std::vector<std::byte> encode_block(std::span<const float, kBlockVoxels> values, std::uint32_t rate_bits)
{
    check_rate(rate_bits);
    std::vector<std::byte> out(block_bytes(rate_bits));
    encode_block(values, rate_bits, out);
    return out;
}

Block decode_block(std::span<const std::byte> payload, std::uint32_t rate_bits)
{
    check_rate(rate_bits);
    if (payload.size() < block_bytes(rate_bits)) {
        throw DecodeError("truncated block payload: " + std::to_string(payload.size()) + " of " +
                          std::to_string(block_bytes(rate_bits)) + " bytes");
    }

    Block out{};
    BitReader r(payload);
    if (!r.get()) {
        return out;
    }
    const int emax = static_cast<int>(r.get_bits(kExponentBits - 1)) - kExponentBias;

    std::array<std::uint32_t, kBlockVoxels> coeffs{};
    decode_planes(r, std::uint64_t{kBlockVoxels} * rate_bits - kExponentBits, coeffs);

    std::array<std::int32_t, kBlockVoxels> ints{};
    for (unsigned i = 0; i < kBlockVoxels; ++i) {
        ints[kSequencyOrder[i]] = from_negabinary(coeffs[i]);
    }
    inverse_transform(ints);
    for (unsigned i = 0; i < kBlockVoxels; ++i) {
        out[i] = std::ldexp(static_cast<float>(ints[i]), emax - (kIntPrecision - 2));
    }
    return out;
}

std::span<const std::byte> CompressedVolume::block_payload(std::uint32_t id) const
{
    if (id >= grid.total) {
        throw BoundsError("block id outside compressed volume");
    }
    const std::size_t n = block_bytes(rate_bits);
    return std::span<const std::byte>(bitstream).subspan(id * n, n);
}

CompressedVolume compress_volume(const VolumeF32& vol, std::uint32_t rate_bits, ScalarType source_type)
{
    check_rate(rate_bits);
    CompressedVolume cv;
    cv.dims = vol.dims;
    cv.padded_dims = vol.padded_dims;
    cv.grid = BlockGrid::for_padded_dims(vol.padded_dims);
    cv.source_type = source_type;
    cv.rate_bits = rate_bits;
    cv.global_range = vol.value_range;
    cv.ranges.mins.resize(cv.grid.total);
    cv.ranges.maxs.resize(cv.grid.total);

    const std::size_t n = block_bytes(rate_bits);
    cv.bitstream.resize(std::size_t{cv.grid.total} * n);
    for (std::uint32_t id = 0; id < cv.grid.total; ++id) {
        const Block block = extract_block(vol, cv.grid, id);
        const auto payload = std::span<std::byte>(cv.bitstream).subspan(id * n, n);
        encode_block(block, rate_bits, payload);

        const Block decoded = decode_block(payload, rate_bits);
        const auto [lo, hi] = std::minmax_element(decoded.begin(), decoded.end());
        cv.ranges.mins[id] = *lo;
        cv.ranges.maxs[id] = *hi;
    }
    return cv;
}

VolumeF32 decompress_volume(const CompressedVolume& cv)
{
    VolumeF32 vol;
    vol.dims = cv.dims;
    vol.padded_dims = cv.padded_dims;
    vol.values.resize(cv.padded_dims[0] * cv.padded_dims[1] * cv.padded_dims[2]);
    for (std::uint32_t id = 0; id < cv.grid.total; ++id) {
        const Block block = decode_block(cv.block_payload(id), cv.rate_bits);
        const BlockCoord b = cv.grid.coords(id);
        for (std::uint32_t z = 0; z < 4; ++z)
            for (std::uint32_t y = 0; y < 4; ++y)
                for (std::uint32_t x = 0; x < 4; ++x)
                    vol.values[vol.index(b[0] * 4 + x, b[1] * 4 + y, b[2] * 4 + z)] = block[x + 4 * (y + 4 * z)];
    }

    float lo = vol.at(0, 0, 0);
    float hi = lo;
    for (std::uint64_t z = 0; z < vol.dims[2]; ++z)
        for (std::uint64_t y = 0; y < vol.dims[1]; ++y)
            for (std::uint64_t x = 0; x < vol.dims[0]; ++x) {
                lo = std::min(lo, vol.at(x, y, z));
                hi = std::max(hi, vol.at(x, y, z));
            }
    vol.value_range = {lo, hi};
    return vol;
}

} // namespace bcmc
