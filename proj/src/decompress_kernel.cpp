// Device-side block decoder. It consumes the bitstream as 32-bit words and
// keeps each 64-bit coefficient bit plane as two 32-bit halves, the form a
// shader without 64-bit integers needs. It is kept separate from the host
// decoder in codec.cpp so that the two can be checked against each other.

#include "bcmc/device_volume.hpp"

#include <array>
#include <cmath>
#include <string>

namespace bcmc {

namespace {

constexpr std::uint32_t kMask = 0xaaaaaaaau;

class WordReader {
public:
    WordReader(std::span<const std::uint32_t> words, std::size_t first_word)
        : words_(words), base_(first_word)
    {
    }

    std::uint32_t bit()
    {
        const std::uint32_t b = (words_[base_ + (pos_ >> 5)] >> (pos_ & 31u)) & 1u;
        ++pos_;
        return b;
    }

    /// n <= 32
    std::uint32_t bits(std::uint32_t n)
    {
        std::uint32_t v = 0;
        for (std::uint32_t i = 0; i < n; ++i) v |= bit() << i;
        return v;
    }

private:
    std::span<const std::uint32_t> words_;
    std::size_t base_;
    std::uint32_t pos_ = 0;
};

std::int32_t as_int(std::uint32_t u) { return static_cast<std::int32_t>(u); }
std::uint32_t as_uint(std::int32_t i) { return static_cast<std::uint32_t>(i); }
std::uint32_t asr1(std::uint32_t u) { return as_uint(as_int(u) >> 1); }

// Inverse of the decorrelating lift on four values spaced `s` apart.
void unlift(std::array<std::uint32_t, 64>& v, std::uint32_t o, std::uint32_t s)
{
    std::uint32_t x = v[o], y = v[o + s], z = v[o + 2 * s], w = v[o + 3 * s];
    y += asr1(w);
    w -= asr1(y);
    y += w;
    w <<= 1;
    w -= y;
    z += x;
    x <<= 1;
    x -= z;
    y += z;
    z <<= 1;
    z -= y;
    w += x;
    x <<= 1;
    x -= w;
    v[o] = x;
    v[o + s] = y;
    v[o + 2 * s] = z;
    v[o + 3 * s] = w;
}

void decode_one(std::span<const std::uint32_t> words, std::size_t first_word, std::uint32_t rate,
                std::span<float> out)
{
    WordReader r(words, first_word);
    if (r.bit() == 0) {
        for (float& f : out) f = 0.f;
        return;
    }
    const int emax = static_cast<int>(r.bits(8)) - 127;

    std::array<std::uint32_t, 64> coeff{};
    std::uint32_t budget = 64 * rate - 9;
    std::uint32_t n = 0;
    for (int k = 31; k >= 0 && budget > 0; --k) {
        const std::uint32_t m = n < budget ? n : budget;
        budget -= m;
        std::uint32_t lo = r.bits(m < 32 ? m : 32);
        std::uint32_t hi = m > 32 ? r.bits(m - 32) : 0;
        while (n < 64 && budget > 0) {
            --budget;
            if (r.bit() == 0) break;
            while (n < 63 && budget > 0) {
                --budget;
                if (r.bit() != 0) break;
                ++n;
            }
            if (n < 32) {
                lo |= 1u << n;
            } else {
                hi |= 1u << (n - 32);
            }
            ++n;
        }
        for (std::uint32_t i = 0; i < 32; ++i) {
            coeff[i] |= ((lo >> i) & 1u) << k;
            coeff[i + 32] |= ((hi >> i) & 1u) << k;
        }
    }

    std::array<std::uint32_t, 64> v{};
    const auto& order = sequency_order();
    for (std::uint32_t i = 0; i < 64; ++i) v[order[i]] = (coeff[i] ^ kMask) - kMask;

    for (std::uint32_t xy = 0; xy < 16; ++xy) unlift(v, xy, 16);
    for (std::uint32_t x = 0; x < 4; ++x)
        for (std::uint32_t z = 0; z < 4; ++z) unlift(v, 16 * z + x, 4);
    for (std::uint32_t yz = 0; yz < 16; ++yz) unlift(v, 4 * yz, 1);

    for (std::uint32_t i = 0; i < 64; ++i) out[i] = std::ldexp(static_cast<float>(as_int(v[i])), emax - 30);
}

} // namespace

DeviceVolume upload_volume(Device& device, const CompressedVolume& cv)
{
    DeviceVolume dv;
    dv.dims = cv.dims;
    dv.grid = cv.grid;
    dv.rate_bits = cv.rate_bits;
    dv.words_per_block = static_cast<std::uint32_t>(block_bytes(cv.rate_bits) / 4);

    std::vector<std::uint32_t> words(cv.bitstream.size() / 4);
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::uint32_t w = 0;
        for (std::size_t b = 0; b < 4; ++b) w |= std::to_integer<std::uint32_t>(cv.bitstream[4 * i + b]) << (8 * b);
        words[i] = w;
    }
    dv.words = device.upload(std::span<const std::uint32_t>(words));
    dv.mins = device.upload(std::span<const float>(cv.ranges.mins));
    dv.maxs = device.upload(std::span<const float>(cv.ranges.maxs));
    return dv;
}

void gpu_decompress_blocks(Device& device, const DeviceVolume& volume, const Buffer<std::uint32_t>& new_ids,
                           std::size_t n_new, const Buffer<std::int32_t>& slot_of, Buffer<float>& pool)
{
    auto ids = new_ids.span();
    auto slots = slot_of.span();
    auto words = volume.words.span();
    auto data = pool.span();
    const std::size_t pool_slots = data.size() / kBlockVoxels;
    for (std::size_t i = 0; i < n_new; ++i) {
        const std::int32_t s = slots[ids[i]];
        if (s < 0 || static_cast<std::size_t>(s) >= pool_slots) {
            throw BoundsError("block " + std::to_string(ids[i]) + " has no valid cache slot");
        }
    }
    device.dispatch_threads(n_new, 64, [&](std::uint32_t i) {
        const std::uint32_t b = ids[i];
        const auto slot = static_cast<std::size_t>(slots[b]);
        decode_one(words, std::size_t{b} * volume.words_per_block, volume.rate_bits,
                   data.subspan(slot * kBlockVoxels, kBlockVoxels));
    });
}

} // namespace bcmc
