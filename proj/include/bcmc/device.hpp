#pragma once

// Minimal WebGPU-style compute device.
//
// Kernels are written in GPU form: a body invoked once per thread and per
// barrier phase, with workgroup-shared state that lives for one workgroup.
// Phase p of every thread in a workgroup completes before phase p + 1 of
// any thread starts, which is exactly the guarantee of a workgroup barrier.
// Thread-private values that must survive a barrier are kept in the shared
// struct indexed by the local thread id.
//
// Two executors run the same kernels:
//   Backend::gpu  workgroups run concurrently on a TBB pool, and threads of a
//                 phase run in descending local order, so any kernel relying
//                 on an unguaranteed ordering diverges from the mirror.
//   Backend::cpu  serial mirror: workgroups in order, threads in index order.

#include "bcmc/error.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace bcmc {

enum class Backend { gpu, cpu };

std::string_view to_string(Backend backend);
/// Accepts "gpu" or "cpu"; throws ParameterError otherwise.
Backend parse_backend(std::string_view name);

struct Invocation {
    std::uint32_t local;
    std::uint32_t group;
    std::uint32_t global;
};

struct DispatchShape {
    std::uint32_t workgroup_count = 0;
    std::uint32_t workgroup_size = 64;
    std::uint32_t phases = 1;
};

struct NoShared {};

struct PassTiming {
    std::string label;
    double ms = 0.0;
};

struct TransferStats {
    std::size_t scalar_reads = 0;
    std::size_t scalar_elements = 0;
    std::size_t downloads = 0;
};

namespace detail {

struct MemoryAccount {
    std::size_t budget = 0;
    std::size_t used = 0;
};

class Reservation {
public:
    Reservation() = default;
    Reservation(std::shared_ptr<MemoryAccount> account, std::size_t bytes);
    Reservation(Reservation&& other) noexcept;
    Reservation& operator=(Reservation&& other) noexcept;
    Reservation(const Reservation&) = delete;
    Reservation& operator=(const Reservation&) = delete;
    ~Reservation();

private:
    void release() noexcept;

    std::shared_ptr<MemoryAccount> account_;
    std::size_t bytes_ = 0;
};

} // namespace detail

/// Fixed-length device storage buffer of u32, i32 or f32 elements.
template <typename T>
class Buffer {
    static_assert(std::is_same_v<T, std::uint32_t> || std::is_same_v<T, std::int32_t> || std::is_same_v<T, float>,
                  "device buffers hold u32, i32 or f32 elements");

public:
    Buffer() = default;

    std::size_t size() const { return data_.size(); }
    std::span<T> span() { return data_; }
    std::span<const T> span() const { return data_; }

private:
    friend class Device;

    Buffer(std::vector<T> data, detail::Reservation reservation)
        : data_(std::move(data)), reservation_(std::move(reservation))
    {
    }

    std::vector<T> data_;
    detail::Reservation reservation_;
};

class CommandList;

class Device {
public:
    static constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

    explicit Device(Backend backend = Backend::gpu, std::size_t memory_budget = kUnlimited);

    Backend backend() const { return backend_; }
    std::size_t bytes_allocated() const { return account_->used; }
    std::size_t memory_budget() const { return account_->budget; }
    const TransferStats& transfer_stats() const { return transfers_; }

    /// Throws OutOfMemoryError when the allocation would exceed the budget.
    template <typename T>
    Buffer<T> create_buffer(std::size_t n, T fill = T{})
    {
        detail::Reservation r(account_, n * sizeof(T));
        return Buffer<T>(std::vector<T>(n, fill), std::move(r));
    }

    template <typename T>
    Buffer<T> upload(std::span<const T> data)
    {
        detail::Reservation r(account_, data.size() * sizeof(T));
        return Buffer<T>(std::vector<T>(data.begin(), data.end()), std::move(r));
    }

    /// Growth is allocate + copy; the old buffer stays valid until replaced.
    template <typename T>
    Buffer<T> grow(const Buffer<T>& old, std::size_t n, T fill = T{})
    {
        Buffer<T> b = create_buffer<T>(n, fill);
        std::copy_n(old.data_.begin(), std::min(n, old.size()), b.data_.begin());
        return b;
    }

    template <typename T>
    void write(Buffer<T>& buf, std::size_t offset, std::span<const T> data)
    {
        if (offset + data.size() > buf.size()) {
            throw BoundsError("buffer write out of range");
        }
        std::copy(data.begin(), data.end(), buf.data_.begin() + static_cast<std::ptrdiff_t>(offset));
    }

    /// Reads back a few control-flow or statistics scalars.
    template <typename T>
    std::vector<T> read_scalars(const Buffer<T>& buf, std::size_t count, std::size_t offset = 0)
    {
        if (offset + count > buf.size()) {
            throw BoundsError("scalar read out of range");
        }
        ++transfers_.scalar_reads;
        transfers_.scalar_elements += count;
        return {buf.data_.begin() + static_cast<std::ptrdiff_t>(offset),
                buf.data_.begin() + static_cast<std::ptrdiff_t>(offset + count)};
    }

    template <typename T>
    T read_scalar(const Buffer<T>& buf, std::size_t index = 0)
    {
        return read_scalars(buf, 1, index).front();
    }

    /// Result readback (vertex buffers, debugging state).
    template <typename T>
    std::vector<T> download(const Buffer<T>& buf, std::size_t count)
    {
        if (count > buf.size()) {
            throw BoundsError("download out of range");
        }
        ++transfers_.downloads;
        return {buf.data_.begin(), buf.data_.begin() + static_cast<std::ptrdiff_t>(count)};
    }

    template <typename T>
    std::vector<T> download(const Buffer<T>& buf)
    {
        return download(buf, buf.size());
    }

    /// Runs `body(const Invocation&, Shared&, phase)` for every thread of
    /// every workgroup, with a barrier between consecutive phases.
    template <typename Shared = NoShared, typename Body>
    void dispatch(const DispatchShape& shape, Body&& body)
    {
        if (shape.workgroup_count == 0) {
            return;
        }
        const auto run_group = [&](std::uint32_t group) {
            Shared shared{};
            for (std::uint32_t phase = 0; phase < shape.phases; ++phase) {
                for (std::uint32_t i = 0; i < shape.workgroup_size; ++i) {
                    const std::uint32_t local = backend_ == Backend::cpu ? i : shape.workgroup_size - 1 - i;
                    body(Invocation{local, group, group * shape.workgroup_size + local}, shared, phase);
                }
            }
        };
        if (backend_ == Backend::cpu) {
            for (std::uint32_t g = 0; g < shape.workgroup_count; ++g) {
                run_group(g);
            }
        } else {
            tbb::parallel_for(std::uint32_t{0}, shape.workgroup_count, run_group);
        }
    }

    /// One-phase kernel over `n` threads; threads past `n` in the last
    /// workgroup exit immediately.
    template <typename Body>
    void dispatch_threads(std::size_t n, std::uint32_t workgroup_size, Body&& body)
    {
        const auto groups = static_cast<std::uint32_t>((n + workgroup_size - 1) / workgroup_size);
        dispatch({groups, workgroup_size, 1}, [&](const Invocation& inv, NoShared&, std::uint32_t) {
            if (inv.global < n) {
                body(inv.global);
            }
        });
    }

    /// Executes the recorded passes in order and returns one host-timed
    /// duration per pass.
    std::vector<PassTiming> submit(const CommandList& commands);

private:
    Backend backend_;
    std::shared_ptr<detail::MemoryAccount> account_;
    TransferStats transfers_;
};

class CommandList {
public:
    void record(std::string label, std::function<void(Device&)> pass)
    {
        passes_.emplace_back(std::move(label), std::move(pass));
    }
    bool empty() const { return passes_.empty(); }
    std::size_t size() const { return passes_.size(); }

private:
    friend class Device;
    std::vector<std::pair<std::string, std::function<void(Device&)>>> passes_;
};

/// Accumulates pass durations by label, preserving first-seen order.
class PassTimes {
public:
    void add(const PassTiming& t);
    void add(const std::vector<PassTiming>& ts);
    const std::vector<PassTiming>& passes() const { return passes_; }
    double total_ms() const;

private:
    std::vector<PassTiming> passes_;
};

} // namespace bcmc
