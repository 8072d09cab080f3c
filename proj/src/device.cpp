#include "bcmc/device.hpp"

#include <string>

namespace bcmc {

std::string_view to_string(Backend backend) { return backend == Backend::gpu ? "gpu" : "cpu"; }

Backend parse_backend(std::string_view name)
{
    if (name == "gpu") return Backend::gpu;
    if (name == "cpu") return Backend::cpu;
    throw ParameterError("unknown backend '" + std::string(name) + "' (expected gpu or cpu)");
}

namespace detail {

Reservation::Reservation(std::shared_ptr<MemoryAccount> account, std::size_t bytes)
    : account_(std::move(account)), bytes_(bytes)
{
    if (bytes_ > account_->budget - account_->used) {
        throw OutOfMemoryError("device allocation of " + std::to_string(bytes_) + " bytes exceeds budget (" +
                               std::to_string(account_->used) + " of " + std::to_string(account_->budget) +
                               " bytes in use)");
    }
    account_->used += bytes_;
}

Reservation::Reservation(Reservation&& other) noexcept
    : account_(std::move(other.account_)), bytes_(std::exchange(other.bytes_, 0))
{
}

Reservation& Reservation::operator=(Reservation&& other) noexcept
{
    if (this != &other) {
        release();
        account_ = std::move(other.account_);
        bytes_ = std::exchange(other.bytes_, 0);
    }
    return *this;
}

Reservation::~Reservation() { release(); }

void Reservation::release() noexcept
{
    if (account_) {
        account_->used -= bytes_;
        bytes_ = 0;
        account_.reset();
    }
}

} // namespace detail

Device::Device(Backend backend, std::size_t memory_budget)
    : backend_(backend), account_(std::make_shared<detail::MemoryAccount>(detail::MemoryAccount{memory_budget, 0}))
{
}

std::vector<PassTiming> Device::submit(const CommandList& commands)
{
    using clock = std::chrono::steady_clock;
    std::vector<PassTiming> timings;
    timings.reserve(commands.passes_.size());
    for (const auto& [label, pass] : commands.passes_) {
        const auto start = clock::now();
        pass(*this);
        const std::chrono::duration<double, std::milli> elapsed = clock::now() - start;
        timings.push_back({label, elapsed.count()});
    }
    return timings;
}

void PassTimes::add(const PassTiming& t)
{
    for (auto& p : passes_) {
        if (p.label == t.label) {
            p.ms += t.ms;
            return;
        }
    }
    passes_.push_back(t);
}

void PassTimes::add(const std::vector<PassTiming>& ts)
{
    for (const auto& t : ts) add(t);
}

double PassTimes::total_ms() const
{
    double sum = 0.0;
    for (const auto& p : passes_) sum += p.ms;
    return sum;
}

} // namespace bcmc
