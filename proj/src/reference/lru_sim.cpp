#include "bcmc/block_cache.hpp"
#include "bcmc/reference.hpp"

#include <algorithm>
#include <map>

namespace bcmc::reference {

std::vector<LruStep> serial_lru_simulate(std::uint32_t slot_count, const GrowthRule& grow,
                                         const std::vector<std::vector<std::uint32_t>>& active_sets)
{
    struct Slot {
        std::int64_t block = -1;
        std::uint64_t age = kAgeMax;
    };
    std::vector<Slot> slots(slot_count);
    std::map<std::uint32_t, std::size_t> where; // block -> slot

    std::vector<LruStep> steps;
    for (const auto& raw : active_sets) {
        const std::set<std::uint32_t> active(raw.begin(), raw.end());
        for (auto& s : slots) s.age = std::min<std::uint64_t>(s.age + 1, kAgeMax);

        LruStep step;
        std::vector<std::uint32_t> missing;
        for (std::uint32_t b : active) {
            auto it = where.find(b);
            if (it != where.end()) {
                slots[it->second].age = 0;
                ++step.hits;
            } else {
                missing.push_back(b);
            }
        }
        step.misses = static_cast<std::uint32_t>(missing.size());

        if (!missing.empty()) {
            auto available = [&] {
                std::vector<std::size_t> free;
                for (std::size_t s = 0; s < slots.size(); ++s) {
                    if (slots[s].block < 0 || !active.count(static_cast<std::uint32_t>(slots[s].block))) {
                        free.push_back(s);
                    }
                }
                return free;
            };
            auto free = available();
            if (missing.size() > free.size()) {
                const auto n = grow(static_cast<std::uint32_t>(slots.size()), static_cast<std::uint32_t>(missing.size()),
                                    static_cast<std::uint32_t>(free.size()));
                slots.resize(n);
                free = available();
            }
            std::stable_sort(free.begin(), free.end(),
                             [&](std::size_t l, std::size_t r) { return slots[l].age > slots[r].age; });
            for (std::size_t i = 0; i < missing.size(); ++i) {
                Slot& s = slots[free[i]];
                if (s.block >= 0) where.erase(static_cast<std::uint32_t>(s.block));
                s.block = missing[i];
                s.age = 0;
                where[missing[i]] = free[i];
            }
        }

        for (const auto& [b, s] : where) step.resident.insert(b);
        step.slot_count = static_cast<std::uint32_t>(slots.size());
        steps.push_back(std::move(step));
    }
    return steps;
}

} // namespace bcmc::reference
