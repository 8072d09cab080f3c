#include "support.hpp"

#include <doctest.h>

TEST_SUITE("backend_equivalence")
{
    TEST_CASE("every kernel agrees across executors")
    {
        const auto s = bcmc::test::backend_fuzz(2024, 8);
        CHECK(s.total_cases() > 0);
        for (const auto& [kernel, n] : s.mismatches) {
            INFO(kernel);
            CHECK(n == 0);
        }
    }
}
