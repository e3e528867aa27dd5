#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pmetric {

// A check passes when `value` is strictly below `bound`.
struct CheckResult {
    std::string module;
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// Invariant suite over every module on built-in graphs and triangulations.
// Randomized sweeps draw from a generator seeded with `seed`.
std::vector<CheckResult> run_selftest(std::uint64_t seed);

} // namespace pmetric
