#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fisherbound {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyOptions {
    uint64_t seed = 2026;
    // Test-only: replace the Walsh-Hadamard transform with a corrupted one.
    bool corrupt_fwht = false;
};

// Cross-module invariant checks at default sizes.
std::vector<CheckResult> run_invariant_suite(const VerifyOptions &opt = {});

}  // namespace fisherbound
