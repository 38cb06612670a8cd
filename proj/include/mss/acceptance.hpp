// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mss::acceptance {

struct CriterionResult {
    int number = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Runs the full acceptance suite, printing one pass/fail line per criterion.
std::vector<CriterionResult> run_all(std::ostream& out);

bool all_passed(const std::vector<CriterionResult>& results);

} // namespace mss::acceptance
