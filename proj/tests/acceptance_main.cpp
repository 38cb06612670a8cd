// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite binary: runs every criterion and prints one pass/fail
// line each. Exits nonzero if any criterion fails.
#include <iostream>

#include "mss/acceptance.hpp"

int main() {
    auto results = mss::acceptance::run_all(std::cout);
    return mss::acceptance::all_passed(results) ? 0 : 1;
}
