// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "mss/error.hpp"

namespace mss {

/// Bandwidth-bounded accelerator platform. Usable bandwidth is the minimum of
/// peak * efficiency and the explicit cap.
struct PlatformSpec {
    double peak_bandwidth_GBs = 460.0;
    double efficiency = 0.90;
    double bandwidth_cap_GBs = 410.0;
    double kernel_freq_Hz = 450e6;
    std::uint32_t fingerprint_bits = 1024;

    double usable_bandwidth_GBs() const {
        double derated = peak_bandwidth_GBs * efficiency;
        return derated < bandwidth_cap_GBs ? derated : bandwidth_cap_GBs;
    }
};

/// Streaming bandwidth of one scan kernel at fold level m:
/// (fingerprint_bits / m / 8) bytes per cycle at the kernel frequency.
double kernel_bandwidth_GBs(const PlatformSpec& spec, std::uint32_t fold_m);

struct KernelFit {
    std::uint32_t kernels = 0;
    bool feasible = false; ///< false when one kernel already exceeds the budget
};

/// How many kernels fit in the usable bandwidth.
KernelFit max_kernels(const PlatformSpec& spec, std::uint32_t fold_m);

/// Queries per second: kernels * freq / (N * (1 - pruned_fraction)).
/// Brute force is pruned_fraction = 0 and fold_m = 1.
double throughput_qps(const PlatformSpec& spec, std::uint64_t db_size, std::uint32_t fold_m,
                      double pruned_fraction);

/// One row of the hardware cost report.
struct CostReport {
    std::uint32_t fold_m = 1;
    double kernel_GBs = 0.0;
    std::uint32_t kernels = 0;
    double qps = 0.0;
    bool feasible = false;
};

CostReport cost_report(const PlatformSpec& spec, std::uint64_t db_size, std::uint32_t fold_m,
                       double pruned_fraction);

} // namespace mss
