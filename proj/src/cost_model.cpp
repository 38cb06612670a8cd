// SPDX-License-Identifier: Apache-2.0
#include "mss/cost_model.hpp"

#include <cmath>

namespace mss {

namespace {

void validate_spec(const PlatformSpec& spec) {
    if (!(spec.peak_bandwidth_GBs > 0.0) || !(spec.efficiency > 0.0) ||
        spec.efficiency > 1.0 || !(spec.bandwidth_cap_GBs > 0.0) ||
        !(spec.kernel_freq_Hz > 0.0) || spec.fingerprint_bits == 0)
        throw ParameterError("platform parameters must be positive (efficiency in (0, 1])");
}

} // namespace

double kernel_bandwidth_GBs(const PlatformSpec& spec, std::uint32_t fold_m) {
    validate_spec(spec);
    if (fold_m == 0 || spec.fingerprint_bits % fold_m != 0)
        throw ParameterError("fold level must divide the fingerprint length");
    double bytes_per_entry = static_cast<double>(spec.fingerprint_bits) / fold_m / 8.0;
    return bytes_per_entry * spec.kernel_freq_Hz / 1e9;
}

KernelFit max_kernels(const PlatformSpec& spec, std::uint32_t fold_m) {
    double per_kernel = kernel_bandwidth_GBs(spec, fold_m);
    double usable = spec.usable_bandwidth_GBs();
    if (per_kernel > usable) return KernelFit{0, false};
    return KernelFit{static_cast<std::uint32_t>(std::floor(usable / per_kernel)), true};
}

double throughput_qps(const PlatformSpec& spec, std::uint64_t db_size, std::uint32_t fold_m,
                      double pruned_fraction) {
    if (db_size == 0) throw ParameterError("database size must be at least 1");
    if (pruned_fraction < 0.0 || !(pruned_fraction < 1.0))
        throw ParameterError("pruned fraction must be in [0, 1)");
    KernelFit fit = max_kernels(spec, fold_m);
    if (!fit.feasible) return 0.0;
    double scanned = static_cast<double>(db_size) * (1.0 - pruned_fraction);
    return fit.kernels * spec.kernel_freq_Hz / scanned;
}

CostReport cost_report(const PlatformSpec& spec, std::uint64_t db_size, std::uint32_t fold_m,
                       double pruned_fraction) {
    CostReport report;
    report.fold_m = fold_m;
    report.kernel_GBs = kernel_bandwidth_GBs(spec, fold_m);
    KernelFit fit = max_kernels(spec, fold_m);
    report.kernels = fit.kernels;
    report.feasible = fit.feasible;
    report.qps = throughput_qps(spec, db_size, fold_m, pruned_fraction);
    return report;
}

} // namespace mss
