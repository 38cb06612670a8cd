// SPDX-License-Identifier: Apache-2.0
#include "mss/reports.hpp"

#include <cstdio>

#include <json.hpp>

namespace mss {

namespace {

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

} // namespace

std::string model_report_csv(const GaussianFit& fit, std::span<const double> cutoffs) {
    std::string out = "Sc,R_bar,speedup\n";
    for (double cutoff : cutoffs) {
        double retained = expected_retained_fraction(fit, cutoff);
        double pruned = 1.0 - retained;
        if (pruned < 0.0) pruned = 0.0;
        out += format_double(cutoff);
        out += ',' + format_double(pruned);
        out += ',' + format_double(expected_speedup(fit, cutoff));
        out += '\n';
    }
    return out;
}

std::string cost_report_json(const PlatformSpec& spec, std::uint64_t db_size,
                             std::span<const std::uint32_t> fold_ms, double pruned_fraction) {
    nlohmann::json array = nlohmann::json::array();
    for (std::uint32_t m : fold_ms) {
        CostReport report = cost_report(spec, db_size, m, pruned_fraction);
        nlohmann::json item;
        item["m"] = report.fold_m;
        item["kernel_GBs"] = report.kernel_GBs;
        item["kernels"] = report.kernels;
        item["qps"] = report.qps;
        item["feasible"] = report.feasible;
        array.push_back(std::move(item));
    }
    return array.dump(2) + "\n";
}

} // namespace mss
