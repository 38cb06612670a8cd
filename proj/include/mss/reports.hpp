// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>

#include "mss/analytic.hpp"
#include "mss/cost_model.hpp"

namespace mss {

/// Analytic model rows: "Sc,R_bar,speedup" per cutoff, where R_bar is the
/// expected pruned fraction over queries sharing the database distribution.
std::string model_report_csv(const GaussianFit& fit, std::span<const double> cutoffs);

/// Hardware cost rows as a JSON array of {m, kernel_GBs, kernels, qps,
/// feasible}.
std::string cost_report_json(const PlatformSpec& spec, std::uint64_t db_size,
                             std::span<const std::uint32_t> fold_ms, double pruned_fraction);

} // namespace mss
