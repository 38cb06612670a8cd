// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "mss/exact_index.hpp"

namespace mss {

/// Gaussian model of the database bit-count distribution.
struct GaussianFit {
    double mu = 0.0;
    double sigma = 0.0;

    /// Density f_g(x).
    double density(double x) const;
};

/// Sample mean and population standard deviation of the counts.
GaussianFit fit_gaussian(std::span<const std::uint32_t> counts);

/// Standard normal CDF.
double normal_cdf(double z);

/// Pruned fraction of the search space for one query:
/// R = 1 - integral of f_g over [c * Sc, c / Sc], clamped to [0, 1].
double pruned_fraction(const GaussianFit& fit, double query_count, double cutoff);

/// Expected retained fraction of the database over queries that share the
/// database count distribution: integral of (1 - R(x, Sc)) * f_g(x) dx.
double expected_retained_fraction(const GaussianFit& fit, double cutoff);

/// Model speedup: reciprocal of the expected retained fraction.
double expected_speedup(const GaussianFit& fit, double cutoff);

/// Measured pruned fraction: mean over queries of
/// 1 - (entries inside the prune band) / (total entries).
double empirical_pruned_fraction(const BitBoundIndex& index,
                                 std::span<const Fingerprint> queries, double cutoff);

/// Adaptive trapezoid quadrature with the given absolute tolerance.
double integrate_trapezoid(double (*f)(double, const void*), const void* context, double lo,
                           double hi, double abs_tol);

} // namespace mss
