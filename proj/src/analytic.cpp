// SPDX-License-Identifier: Apache-2.0
#include "mss/analytic.hpp"

#include <cmath>

namespace mss {

namespace {

constexpr double kQuadTol = 1e-8;
constexpr double kTailSigmas = 8.0;

void validate_cutoff(double cutoff) {
    if (!(cutoff > 0.0) || cutoff > 1.0)
        throw ParameterError("similarity cutoff must be in (0, 1]");
}

double adaptive_step(double (*f)(double, const void*), const void* ctx, double lo, double hi,
                     double f_lo, double f_hi, double whole, double tol, int depth) {
    double mid = 0.5 * (lo + hi);
    double f_mid = f(mid, ctx);
    double left = 0.25 * (hi - lo) * (f_lo + f_mid);
    double right = 0.25 * (hi - lo) * (f_mid + f_hi);
    if (depth <= 0 || std::abs(left + right - whole) < 3.0 * tol) return left + right;
    return adaptive_step(f, ctx, lo, mid, f_lo, f_mid, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, ctx, mid, hi, f_mid, f_hi, right, 0.5 * tol, depth - 1);
}

struct RetainedContext {
    const GaussianFit* fit;
    double cutoff;
};

double retained_integrand(double x, const void* context) {
    const auto* ctx = static_cast<const RetainedContext*>(context);
    double retained = 1.0 - pruned_fraction(*ctx->fit, x, ctx->cutoff);
    return retained * ctx->fit->density(x);
}

} // namespace

double GaussianFit::density(double x) const {
    double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

GaussianFit fit_gaussian(std::span<const std::uint32_t> counts) {
    if (counts.size() < 2) throw ParameterError("gaussian fit requires at least 2 samples");
    double mean = 0.0;
    for (std::uint32_t c : counts) mean += c;
    mean /= static_cast<double>(counts.size());
    double var = 0.0;
    for (std::uint32_t c : counts) {
        double d = c - mean;
        var += d * d;
    }
    var /= static_cast<double>(counts.size());
    double sigma = std::sqrt(var);
    if (!(sigma > 0.0))
        throw ParameterError("gaussian fit is degenerate: all samples are identical; "
                             "provide counts with at least two distinct values");
    return GaussianFit{mean, sigma};
}

double normal_cdf(double z) {
    return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0)));
}

double pruned_fraction(const GaussianFit& fit, double query_count, double cutoff) {
    validate_cutoff(cutoff);
    double band_lo = query_count * cutoff;
    double band_hi = query_count / cutoff;
    double z_lo = (band_lo - fit.mu) / fit.sigma;
    double z_hi = (band_hi - fit.mu) / fit.sigma;
    double pruned = 1.0 - (normal_cdf(z_hi) - normal_cdf(z_lo));
    if (pruned < 0.0) return 0.0;
    if (pruned > 1.0) return 1.0;
    return pruned;
}

double expected_retained_fraction(const GaussianFit& fit, double cutoff) {
    validate_cutoff(cutoff);
    RetainedContext ctx{&fit, cutoff};
    double lo = fit.mu - kTailSigmas * fit.sigma;
    double hi = fit.mu + kTailSigmas * fit.sigma;
    return integrate_trapezoid(retained_integrand, &ctx, lo, hi, kQuadTol);
}

double expected_speedup(const GaussianFit& fit, double cutoff) {
    double retained = expected_retained_fraction(fit, cutoff);
    // The bands always retain a neighborhood of the query count, so the
    // retained mass is bounded away from zero for any cutoff in (0, 1].
    if (retained < 1e-12) retained = 1e-12;
    double speedup = 1.0 / retained;
    return speedup < 1.0 ? 1.0 : speedup;
}

double empirical_pruned_fraction(const BitBoundIndex& index,
                                 std::span<const Fingerprint> queries, double cutoff) {
    validate_cutoff(cutoff);
    if (index.empty()) throw ParameterError("empirical pruned fraction needs a nonempty index");
    if (queries.empty()) return 0.0;
    double total = 0.0;
    auto db_size = static_cast<double>(index.size());
    for (const Fingerprint& q : queries) {
        std::uint64_t inside = index.band_size(prune_range(q.bit_count(), cutoff));
        total += 1.0 - static_cast<double>(inside) / db_size;
    }
    return total / static_cast<double>(queries.size());
}

double integrate_trapezoid(double (*f)(double, const void*), const void* context, double lo,
                           double hi, double abs_tol) {
    if (!(hi > lo)) return 0.0;
    double f_lo = f(lo, context);
    double f_hi = f(hi, context);
    double whole = 0.5 * (hi - lo) * (f_lo + f_hi);
    return adaptive_step(f, context, lo, hi, f_lo, f_hi, whole, abs_tol, 48);
}

} // namespace mss
