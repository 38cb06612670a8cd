// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mss/fingerprint.hpp"

namespace mss {

/// Plain synthetic database: per fingerprint, the set-bit count is drawn from
/// round(N(mu, sigma^2)) clamped to [0, L], and positions are chosen uniformly.
struct SynthSpec {
    std::size_t n = 0;
    std::uint32_t length_bits = 1024;
    double mu = 47.5;
    double sigma = 12.2;
    std::uint64_t seed = 0;
};

std::vector<Fingerprint> synthesize(const SynthSpec& spec);

/// Clustered synthetic database for recall evaluation. Bit counts follow the
/// same Gaussian model, but entries come in clusters of near neighbors
/// (members share most of a parent's bits) and bit positions are drawn from a
/// smooth non-uniform probability profile, mimicking the position structure
/// of real fingerprint databases. Position-uniform data has no such
/// structure: a query's nearest neighbors sit barely above the score
/// background there, which folding then scrambles.
struct ClusteredSynthSpec {
    std::size_t n = 0;
    std::uint32_t length_bits = 1024;
    double mu = 47.5;
    double sigma = 12.2;
    std::size_t cluster_size = 25;
    double mutation = 0.38; ///< fraction of parent bits resampled per member
    std::uint64_t seed = 0;
};

std::vector<Fingerprint> synthesize_clustered(const ClusteredSynthSpec& spec);

/// Deterministic query sample: `count` entries of `db` chosen by index.
std::vector<Fingerprint> sample_queries(const std::vector<Fingerprint>& db, std::size_t count,
                                        std::uint64_t seed);

} // namespace mss
