// SPDX-License-Identifier: Apache-2.0
#include "mss/synth.hpp"

#include <algorithm>
#include <cmath>

#include "mss/error.hpp"
#include "mss/rng.hpp"

namespace mss {

namespace {

void validate_common(std::uint32_t length_bits, double mu, double sigma) {
    if (length_bits == 0 || length_bits % 64 != 0)
        throw ParameterError("synthetic fingerprint length must be a positive multiple of 64");
    if (!(mu > 0.0) || !(mu < length_bits))
        throw ParameterError("mu must be in (0, L)");
    if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
}

std::uint32_t draw_count(std::mt19937_64& engine, double mu, double sigma,
                         std::uint32_t length_bits) {
    long c = std::lround(mu + sigma * rng::normal(engine));
    if (c < 0) c = 0;
    if (c > static_cast<long>(length_bits)) c = length_bits;
    return static_cast<std::uint32_t>(c);
}

// Smooth position weight profile with roughly 20x dynamic range: a decaying
// component plus one bump, so neighboring positions carry similar weight.
std::vector<double> cumulative_profile(std::uint32_t length_bits) {
    std::vector<double> cum(length_bits);
    double acc = 0.0;
    for (std::uint32_t j = 0; j < length_bits; ++j) {
        double x = static_cast<double>(j) / length_bits;
        double bump = (x - 0.55) / 0.12;
        acc += 0.08 + std::exp(-4.0 * x) + 0.5 * std::exp(-bump * bump);
        cum[j] = acc;
    }
    return cum;
}

std::uint32_t draw_profiled_position(std::mt19937_64& engine, const std::vector<double>& cum) {
    double r = rng::unit(engine) * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), r);
    auto j = static_cast<std::uint32_t>(std::distance(cum.begin(), it));
    return j >= cum.size() ? static_cast<std::uint32_t>(cum.size()) - 1 : j;
}

} // namespace

std::vector<Fingerprint> synthesize(const SynthSpec& spec) {
    validate_common(spec.length_bits, spec.mu, spec.sigma);
    std::mt19937_64 engine(spec.seed);
    std::vector<Fingerprint> db;
    db.reserve(spec.n);

    std::vector<std::uint32_t> positions(spec.length_bits);
    for (std::uint32_t i = 0; i < spec.length_bits; ++i) positions[i] = i;

    for (std::size_t i = 0; i < spec.n; ++i) {
        std::uint32_t count = draw_count(engine, spec.mu, spec.sigma, spec.length_bits);
        // Partial Fisher-Yates: the first `count` slots become the chosen set.
        for (std::uint32_t j = 0; j < count; ++j) {
            auto swap_at =
                j + static_cast<std::uint32_t>(rng::uniform_below(engine, spec.length_bits - j));
            std::swap(positions[j], positions[swap_at]);
        }
        db.push_back(Fingerprint::from_positions(
            spec.length_bits, std::span<const std::uint32_t>(positions.data(), count), i));
    }
    return db;
}

std::vector<Fingerprint> synthesize_clustered(const ClusteredSynthSpec& spec) {
    validate_common(spec.length_bits, spec.mu, spec.sigma);
    if (spec.cluster_size == 0) throw ParameterError("cluster size must be at least 1");
    if (spec.mutation < 0.0 || spec.mutation > 1.0)
        throw ParameterError("mutation must be in [0, 1]");

    std::mt19937_64 engine(spec.seed);
    std::vector<double> cum = cumulative_profile(spec.length_bits);
    std::vector<Fingerprint> db;
    db.reserve(spec.n);
    std::uint64_t next_id = 0;

    while (db.size() < spec.n) {
        std::uint32_t count = draw_count(engine, spec.mu, spec.sigma, spec.length_bits);
        if (count == 0) count = 1;
        Fingerprint parent(spec.length_bits);
        std::vector<std::uint32_t> parent_bits;
        parent_bits.reserve(count);
        while (parent_bits.size() < count) {
            std::uint32_t j = draw_profiled_position(engine, cum);
            if (!parent.test_bit(j)) {
                parent.set_bit(j);
                parent_bits.push_back(j);
            }
        }
        for (std::size_t member = 0; member < spec.cluster_size && db.size() < spec.n;
             ++member) {
            Fingerprint fp(spec.length_bits, next_id++);
            std::size_t dropped = 0;
            for (std::uint32_t j : parent_bits) {
                if (rng::unit(engine) < spec.mutation) {
                    ++dropped;
                    continue;
                }
                fp.set_bit(j);
            }
            for (std::size_t d = 0; d < dropped; ++d) {
                std::uint32_t j;
                do {
                    j = draw_profiled_position(engine, cum);
                } while (fp.test_bit(j));
                fp.set_bit(j);
            }
            db.push_back(std::move(fp));
        }
    }
    return db;
}

std::vector<Fingerprint> sample_queries(const std::vector<Fingerprint>& db, std::size_t count,
                                        std::uint64_t seed) {
    if (db.empty()) throw ParameterError("cannot sample queries from an empty database");
    std::mt19937_64 engine(seed);
    std::vector<Fingerprint> queries;
    queries.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        queries.push_back(db[rng::uniform_below(engine, db.size())]);
    return queries;
}

} // namespace mss
