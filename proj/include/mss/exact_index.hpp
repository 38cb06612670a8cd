// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mss/fingerprint.hpp"
#include "mss/topk.hpp"

namespace mss {

/// Scan execution policy. Parallel scans are chunked across OpenMP threads
/// and merged deterministically, so both policies return identical results.
enum class Exec : std::uint8_t { Serial = 0, Parallel = 1 };

/// Bit-count pruning window [lo, hi] for a query with `query_count` set bits
/// at similarity cutoff `cutoff`: lo = ceil(c * Sc), hi = floor(c / Sc).
struct PruneRange {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
};

PruneRange prune_range(std::uint32_t query_count, double cutoff);

/// Exhaustive index over fingerprints sorted by (bit_count, id), with
/// bucket offsets for bit-count range pruning and an optional folded copy of
/// every entry for two-stage search.
class BitBoundIndex {
public:
    BitBoundIndex() = default;

    /// Sorts the database by (bit_count, id) and builds the bucket offsets.
    /// With a FoldSpec, also stores fold(entry) for every entry.
    static BitBoundIndex build(std::span<const Fingerprint> db,
                               std::optional<FoldSpec> spec = std::nullopt);

    const std::vector<Fingerprint>& entries() const { return entries_; }
    const std::vector<Fingerprint>& folded_entries() const { return folded_entries_; }

    /// bucket_offsets[c] = first entry index with bit_count >= c;
    /// size is L + 2 so bucket_offsets[L + 1] is the total entry count.
    const std::vector<std::uint64_t>& bucket_offsets() const { return bucket_offsets_; }

    std::uint32_t length_bits() const { return length_bits_; }
    std::uint64_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    bool has_fold() const { return fold_spec_.has_value(); }
    const std::optional<FoldSpec>& fold_spec() const { return fold_spec_; }

    /// Entry index range [first, last) whose bit counts fall inside the
    /// pruning window.
    std::pair<std::uint64_t, std::uint64_t> band(const PruneRange& range) const;

    /// Number of entries inside the pruning window.
    std::uint64_t band_size(const PruneRange& range) const;

    const Fingerprint& entry_by_id(std::uint64_t id) const;

private:
    std::vector<Fingerprint> entries_;
    std::vector<Fingerprint> folded_entries_;
    std::vector<std::uint64_t> bucket_offsets_;
    std::unordered_map<std::uint64_t, std::uint64_t> position_by_id_;
    std::uint32_t length_bits_ = 0;
    std::optional<FoldSpec> fold_spec_;
};

/// k_r1 = k * m * ceil(log2(2m)): stage-1 candidate count for the two-stage
/// folded search.
std::uint64_t two_stage_k_r1(std::uint64_t k, std::uint32_t m);

/// Linear scan over the whole database.
TopKResult search_bruteforce(std::span<const Fingerprint> db, const Fingerprint& query,
                             std::size_t k, Exec exec = Exec::Serial);
TopKResult search_bruteforce(const BitBoundIndex& index, const Fingerprint& query,
                             std::size_t k, Exec exec = Exec::Serial);

/// Exhaustive search restricted to the bit-count band; hits below the cutoff
/// are dropped. Exact: equals brute force filtered by score >= cutoff.
TopKResult search_bitbound(const BitBoundIndex& index, const Fingerprint& query,
                           std::size_t k, double cutoff, Exec exec = Exec::Serial);

/// Two-stage folded search: stage 1 ranks folded entries inside the band and
/// keeps k_r1 candidates; stage 2 rescores them on the original fingerprints
/// and applies the cutoff to exact scores only.
TopKResult search_two_stage(const BitBoundIndex& index, const Fingerprint& query,
                            std::size_t k, double cutoff, Exec exec = Exec::Serial);

/// Two-stage search without a cutoff: no band pruning and no score filter.
/// This is the pure top-k matching mode used for recall measurement.
TopKResult search_two_stage_topk(const BitBoundIndex& index, const Fingerprint& query,
                                 std::size_t k, Exec exec = Exec::Serial);

} // namespace mss
