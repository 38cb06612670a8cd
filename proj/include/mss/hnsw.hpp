// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "mss/fingerprint.hpp"
#include "mss/topk.hpp"

namespace mss {

/// HNSW construction and query parameters. The base layer allows 2M
/// neighbors per node, upper layers M. level_scale <= 0 selects the
/// reference value 1 / ln(M).
struct HnswParams {
    std::uint32_t M = 16;
    std::uint32_t ef_construction = 200;
    std::uint32_t ef_search = 64;
    double level_scale = 0.0;
    std::uint64_t seed = 0;

    std::uint32_t max_degree(std::uint32_t layer) const { return layer == 0 ? 2 * M : M; }
    double effective_level_scale() const;
};

/// Multi-layer proximity graph over Tanimoto distance (1 - similarity).
/// Construction is sequential; after freeze() the graph is immutable and
/// safe for concurrent queries.
class HnswGraph {
public:
    explicit HnswGraph(HnswParams params);

    /// Insert one fingerprint. Draws the node level, descends greedily to
    /// that level, then connects on every layer from min(level, top) down to
    /// the base using the relative-neighborhood heuristic.
    void insert(const Fingerprint& fp);

    /// Greedy hill climb on one upper layer; returns the id of the local
    /// optimum.
    std::uint64_t search_layer_top(const Fingerprint& query, std::uint64_t entry_id,
                                   std::uint32_t layer) const;

    /// Bounded best-first expansion on the base layer; returns at most ef
    /// (distance, id) pairs sorted by distance ascending.
    std::vector<std::pair<double, std::uint64_t>>
    search_layer_base(const Fingerprint& query, std::uint64_t entry_id, std::size_t ef) const;

    /// Full query: descend the upper layers, expand the base layer with
    /// ef_search, return the best k hits.
    TopKResult search(const Fingerprint& query, std::size_t k) const;
    TopKResult search(const Fingerprint& query, std::size_t k, std::size_t ef_search) const;

    /// Forbid further inserts.
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    std::size_t size() const { return fingerprints_.size(); }
    bool empty() const { return fingerprints_.empty(); }
    const HnswParams& params() const { return params_; }
    std::uint32_t max_level() const { return empty() ? 0 : levels_[entry_slot_]; }
    std::uint64_t entry_point_id() const;
    bool contains(std::uint64_t id) const { return slot_by_id_.count(id) != 0; }
    std::uint32_t level_of(std::uint64_t id) const;
    std::vector<std::uint64_t> neighbors(std::uint64_t id, std::uint32_t layer) const;
    const Fingerprint& fingerprint(std::uint64_t id) const;
    const std::vector<Fingerprint>& fingerprints() const { return fingerprints_; }

    /// Rebuild a graph from serialized parts; adjacency lists are node-major
    /// slot lists per layer (slot = insertion order).
    static HnswGraph from_parts(HnswParams params, std::vector<Fingerprint> fingerprints,
                                std::vector<std::uint32_t> levels,
                                std::vector<std::vector<std::vector<std::uint32_t>>> links,
                                std::uint32_t entry_slot);

    const std::vector<std::uint32_t>& levels() const { return levels_; }
    const std::vector<std::vector<std::vector<std::uint32_t>>>& links() const { return links_; }
    std::uint32_t entry_slot() const { return entry_slot_; }

private:
    struct Candidate {
        double dist;
        std::uint64_t id;
        std::uint32_t slot;
    };

    double distance(const Fingerprint& query, std::uint32_t slot) const;
    double distance_between(std::uint32_t a, std::uint32_t b) const;
    std::uint32_t draw_level();
    std::uint32_t greedy_descent(const Fingerprint& query, std::uint32_t entry,
                                 std::uint32_t layer) const;
    std::vector<Candidate> search_layer(const Fingerprint& query, std::uint32_t entry,
                                        std::size_t ef, std::uint32_t layer) const;
    std::vector<std::uint32_t> select_neighbors(std::uint32_t base,
                                                std::span<const Candidate> candidates,
                                                std::uint32_t max_count) const;
    void shrink_adjacency(std::uint32_t slot, std::uint32_t layer);
    std::uint32_t require_slot(std::uint64_t id) const;

    HnswParams params_;
    std::mt19937_64 level_engine_;
    std::vector<Fingerprint> fingerprints_;
    std::vector<std::uint32_t> levels_;
    // links_[slot][layer] = neighbor slots, layer in [0, levels_[slot]]
    std::vector<std::vector<std::vector<std::uint32_t>>> links_;
    std::unordered_map<std::uint64_t, std::uint32_t> slot_by_id_;
    std::uint32_t entry_slot_ = 0;
    bool frozen_ = false;
};

} // namespace mss
