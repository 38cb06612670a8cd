// SPDX-License-Identifier: Apache-2.0
#include "mss/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mss/rng.hpp"

namespace mss {

namespace {

// Total candidate order: distance ascending, ties by id ascending.
struct NearerFirst {
    bool operator()(const std::pair<double, std::uint64_t>& a,
                    const std::pair<double, std::uint64_t>& b) const {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    }
};

} // namespace

double HnswParams::effective_level_scale() const {
    if (level_scale > 0.0) return level_scale;
    return 1.0 / std::log(static_cast<double>(M));
}

HnswGraph::HnswGraph(HnswParams params) : params_(params), level_engine_(params.seed) {
    if (params_.M < 2) throw ParameterError("HNSW M must be at least 2");
    if (params_.ef_construction < params_.M)
        throw ParameterError("ef_construction must be at least M");
}

double HnswGraph::distance(const Fingerprint& query, std::uint32_t slot) const {
    return 1.0 - tanimoto(query, fingerprints_[slot]).exact();
}

double HnswGraph::distance_between(std::uint32_t a, std::uint32_t b) const {
    return 1.0 - tanimoto(fingerprints_[a], fingerprints_[b]).exact();
}

std::uint32_t HnswGraph::draw_level() {
    double u = rng::unit_positive(level_engine_);
    double level = std::floor(-std::log(u) * params_.effective_level_scale());
    return level < 0.0 ? 0u : static_cast<std::uint32_t>(level);
}

std::uint32_t HnswGraph::require_slot(std::uint64_t id) const {
    auto it = slot_by_id_.find(id);
    if (it == slot_by_id_.end())
        throw ParameterError("unknown node id " + std::to_string(id));
    return it->second;
}

std::uint64_t HnswGraph::entry_point_id() const {
    if (empty()) throw StateError("empty graph has no entry point");
    return fingerprints_[entry_slot_].id();
}

std::uint32_t HnswGraph::level_of(std::uint64_t id) const { return levels_[require_slot(id)]; }

std::vector<std::uint64_t> HnswGraph::neighbors(std::uint64_t id, std::uint32_t layer) const {
    std::uint32_t slot = require_slot(id);
    std::vector<std::uint64_t> out;
    if (layer <= levels_[slot])
        for (std::uint32_t nb : links_[slot][layer]) out.push_back(fingerprints_[nb].id());
    return out;
}

const Fingerprint& HnswGraph::fingerprint(std::uint64_t id) const {
    return fingerprints_[require_slot(id)];
}

// Greedy move to the strictly closer neighbor until a local optimum; among
// equally close improving neighbors the lower id wins.
std::uint32_t HnswGraph::greedy_descent(const Fingerprint& query, std::uint32_t entry,
                                        std::uint32_t layer) const {
    std::uint32_t current = entry;
    double current_dist = distance(query, current);
    bool moved = true;
    while (moved) {
        moved = false;
        std::uint32_t best = current;
        double best_dist = current_dist;
        if (layer <= levels_[current]) {
            for (std::uint32_t nb : links_[current][layer]) {
                double d = distance(query, nb);
                if (d < best_dist ||
                    (d == best_dist && best != current &&
                     fingerprints_[nb].id() < fingerprints_[best].id())) {
                    best = nb;
                    best_dist = d;
                }
            }
        }
        if (best != current && best_dist < current_dist) {
            current = best;
            current_dist = best_dist;
            moved = true;
        }
    }
    return current;
}

// Bounded best-first expansion: candidate min-queue C and result max-queue M,
// both capped at ef. Stops when the closest candidate is farther than the
// farthest kept result.
std::vector<HnswGraph::Candidate> HnswGraph::search_layer(const Fingerprint& query,
                                                          std::uint32_t entry, std::size_t ef,
                                                          std::uint32_t layer) const {
    if (ef == 0) throw ParameterError("ef must be at least 1");

    using Key = std::pair<double, std::uint64_t>; // (distance, id)
    std::set<Key, NearerFirst> candidates;       // C
    std::set<Key, NearerFirst> results;          // M
    std::unordered_map<std::uint64_t, std::uint32_t> slot_of;
    std::vector<char> visited(fingerprints_.size(), 0);

    double entry_dist = distance(query, entry);
    std::uint64_t entry_id = fingerprints_[entry].id();
    visited[entry] = 1;
    candidates.emplace(entry_dist, entry_id);
    results.emplace(entry_dist, entry_id);
    slot_of.emplace(entry_id, entry);

    while (!candidates.empty()) {
        Key top = *candidates.begin();
        candidates.erase(candidates.begin());
        double farthest = std::prev(results.end())->first;
        if (top.first > farthest) break;

        std::uint32_t top_slot = slot_of.at(top.second);
        if (layer > levels_[top_slot]) continue;
        for (std::uint32_t nb : links_[top_slot][layer]) {
            if (visited[nb]) continue;
            visited[nb] = 1;
            double d = distance(query, nb);
            double f = std::prev(results.end())->first;
            if (d < f || results.size() < ef) {
                std::uint64_t nb_id = fingerprints_[nb].id();
                slot_of.emplace(nb_id, nb);
                candidates.emplace(d, nb_id);
                if (candidates.size() > ef) candidates.erase(std::prev(candidates.end()));
                results.emplace(d, nb_id);
                if (results.size() > ef) results.erase(std::prev(results.end()));
            }
        }
    }

    std::vector<Candidate> out;
    out.reserve(results.size());
    for (const Key& key : results)
        out.push_back(Candidate{key.first, key.second, slot_of.at(key.second)});
    return out;
}

// Relative-neighborhood selection with keep-pruned backfill: accept a
// candidate unless it is closer to an already selected neighbor than to the
// base, then top up with the nearest rejected ones.
std::vector<std::uint32_t> HnswGraph::select_neighbors(std::uint32_t base,
                                                       std::span<const Candidate> candidates,
                                                       std::uint32_t max_count) const {
    std::vector<std::uint32_t> selected;
    std::vector<std::uint32_t> discarded;
    for (const Candidate& cand : candidates) {
        if (selected.size() >= max_count) break;
        if (cand.slot == base) continue;
        bool good = true;
        for (std::uint32_t r : selected) {
            if (distance_between(cand.slot, r) < cand.dist) {
                good = false;
                break;
            }
        }
        if (good)
            selected.push_back(cand.slot);
        else
            discarded.push_back(cand.slot);
    }
    for (std::uint32_t d : discarded) {
        if (selected.size() >= max_count) break;
        selected.push_back(d);
    }
    return selected;
}

// Re-select the neighbors of an overflowing node and drop reverse edges of
// the pruned ones, keeping all edges bidirectional.
void HnswGraph::shrink_adjacency(std::uint32_t slot, std::uint32_t layer) {
    std::uint32_t cap = params_.max_degree(layer);
    std::vector<std::uint32_t>& list = links_[slot][layer];
    if (list.size() <= cap) return;

    std::vector<Candidate> candidates;
    candidates.reserve(list.size());
    for (std::uint32_t nb : list)
        candidates.push_back(Candidate{distance_between(slot, nb), fingerprints_[nb].id(), nb});
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.id < b.id;
    });

    std::vector<std::uint32_t> kept = select_neighbors(slot, candidates, cap);
    std::vector<char> keep_mark(fingerprints_.size(), 0);
    for (std::uint32_t nb : kept) keep_mark[nb] = 1;
    for (std::uint32_t nb : list) {
        if (keep_mark[nb]) continue;
        std::vector<std::uint32_t>& reverse = links_[nb][layer];
        reverse.erase(std::remove(reverse.begin(), reverse.end(), slot), reverse.end());
    }
    list = std::move(kept);
}

void HnswGraph::insert(const Fingerprint& fp) {
    if (frozen_) throw StateError("graph is frozen");
    if (slot_by_id_.count(fp.id()))
        throw StateError("duplicate node id " + std::to_string(fp.id()));
    if (!empty() && fp.length() != fingerprints_.front().length())
        throw DimensionError("fingerprint length does not match the graph");

    auto slot = static_cast<std::uint32_t>(fingerprints_.size());
    std::uint32_t level = draw_level();
    fingerprints_.push_back(fp);
    levels_.push_back(level);
    links_.emplace_back(level + 1);
    slot_by_id_.emplace(fp.id(), slot);

    if (slot == 0) {
        entry_slot_ = 0;
        return;
    }

    std::uint32_t top = levels_[entry_slot_];
    std::uint32_t ep = entry_slot_;
    for (std::uint32_t layer = top; layer > level && layer >= 1; --layer)
        ep = greedy_descent(fp, ep, layer);

    std::uint32_t start = std::min(level, top);
    for (std::uint32_t layer = start;; --layer) {
        std::vector<Candidate> found = search_layer(fp, ep, params_.ef_construction, layer);
        std::vector<std::uint32_t> chosen = select_neighbors(slot, found, params_.M);
        for (std::uint32_t nb : chosen) {
            links_[slot][layer].push_back(nb);
            links_[nb][layer].push_back(slot);
            shrink_adjacency(nb, layer);
        }
        if (!found.empty()) ep = found.front().slot;
        if (layer == 0) break;
    }

    if (level > top) entry_slot_ = slot;
}

std::uint64_t HnswGraph::search_layer_top(const Fingerprint& query, std::uint64_t entry_id,
                                          std::uint32_t layer) const {
    if (layer < 1) throw ParameterError("search_layer_top runs on layers >= 1");
    std::uint32_t slot = require_slot(entry_id);
    if (levels_[slot] < layer) throw ParameterError("entry point is not on this layer");
    return fingerprints_[greedy_descent(query, slot, layer)].id();
}

std::vector<std::pair<double, std::uint64_t>>
HnswGraph::search_layer_base(const Fingerprint& query, std::uint64_t entry_id,
                             std::size_t ef) const {
    std::uint32_t slot = require_slot(entry_id);
    std::vector<Candidate> found = search_layer(query, slot, ef, 0);
    std::vector<std::pair<double, std::uint64_t>> out;
    out.reserve(found.size());
    for (const Candidate& c : found) out.emplace_back(c.dist, c.id);
    return out;
}

TopKResult HnswGraph::search(const Fingerprint& query, std::size_t k) const {
    return search(query, k, params_.ef_search);
}

TopKResult HnswGraph::search(const Fingerprint& query, std::size_t k,
                             std::size_t ef_search) const {
    if (k == 0) throw ParameterError("k must be at least 1");
    if (ef_search < k) throw ParameterError("ef_search must be at least k");
    if (empty()) return {};

    std::uint32_t ep = entry_slot_;
    for (std::uint32_t layer = levels_[entry_slot_]; layer >= 1; --layer)
        ep = greedy_descent(query, ep, layer);

    std::vector<Candidate> found = search_layer(query, ep, ef_search, 0);
    TopKResult result;
    result.hits.reserve(std::min(k, found.size()));
    for (const Candidate& c : found) {
        if (result.hits.size() == k) break;
        result.hits.push_back(Hit{tanimoto(query, fingerprints_[c.slot]), c.id});
    }
    std::sort(result.hits.begin(), result.hits.end(), better_hit);
    return result;
}

HnswGraph HnswGraph::from_parts(HnswParams params, std::vector<Fingerprint> fingerprints,
                                std::vector<std::uint32_t> levels,
                                std::vector<std::vector<std::vector<std::uint32_t>>> links,
                                std::uint32_t entry_slot) {
    HnswGraph graph(params);
    if (fingerprints.size() != levels.size() || fingerprints.size() != links.size())
        throw ParameterError("inconsistent graph parts");
    graph.fingerprints_ = std::move(fingerprints);
    graph.levels_ = std::move(levels);
    graph.links_ = std::move(links);
    for (std::uint32_t slot = 0; slot < graph.fingerprints_.size(); ++slot) {
        if (graph.links_[slot].size() != graph.levels_[slot] + 1)
            throw ParameterError("adjacency layer count does not match node level");
        if (!graph.slot_by_id_.emplace(graph.fingerprints_[slot].id(), slot).second)
            throw ParameterError("duplicate node id in graph parts");
    }
    if (!graph.fingerprints_.empty() && entry_slot >= graph.fingerprints_.size())
        throw ParameterError("entry slot out of range");
    graph.entry_slot_ = entry_slot;
    graph.frozen_ = true;
    return graph;
}

} // namespace mss
