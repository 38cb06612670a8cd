// SPDX-License-Identifier: Apache-2.0
#include "mss/topk_engines.hpp"

#include <algorithm>

namespace mss {

namespace {

std::uint32_t exact_log2(std::size_t k) {
    if (k == 0 || (k & (k - 1)) != 0)
        throw ParameterError("k must be a power of two");
    std::uint32_t log = 0;
    while (k > 1) {
        k >>= 1;
        ++log;
    }
    return log;
}

// Descending score, ties by id ascending: the sorter's total order.
bool sorter_before(const ScoredEntry& a, const ScoredEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

} // namespace

bool BoundedPriorityQueue::better(const ScoredEntry& a, const ScoredEntry& b) const {
    if (a.score != b.score)
        return polarity_ == QueuePolarity::MaxFirst ? a.score > b.score : a.score < b.score;
    return a.id < b.id;
}

void BoundedPriorityQueue::enqueue(const ScoredEntry& entry) {
    auto pos = std::upper_bound(slots_.begin(), slots_.end(), entry,
                                [this](const ScoredEntry& a, const ScoredEntry& b) {
                                    return better(a, b);
                                });
    slots_.insert(pos, entry);
    if (slots_.size() > capacity_) slots_.pop_back();
}

ScoredEntry BoundedPriorityQueue::dequeue() {
    if (slots_.empty()) throw UnderflowError("dequeue from an empty priority queue");
    ScoredEntry best = slots_.front();
    slots_.erase(slots_.begin());
    return best;
}

MergeTopK::MergeTopK(std::size_t k) : k_(k), stages_(exact_log2(k)) {
    pending_.reserve(k);
    best_.reserve(2 * k);
}

void MergeTopK::feed(const ScoredEntry& entry) {
    ++consumed_;
    pending_.push_back(entry);
    if (pending_.size() == k_) flush_run(std::move(pending_));
}

// Sort the run through the staged pairwise merges, then fold it into the
// running top-k via the final merge kernel.
void MergeTopK::flush_run(std::vector<ScoredEntry>&& run) {
    std::vector<std::vector<ScoredEntry>> runs;
    runs.reserve(run.size());
    for (const ScoredEntry& e : run) runs.push_back({e});
    for (std::uint32_t stage = 0; stage < stages_ && runs.size() > 1; ++stage) {
        std::vector<std::vector<ScoredEntry>> next;
        next.reserve((runs.size() + 1) / 2);
        for (std::size_t i = 0; i < runs.size(); i += 2) {
            if (i + 1 == runs.size()) {
                next.push_back(std::move(runs[i]));
                continue;
            }
            std::vector<ScoredEntry> merged;
            merged.reserve(runs[i].size() + runs[i + 1].size());
            std::merge(runs[i].begin(), runs[i].end(), runs[i + 1].begin(), runs[i + 1].end(),
                       std::back_inserter(merged), sorter_before);
            next.push_back(std::move(merged));
        }
        runs = std::move(next);
    }
    const std::vector<ScoredEntry>& sorted = runs.empty() ? run : runs.front();

    std::vector<ScoredEntry> merged;
    merged.reserve(best_.size() + sorted.size());
    std::merge(best_.begin(), best_.end(), sorted.begin(), sorted.end(),
               std::back_inserter(merged), sorter_before);
    if (merged.size() > k_) merged.resize(k_);
    best_ = std::move(merged);
    pending_.clear();
}

MergeTopKResult MergeTopK::finish() {
    if (!pending_.empty()) flush_run(std::move(pending_));
    MergeTopKResult result;
    result.entries = std::move(best_);
    result.simulated_cycles = consumed_ + stages_;
    best_.clear();
    pending_.clear();
    consumed_ = 0;
    return result;
}

MergeTopKResult merge_topk_stream(std::span<const ScoredEntry> input, std::size_t k) {
    MergeTopK sorter(k);
    for (const ScoredEntry& e : input) sorter.feed(e);
    return sorter.finish();
}

MergeCost merge_cost(std::size_t k) {
    std::uint32_t log = exact_log2(k);
    return MergeCost{log + 1ull, log + 2ull * k};
}

std::uint64_t pq_cost(std::size_t k) {
    if (k == 0) throw ParameterError("k must be at least 1");
    return k;
}

} // namespace mss
