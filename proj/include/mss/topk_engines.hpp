// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mss/error.hpp"

namespace mss {

/// Queue/sorter entry: 12-bit fixed-point score plus an id.
struct ScoredEntry {
    std::uint16_t score = 0; ///< in [0, 4095]
    std::uint64_t id = 0;

    bool operator==(const ScoredEntry&) const = default;
};

enum class QueuePolarity : std::uint8_t {
    MaxFirst, ///< best = highest score
    MinFirst, ///< best = lowest score
};

/// Software analog of the register-array priority queue: a sorted bounded
/// array with best-first dequeue. Enqueue at capacity evicts the worst entry.
/// Equal scores order by id ascending (smaller id is better).
class BoundedPriorityQueue {
public:
    BoundedPriorityQueue(std::size_t capacity, QueuePolarity polarity)
        : capacity_(capacity), polarity_(polarity) {
        if (capacity == 0) throw ParameterError("queue capacity must be at least 1");
        slots_.reserve(capacity);
    }

    void enqueue(const ScoredEntry& entry);
    ScoredEntry dequeue();

    std::size_t size() const { return slots_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return slots_.empty(); }
    QueuePolarity polarity() const { return polarity_; }

    /// Best-first view of the current contents.
    std::span<const ScoredEntry> slots() const { return slots_; }

private:
    bool better(const ScoredEntry& a, const ScoredEntry& b) const;

    std::size_t capacity_;
    QueuePolarity polarity_;
    std::vector<ScoredEntry> slots_; // kept sorted best-first
};

/// Streaming merge-sort top-k result: best k entries in descending score
/// order plus the pipeline cycle count of the simulated sorter.
struct MergeTopKResult {
    std::vector<ScoredEntry> entries;
    std::uint64_t simulated_cycles = 0;
};

/// Streaming top-k built from the merge-sort network: log2(k) run-forming
/// stages followed by a top-k merge of consecutive sorted runs. One entry is
/// consumed per cycle with a log2(k) pipeline fill, so a stream of N entries
/// costs N + log2(k) cycles.
class MergeTopK {
public:
    explicit MergeTopK(std::size_t k);

    void feed(const ScoredEntry& entry);
    MergeTopKResult finish();

    std::size_t k() const { return k_; }

private:
    void flush_run(std::vector<ScoredEntry>&& run);

    std::size_t k_;
    std::uint32_t stages_;
    std::uint64_t consumed_ = 0;
    std::vector<ScoredEntry> pending_;        // current partial input run
    std::vector<ScoredEntry> best_;           // merged best-k so far, descending
};

/// One-shot convenience over MergeTopK.
MergeTopKResult merge_topk_stream(std::span<const ScoredEntry> input, std::size_t k);

struct MergeCost {
    std::uint64_t comparators = 0;
    std::uint64_t fifo_capacity = 0;
};

/// Merge sorter resources: log2(k) + 1 comparators, log2(k) + 2k FIFO slots.
MergeCost merge_cost(std::size_t k);

/// Register-array priority queue comparators: one per slot.
std::uint64_t pq_cost(std::size_t k);

} // namespace mss
