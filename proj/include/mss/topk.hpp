// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mss/fingerprint.hpp"

namespace mss {

/// Single search hit: exact score plus the database id.
struct Hit {
    TanimotoScore score;
    std::uint64_t id = 0;
};

/// Global result order: score descending, ties by id ascending.
inline bool better_hit(const Hit& a, const Hit& b) {
    int c = compare_scores(a.score, b.score);
    if (c != 0) return c > 0;
    return a.id < b.id;
}

/// Ordered top-k hits under the global tie-break order.
struct TopKResult {
    std::vector<Hit> hits;

    bool operator==(const TopKResult& other) const {
        if (hits.size() != other.hits.size()) return false;
        for (std::size_t i = 0; i < hits.size(); ++i) {
            if (hits[i].id != other.hits[i].id) return false;
            if (compare_scores(hits[i].score, other.hits[i].score) != 0) return false;
        }
        return true;
    }
};

/// Bounded best-k selector. Keeps the k best hits seen so far; the result is
/// independent of insertion order because the hit order is total.
class TopKAccumulator {
public:
    explicit TopKAccumulator(std::size_t k) : k_(k) {}

    void push(const Hit& hit) {
        if (heap_.size() < k_) {
            heap_.push_back(hit);
            std::push_heap(heap_.begin(), heap_.end(), better_hit);
        } else if (k_ > 0 && better_hit(hit, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), better_hit);
            heap_.back() = hit;
            std::push_heap(heap_.begin(), heap_.end(), better_hit);
        }
    }

    /// Worst kept hit; only meaningful when full() is true.
    const Hit& worst() const { return heap_.front(); }
    bool full() const { return heap_.size() >= k_; }
    std::size_t size() const { return heap_.size(); }

    /// Drain into a best-first sorted result.
    TopKResult take() {
        TopKResult result;
        result.hits = std::move(heap_);
        heap_.clear();
        std::sort(result.hits.begin(), result.hits.end(), better_hit);
        return result;
    }

private:
    std::size_t k_;
    std::vector<Hit> heap_; // max-heap on "worse than", so front() is the worst kept
};

} // namespace mss
