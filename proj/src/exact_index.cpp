// SPDX-License-Identifier: Apache-2.0
#include "mss/exact_index.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mss {

namespace {

// Outward nudge for the band boundaries. The cutoff filter is applied to
// exact scores afterwards, so a band that is one count too wide never changes
// the result, while a band one count too narrow would break exactness.
constexpr double kBandEps = 1e-9;

void validate_cutoff(double cutoff) {
    if (!(cutoff > 0.0) || cutoff > 1.0)
        throw ParameterError("similarity cutoff must be in (0, 1]");
}

struct ScanFilter {
    std::optional<double> cutoff;

    bool keep(const TanimotoScore& score) const {
        return !cutoff || score.exact() >= *cutoff;
    }
};

// Top-k over entries[first, last): the shared kernel behind brute-force,
// banded, and stage-1 scans. The parallel path splits the range into chunks,
// selects per-chunk top-k, and merges; the hit order is total, so the merged
// result is identical to the serial one.
TopKResult scan_topk(std::span<const Fingerprint> entries, std::uint64_t first,
                     std::uint64_t last, const Fingerprint& query, std::size_t k,
                     const ScanFilter& filter, Exec exec) {
    if (k == 0) throw ParameterError("k must be at least 1");
    if (first >= last) return {};

#ifdef _OPENMP
    if (exec == Exec::Parallel && last - first > 2048) {
        int threads = omp_get_max_threads();
        std::vector<TopKResult> partial(static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
        {
            int t = omp_get_thread_num();
            std::uint64_t n = last - first;
            std::uint64_t chunk_lo = first + n * t / threads;
            std::uint64_t chunk_hi = first + n * (t + 1) / threads;
            TopKAccumulator acc(k);
            for (std::uint64_t i = chunk_lo; i < chunk_hi; ++i) {
                TanimotoScore score = tanimoto(query, entries[i]);
                if (filter.keep(score)) acc.push(Hit{score, entries[i].id()});
            }
            partial[static_cast<std::size_t>(t)] = acc.take();
        }
        TopKAccumulator merged(k);
        for (const TopKResult& part : partial)
            for (const Hit& hit : part.hits) merged.push(hit);
        return merged.take();
    }
#else
    (void)exec;
#endif

    TopKAccumulator acc(k);
    for (std::uint64_t i = first; i < last; ++i) {
        TanimotoScore score = tanimoto(query, entries[i]);
        if (filter.keep(score)) acc.push(Hit{score, entries[i].id()});
    }
    return acc.take();
}

} // namespace

PruneRange prune_range(std::uint32_t query_count, double cutoff) {
    validate_cutoff(cutoff);
    double lo = std::ceil(query_count * cutoff - kBandEps);
    double hi = std::floor(query_count / cutoff + kBandEps);
    PruneRange range;
    range.lo = lo <= 0.0 ? 0 : static_cast<std::uint32_t>(lo);
    double hi_cap = 4294967295.0;
    range.hi = hi >= hi_cap ? 4294967295u : static_cast<std::uint32_t>(hi);
    return range;
}

BitBoundIndex BitBoundIndex::build(std::span<const Fingerprint> db,
                                   std::optional<FoldSpec> spec) {
    BitBoundIndex index;
    index.fold_spec_ = spec;

    if (!db.empty()) {
        index.length_bits_ = db.front().length();
        for (const Fingerprint& fp : db)
            if (fp.length() != index.length_bits_)
                throw DimensionError("database fingerprints must share one length");
    }
    if (spec) {
        if (spec->m == 0 || (index.length_bits_ != 0 && index.length_bits_ % spec->m != 0))
            throw ParameterError("folding level must divide the fingerprint length");
        if ((spec->m & (spec->m - 1)) != 0)
            throw ParameterError("folding level must be a power of two");
    }

    index.entries_.assign(db.begin(), db.end());
    std::sort(index.entries_.begin(), index.entries_.end(),
              [](const Fingerprint& a, const Fingerprint& b) {
                  if (a.bit_count() != b.bit_count()) return a.bit_count() < b.bit_count();
                  return a.id() < b.id();
              });

    index.position_by_id_.reserve(index.entries_.size());
    for (std::uint64_t i = 0; i < index.entries_.size(); ++i) {
        auto [it, inserted] = index.position_by_id_.emplace(index.entries_[i].id(), i);
        if (!inserted)
            throw BuildError("duplicate fingerprint id " +
                             std::to_string(index.entries_[i].id()));
    }

    std::uint32_t length = index.length_bits_;
    index.bucket_offsets_.assign(length + 2, 0);
    std::vector<std::uint64_t> histogram(length + 1, 0);
    for (const Fingerprint& fp : index.entries_) ++histogram[fp.bit_count()];
    for (std::uint32_t c = 0; c <= length; ++c)
        index.bucket_offsets_[c + 1] = index.bucket_offsets_[c] + histogram[c];

    if (spec) {
        index.folded_entries_.reserve(index.entries_.size());
        for (const Fingerprint& fp : index.entries_)
            index.folded_entries_.push_back(fold(fp, *spec));
    }
    return index;
}

std::pair<std::uint64_t, std::uint64_t> BitBoundIndex::band(const PruneRange& range) const {
    if (entries_.empty()) return {0, 0};
    std::uint32_t lo = std::min(range.lo, length_bits_ + 1);
    std::uint32_t hi = std::min(range.hi, length_bits_);
    if (lo > hi) return {0, 0};
    return {bucket_offsets_[lo], bucket_offsets_[hi + 1]};
}

std::uint64_t BitBoundIndex::band_size(const PruneRange& range) const {
    auto [first, last] = band(range);
    return last - first;
}

const Fingerprint& BitBoundIndex::entry_by_id(std::uint64_t id) const {
    auto it = position_by_id_.find(id);
    if (it == position_by_id_.end())
        throw ParameterError("unknown fingerprint id " + std::to_string(id));
    return entries_[it->second];
}

std::uint64_t two_stage_k_r1(std::uint64_t k, std::uint32_t m) {
    if (m == 0 || (m & (m - 1)) != 0)
        throw ParameterError("folding level must be a power of two");
    std::uint32_t log2_2m = 1;
    std::uint32_t v = m;
    while (v > 1) {
        v >>= 1;
        ++log2_2m;
    }
    return k * static_cast<std::uint64_t>(m) * log2_2m;
}

TopKResult search_bruteforce(std::span<const Fingerprint> db, const Fingerprint& query,
                             std::size_t k, Exec exec) {
    return scan_topk(db, 0, db.size(), query, k, ScanFilter{}, exec);
}

TopKResult search_bruteforce(const BitBoundIndex& index, const Fingerprint& query,
                             std::size_t k, Exec exec) {
    return scan_topk(index.entries(), 0, index.size(), query, k, ScanFilter{}, exec);
}

TopKResult search_bitbound(const BitBoundIndex& index, const Fingerprint& query,
                           std::size_t k, double cutoff, Exec exec) {
    validate_cutoff(cutoff);
    if (index.empty()) return {};
    if (query.length() != index.length_bits())
        throw DimensionError("query length does not match index");
    auto [first, last] = index.band(prune_range(query.bit_count(), cutoff));
    return scan_topk(index.entries(), first, last, query, k, ScanFilter{cutoff}, exec);
}

namespace {

TopKResult two_stage_impl(const BitBoundIndex& index, const Fingerprint& query,
                          std::size_t k, std::optional<double> cutoff, Exec exec) {
    if (!index.has_fold())
        throw StateError("two-stage search requires an index built with a FoldSpec");
    if (k == 0) throw ParameterError("k must be at least 1");
    if (index.empty()) return {};
    if (query.length() != index.length_bits())
        throw DimensionError("query length does not match index");

    const FoldSpec& spec = *index.fold_spec();
    std::uint64_t first = 0;
    std::uint64_t last = index.size();
    if (cutoff) {
        // The bound is stated on original fingerprints, so the band uses the
        // unfolded bit counts even though stage 1 scores folded vectors.
        auto range = prune_range(query.bit_count(), *cutoff);
        std::tie(first, last) = index.band(range);
    }

    Fingerprint folded_query = fold(query, spec);
    std::uint64_t k_r1 = two_stage_k_r1(k, spec.m);
    TopKResult stage1 = scan_topk(index.folded_entries(), first, last, folded_query,
                                  static_cast<std::size_t>(k_r1), ScanFilter{}, exec);

    // Stage 2: rescore the candidates on the original fingerprints. Folded
    // scores are inflated by the lossy OR, so the cutoff applies to exact
    // scores only.
    TopKAccumulator acc(k);
    for (const Hit& candidate : stage1.hits) {
        TanimotoScore exact = tanimoto(query, index.entry_by_id(candidate.id));
        if (!cutoff || exact.exact() >= *cutoff) acc.push(Hit{exact, candidate.id});
    }
    return acc.take();
}

} // namespace

TopKResult search_two_stage(const BitBoundIndex& index, const Fingerprint& query,
                            std::size_t k, double cutoff, Exec exec) {
    validate_cutoff(cutoff);
    return two_stage_impl(index, query, k, cutoff, exec);
}

TopKResult search_two_stage_topk(const BitBoundIndex& index, const Fingerprint& query,
                                 std::size_t k, Exec exec) {
    return two_stage_impl(index, query, k, std::nullopt, exec);
}

} // namespace mss
