// SPDX-License-Identifier: Apache-2.0
#include "mss/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <deque>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "mss/bench.hpp"
#include "mss/io.hpp"
#include "mss/reports.hpp"
#include "mss/rng.hpp"
#include "mss/topk_engines.hpp"

namespace mss::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

std::string format(const char* fmt, ...) {
    char buffer[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buffer, sizeof(buffer), fmt, args);
    va_end(args);
    return buffer;
}

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& message) {
        if (!condition && ok) {
            ok = false;
            detail = message;
        }
    }
    void note(const std::string& message) {
        if (!detail.empty()) detail += "; ";
        detail += message;
    }
};

// The shared evaluation dataset: clustered near neighbors with a smooth
// position profile and Gaussian bit counts, standing in for a real
// fingerprint database.
std::vector<Fingerprint> evaluation_dataset(std::size_t n, std::uint64_t seed) {
    ClusteredSynthSpec spec;
    spec.n = n;
    spec.seed = seed;
    return synthesize_clustered(spec);
}

TopKResult filtered(const TopKResult& full, double cutoff) {
    TopKResult out;
    for (const Hit& hit : full.hits)
        if (hit.score.exact() >= cutoff) out.hits.push_back(hit);
    return out;
}

double mean_recall(const std::vector<TopKResult>& results,
                   const std::vector<TopKResult>& oracles, std::size_t k) {
    double total = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i)
        total += recall_at_k(results[i], oracles[i], k);
    return total / static_cast<double>(results.size());
}

bool layer0_connected(const HnswGraph& graph) {
    if (graph.empty()) return true;
    std::vector<char> seen(graph.size(), 0);
    std::deque<std::uint32_t> frontier{graph.entry_slot()};
    seen[graph.entry_slot()] = 1;
    std::size_t visited = 1;
    while (!frontier.empty()) {
        std::uint32_t node = frontier.front();
        frontier.pop_front();
        for (std::uint32_t nb : graph.links()[node][0]) {
            if (!seen[nb]) {
                seen[nb] = 1;
                ++visited;
                frontier.push_back(nb);
            }
        }
    }
    return visited == graph.size();
}

// ---- criterion 1: bitbound exactness ------------------------------------

Check criterion_exactness() {
    Check check;
    const double cutoffs[] = {0.3, 0.5, 0.8, 0.95};
    const std::size_t db_sizes[] = {1, 120, 1500, 10000};

    std::vector<std::vector<Fingerprint>> dbs;
    std::vector<BitBoundIndex> indexes;
    for (std::size_t i = 0; i < std::size(db_sizes); ++i) {
        SynthSpec spec;
        spec.n = db_sizes[i];
        spec.seed = 100 + i;
        dbs.push_back(synthesize(spec));
        indexes.push_back(BitBoundIndex::build(dbs.back()));
    }

    std::mt19937_64 engine(2026);
    int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        std::size_t which = rng::uniform_below(engine, dbs.size());
        const auto& db = dbs[which];
        Fingerprint query;
        if (t % 2 == 0) {
            query = db[rng::uniform_below(engine, db.size())];
        } else {
            SynthSpec qspec;
            qspec.n = 1;
            qspec.seed = 5000 + t;
            query = synthesize(qspec).front();
        }
        std::size_t k = 1 + rng::uniform_below(engine, 64);
        double cutoff = cutoffs[rng::uniform_below(engine, 4)];

        TopKResult brute = search_bruteforce(db, query, k);
        TopKResult expected = filtered(brute, cutoff);
        Exec exec = t % 3 == 0 ? Exec::Parallel : Exec::Serial;
        TopKResult actual = search_bitbound(indexes[which], query, k, cutoff, exec);
        if (!(actual == expected)) {
            check.require(false, format("trial %d: bitbound differs from filtered brute force "
                                        "(db=%zu k=%zu Sc=%.2f)",
                                        t, db.size(), k, cutoff));
            return check;
        }
    }
    check.note(format("%d randomized trials identical", trials));
    return check;
}

// ---- criterion 2: two-stage folding recall -------------------------------

Check criterion_two_stage_recall() {
    Check check;
    const std::size_t n = 10000, k = 20, nq = 200;
    std::vector<Fingerprint> db = evaluation_dataset(n, 42);
    std::vector<Fingerprint> queries = sample_queries(db, nq, 1);

    std::vector<TopKResult> oracles(nq);
    for (std::size_t i = 0; i < nq; ++i)
        oracles[i] = search_bruteforce(db, queries[i], k, Exec::Parallel);

    auto recall_for = [&](FoldScheme scheme, std::uint32_t m) {
        BitBoundIndex index = BitBoundIndex::build(db, FoldSpec{scheme, m});
        std::vector<TopKResult> results(nq);
        for (std::size_t i = 0; i < nq; ++i)
            results[i] = search_two_stage_topk(index, queries[i], k, Exec::Parallel);
        return mean_recall(results, oracles, k);
    };

    const std::uint32_t levels[] = {2, 4, 8, 16};
    const double sectioned_bands[] = {0.95, 0.95, 0.90, 0.0};
    for (std::size_t i = 0; i < std::size(levels); ++i) {
        std::uint32_t m = levels[i];
        double sectioned = recall_for(FoldScheme::Sectioned, m);
        double adjacent = recall_for(FoldScheme::Adjacent, m);
        check.note(format("m=%u S=%.3f A=%.3f", m, sectioned, adjacent));
        if (sectioned_bands[i] > 0.0)
            check.require(sectioned >= sectioned_bands[i],
                          format("sectioned recall %.3f below %.2f at m=%u", sectioned,
                                 sectioned_bands[i], m));
        check.require(sectioned >= adjacent,
                      format("sectioned %.4f < adjacent %.4f at m=%u", sectioned, adjacent, m));
        if (!check.ok) return check;
    }
    return check;
}

// ---- criterion 3: k_r1 table ---------------------------------------------

Check criterion_k_r1() {
    Check check;
    const std::uint32_t ms[] = {1, 2, 4, 8, 16, 32};
    const std::uint64_t expected[] = {1, 4, 12, 32, 80, 192};
    for (std::size_t i = 0; i < std::size(ms); ++i) {
        std::uint64_t ratio = two_stage_k_r1(1, ms[i]);
        check.require(ratio == expected[i], format("k_r1/k at m=%u is %llu, expected %llu",
                                                   ms[i], (unsigned long long)ratio,
                                                   (unsigned long long)expected[i]));
    }
    check.note("k_r1/k = {1,4,12,32,80,192} at m = {1,2,4,8,16,32}");
    return check;
}

// ---- criterion 4: HNSW recall ---------------------------------------------

Check criterion_hnsw_recall() {
    Check check;
    const std::size_t n = 10000, k = 20, nq = 200;
    std::vector<Fingerprint> db = evaluation_dataset(n, 42);
    std::vector<Fingerprint> queries = sample_queries(db, nq, 1);

    HnswParams params;
    params.M = 20;
    params.ef_construction = 200;
    params.seed = 7;
    HnswGraph graph(params);
    for (const Fingerprint& fp : db) graph.insert(fp);
    graph.freeze();

    std::vector<TopKResult> oracles(nq);
    for (std::size_t i = 0; i < nq; ++i)
        oracles[i] = search_bruteforce(db, queries[i], k, Exec::Parallel);

    std::vector<TopKResult> results(nq);
    for (std::size_t i = 0; i < nq; ++i) results[i] = graph.search(queries[i], k, 200);
    double recall = mean_recall(results, oracles, k);
    check.note(format("recall@20 = %.3f at M=20 ef=200", recall));
    check.require(recall >= 0.90, format("recall %.3f below 0.90", recall));

    bool connected = layer0_connected(graph);
    check.require(connected, "base layer is not connected");
    if (connected) {
        // Exhaustive beam: ef = dataset size must recover brute force exactly.
        const std::size_t exhaustive_queries = 25;
        for (std::size_t i = 0; i < exhaustive_queries; ++i) {
            TopKResult full = graph.search(queries[i], k, n);
            if (recall_at_k(full, oracles[i], k) != 1.0) {
                check.require(false,
                              format("exhaustive beam missed an oracle hit on query %zu", i));
                break;
            }
        }
        check.note(format("exhaustive beam exact on %zu queries", exhaustive_queries));
    }
    return check;
}

// ---- criterion 5: top-k engine oracle equivalence -------------------------

Check criterion_engines() {
    Check check;
    std::mt19937_64 engine(99);

    // Streaming merge sorter vs full sort.
    int stream_trials = 1000;
    for (int t = 0; t < stream_trials; ++t) {
        std::size_t k = 1ull << rng::uniform_below(engine, 11); // 1..1024
        std::size_t n = rng::uniform_below(engine, 2000);
        std::vector<ScoredEntry> input(n);
        for (auto& e : input) {
            e.score = static_cast<std::uint16_t>(rng::uniform_below(engine, 4096));
            e.id = rng::uniform_below(engine, 1 + n / 2); // allow duplicate ids
        }
        MergeTopKResult got = merge_topk_stream(input, k);

        std::vector<ScoredEntry> expected = input;
        std::sort(expected.begin(), expected.end(), [](const auto& a, const auto& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        if (expected.size() > k) expected.resize(k);

        std::uint64_t log2k = 0;
        for (std::size_t v = k; v > 1; v >>= 1) ++log2k;
        if (got.entries != expected || got.simulated_cycles != n + log2k) {
            check.require(false, format("merge sorter diverged at trial %d (N=%zu k=%zu)", t,
                                        n, k));
            return check;
        }
    }

    // Bounded priority queue vs a reference heap with eviction.
    int trace_trials = 1000;
    for (int t = 0; t < trace_trials; ++t) {
        std::size_t capacity = 1 + rng::uniform_below(engine, 64);
        bool max_first = (t % 2) == 0;
        BoundedPriorityQueue queue(capacity,
                                   max_first ? QueuePolarity::MaxFirst : QueuePolarity::MinFirst);

        auto better = [max_first](const ScoredEntry& a, const ScoredEntry& b) {
            if (a.score != b.score) return max_first ? a.score > b.score : a.score < b.score;
            return a.id < b.id;
        };
        std::vector<ScoredEntry> reference; // kept sorted best-first

        std::size_t ops = 64;
        for (std::size_t op = 0; op < ops; ++op) {
            if (reference.empty() || rng::uniform_below(engine, 3) != 0) {
                ScoredEntry e{static_cast<std::uint16_t>(rng::uniform_below(engine, 4096)),
                              rng::uniform_below(engine, 100)};
                queue.enqueue(e);
                reference.insert(
                    std::upper_bound(reference.begin(), reference.end(), e, better), e);
                if (reference.size() > capacity) reference.pop_back();
            } else {
                ScoredEntry got = queue.dequeue();
                ScoredEntry expected = reference.front();
                reference.erase(reference.begin());
                if (got != expected) {
                    check.require(false, format("priority queue diverged at trial %d", t));
                    return check;
                }
            }
        }
        if (!std::equal(reference.begin(), reference.end(), queue.slots().begin(),
                        queue.slots().end())) {
            check.require(false, format("priority queue state diverged at trial %d", t));
            return check;
        }
    }
    check.note(format("%d merge streams and %d queue traces match the oracles", stream_trials,
                      trace_trials));
    return check;
}

// ---- criterion 6: hardware cost formulas ----------------------------------

Check criterion_cost() {
    Check check;
    MergeCost c16 = merge_cost(16);
    check.require(c16.comparators == 5 && c16.fifo_capacity == 36,
                  "merge_cost(16) != (5, 36)");
    MergeCost c1024 = merge_cost(1024);
    check.require(c1024.comparators == 11 && c1024.fifo_capacity == 2058,
                  "merge_cost(1024) != (11, 2058)");

    PlatformSpec spec;
    double bw = kernel_bandwidth_GBs(spec, 1);
    check.require(bw == 57.6, format("kernel bandwidth %.6f != 57.6", bw));
    KernelFit fit = max_kernels(spec, 1);
    check.require(fit.feasible && fit.kernels == 7,
                  format("max kernels %u != 7", fit.kernels));
    double qps = throughput_qps(spec, 1924000, 1, 0.0);
    check.require(std::abs(qps - 1638.0) / 1638.0 <= 0.01,
                  format("qps %.1f not within 1%% of 1638", qps));
    check.note(format("57.6 GB/s, 7 kernels, %.1f QPS", qps));
    return check;
}

// ---- criterion 7: analytic model -------------------------------------------

// Test-side quadrature: composite trapezoid with step halving, independent of
// the adaptive implementation.
double oracle_trapezoid(const std::function<double(double)>& f, double lo, double hi) {
    double previous = 0.0;
    for (std::size_t steps = 1024;; steps *= 2) {
        double h = (hi - lo) / static_cast<double>(steps);
        double sum = 0.5 * (f(lo) + f(hi));
        for (std::size_t i = 1; i < steps; ++i) sum += f(lo + h * static_cast<double>(i));
        double total = sum * h;
        if (steps > 1024 && std::abs(total - previous) < 1e-10) return total;
        previous = total;
        if (steps > (1u << 24)) return total;
    }
}

Check criterion_analytic() {
    Check check;
    GaussianFit fit{47.5, 12.2};

    auto gauss = [&](double x) { return fit.density(x); };

    // R against direct quadrature of the density over the band.
    for (double count : {20.0, 47.0, 70.0}) {
        for (double cutoff : {0.3, 0.5, 0.8, 0.95}) {
            double band_lo = count * cutoff;
            double band_hi = count / cutoff;
            double oracle = 1.0 - oracle_trapezoid(gauss, band_lo, band_hi);
            if (oracle < 0.0) oracle = 0.0;
            double got = pruned_fraction(fit, count, cutoff);
            if (std::abs(got - oracle) >= 1e-6) {
                check.require(false, format("R(%.0f, %.2f) off by %.2e", count, cutoff,
                                            std::abs(got - oracle)));
                return check;
            }
        }
    }

    // S against quadrature of the retained mass.
    for (double cutoff : {0.3, 0.5, 0.8, 0.95}) {
        auto retained_integrand = [&](double x) {
            return (1.0 - pruned_fraction(fit, x, cutoff)) * fit.density(x);
        };
        double retained =
            oracle_trapezoid(retained_integrand, fit.mu - 8 * fit.sigma, fit.mu + 8 * fit.sigma);
        double oracle_speedup = 1.0 / retained;
        double got = expected_speedup(fit, cutoff);
        if (std::abs(got - oracle_speedup) >= 1e-6 * std::max(1.0, oracle_speedup)) {
            check.require(false, format("S(%.2f) off by %.2e", cutoff,
                                        std::abs(got - oracle_speedup)));
            return check;
        }
    }

    double speedup95 = expected_speedup(fit, 0.95);
    check.require(speedup95 > 8.0, format("speedup at Sc=0.95 is %.2f, expected > 8", speedup95));
    check.note(format("speedup(0.95) = %.2f", speedup95));

    double previous = 0.0;
    for (double cutoff : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95}) {
        double s = expected_speedup(fit, cutoff);
        check.require(s >= previous, format("speedup not monotone at Sc=%.2f", cutoff));
        previous = s;
    }

    // Empirical pruned fraction on a plain synthetic database.
    SynthSpec spec;
    spec.n = 100000;
    spec.seed = 11;
    std::vector<Fingerprint> db = synthesize(spec);
    BitBoundIndex index = BitBoundIndex::build(db);
    std::vector<Fingerprint> queries = sample_queries(db, 100, 3);
    for (double cutoff : {0.3, 0.8}) {
        double empirical = empirical_pruned_fraction(index, queries, cutoff);
        double model = 0.0;
        for (const Fingerprint& q : queries)
            model += pruned_fraction(fit, q.bit_count(), cutoff);
        model /= static_cast<double>(queries.size());
        check.require(std::abs(empirical - model) <= 0.05,
                      format("empirical %.3f vs model %.3f at Sc=%.1f", empirical, model,
                             cutoff));
        check.note(format("Sc=%.1f empirical=%.3f model=%.3f", cutoff, empirical, model));
    }
    return check;
}

// ---- criterion 8: determinism ----------------------------------------------

Check criterion_determinism() {
    Check check;

    auto synth_text = [] {
        SynthSpec spec;
        spec.n = 2000;
        spec.seed = 5;
        std::ostringstream out;
        write_fingerprints(out, synthesize(spec));
        return out.str();
    };
    check.require(synth_text() == synth_text(), "synthesized datasets differ between runs");

    auto bitbound_bytes = [] {
        SynthSpec spec;
        spec.n = 1500;
        spec.seed = 6;
        BitBoundIndex index =
            BitBoundIndex::build(synthesize(spec), FoldSpec{FoldScheme::Sectioned, 4});
        std::ostringstream out;
        save_bitbound(out, index);
        return out.str();
    };
    check.require(bitbound_bytes() == bitbound_bytes(), "bitbound index bytes differ");

    auto hnsw_bytes = [] {
        std::vector<Fingerprint> db = evaluation_dataset(1500, 8);
        HnswParams params;
        params.M = 8;
        params.ef_construction = 32;
        params.seed = 9;
        HnswGraph graph(params);
        for (const Fingerprint& fp : db) graph.insert(fp);
        graph.freeze();
        std::ostringstream out;
        save_hnsw(out, graph);
        return out.str();
    };
    check.require(hnsw_bytes() == hnsw_bytes(), "hnsw graph bytes differ");

    auto bench_csv = [] {
        BenchConfig config;
        ClusteredSynthSpec data;
        data.n = 1200;
        data.seed = 10;
        config.clustered = data;
        config.algo = Algo::TwoStage;
        config.k = 10;
        config.query_count = 30;
        config.query_seed = 2;
        config.fold_ms = {1, 2};
        config.deterministic_timing = true;
        return records_to_csv(run_bench(config));
    };
    check.require(bench_csv() == bench_csv(), "bench CSVs differ");

    auto model_report = [] {
        GaussianFit fit{47.5, 12.2};
        const double cutoffs[] = {0.3, 0.5, 0.8, 0.95};
        const std::uint32_t folds[] = {1, 2, 4};
        return model_report_csv(fit, cutoffs) +
               cost_report_json(PlatformSpec{}, 1924000, folds, 0.0);
    };
    check.require(model_report() == model_report(), "model reports differ");

    check.note("synth, indexes, bench CSV, and model reports byte-identical across runs");
    return check;
}

} // namespace

std::vector<CriterionResult> run_all(std::ostream& out) {
    struct Entry {
        int number;
        const char* name;
        Check (*run)();
    };
    const Entry entries[] = {
        {1, "bitbound exactness vs filtered brute force", criterion_exactness},
        {2, "two-stage folding recall bands and scheme order", criterion_two_stage_recall},
        {3, "k_r1 formula table", criterion_k_r1},
        {4, "hnsw recall and exhaustive beam", criterion_hnsw_recall},
        {5, "top-k engine oracle equivalence and cycle model", criterion_engines},
        {6, "hardware cost formulas", criterion_cost},
        {7, "analytic model vs quadrature oracle", criterion_analytic},
        {8, "seeded determinism of artifacts", criterion_determinism},
    };

    std::vector<CriterionResult> results;
    auto suite_start = Clock::now();
    for (const Entry& entry : entries) {
        auto start = Clock::now();
        CriterionResult result;
        result.number = entry.number;
        result.name = entry.name;
        try {
            Check check = entry.run();
            result.passed = check.ok;
            result.detail = check.detail;
        } catch (const std::exception& e) {
            result.passed = false;
            result.detail = std::string("exception: ") + e.what();
        }
        result.seconds =
            std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start)
                .count();
        out << (result.passed ? "[PASS] " : "[FAIL] ") << result.number << " " << result.name
            << " — " << result.detail << " (" << format("%.1f", result.seconds) << "s)\n";
        out.flush();
        results.push_back(std::move(result));
    }

    double total =
        std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - suite_start)
            .count();
    CriterionResult budget;
    budget.number = 9;
    budget.name = "suite runs end-to-end within 20 minutes";
    budget.passed = total < 1200.0;
    budget.detail = format("total %.1fs", total);
    budget.seconds = 0.0;
    out << (budget.passed ? "[PASS] " : "[FAIL] ") << budget.number << " " << budget.name
        << " — " << budget.detail << "\n";
    results.push_back(budget);
    return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
    for (const CriterionResult& r : results)
        if (!r.passed) return false;
    return true;
}

} // namespace mss::acceptance
