// SPDX-License-Identifier: Apache-2.0
//
// Compares the serial reference scan kernels against the OpenMP-parallel
// ones on the same workloads, verifying that both produce identical results
// before reporting throughput.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "mss/exact_index.hpp"
#include "mss/synth.hpp"

using namespace mss;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start)
        .count();
}

struct KernelCase {
    std::string name;
    TopKResult (*run)(const BitBoundIndex&, const Fingerprint&, std::size_t, Exec);
};

TopKResult run_brute(const BitBoundIndex& index, const Fingerprint& q, std::size_t k,
                     Exec exec) {
    return search_bruteforce(index, q, k, exec);
}

TopKResult run_bitbound(const BitBoundIndex& index, const Fingerprint& q, std::size_t k,
                        Exec exec) {
    return search_bitbound(index, q, k, 0.6, exec);
}

TopKResult run_two_stage(const BitBoundIndex& index, const Fingerprint& q, std::size_t k,
                         Exec exec) {
    return search_two_stage_topk(index, q, k, exec);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP scan kernel comparison"};
    std::uint64_t n = 200000;
    std::size_t query_count = 50;
    std::size_t k = 20;
    std::uint64_t seed = 1;
    int repeats = 3;
    app.add_option("--n", n, "database size");
    app.add_option("--queries", query_count, "queries per kernel");
    app.add_option("--k", k, "hits per query");
    app.add_option("--seed", seed, "dataset seed");
    app.add_option("--repeats", repeats, "timing repeats (best kept)");
    CLI11_PARSE(app, argc, argv);

    SynthSpec spec;
    spec.n = n;
    spec.seed = seed;
    std::vector<Fingerprint> db = synthesize(spec);
    std::vector<Fingerprint> queries = sample_queries(db, query_count, seed + 1);

    BitBoundIndex plain = BitBoundIndex::build(db);
    BitBoundIndex folded = BitBoundIndex::build(db, FoldSpec{FoldScheme::Sectioned, 4});

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; the parallel path falls back to serial\n");
#endif
    std::printf("database %llu x %u bits, %zu queries, k=%zu\n\n",
                static_cast<unsigned long long>(n), plain.length_bits(), query_count, k);
    std::printf("%-12s %14s %14s %9s\n", "kernel", "serial q/s", "parallel q/s", "speedup");

    const KernelCase cases[] = {
        {"brute", run_brute},
        {"bitbound", run_bitbound},
        {"two_stage", run_two_stage},
    };

    for (const KernelCase& kernel : cases) {
        const BitBoundIndex& index = kernel.name == "two_stage" ? folded : plain;

        for (const Fingerprint& q : queries) {
            TopKResult serial = kernel.run(index, q, k, Exec::Serial);
            TopKResult parallel = kernel.run(index, q, k, Exec::Parallel);
            if (!(serial == parallel)) {
                std::fprintf(stderr, "kernel %s: parallel result differs from serial\n",
                             kernel.name.c_str());
                return 1;
            }
        }

        double best[2] = {1e300, 1e300};
        for (int r = 0; r < repeats; ++r) {
            for (int mode = 0; mode < 2; ++mode) {
                Exec exec = mode == 0 ? Exec::Serial : Exec::Parallel;
                auto start = Clock::now();
                for (const Fingerprint& q : queries) (void)kernel.run(index, q, k, exec);
                double elapsed = seconds_since(start);
                if (elapsed < best[mode]) best[mode] = elapsed;
            }
        }
        double serial_qps = query_count / best[0];
        double parallel_qps = query_count / best[1];
        std::printf("%-12s %14.1f %14.1f %8.2fx\n", kernel.name.c_str(), serial_qps,
                    parallel_qps, parallel_qps / serial_qps);
    }
    return 0;
}
