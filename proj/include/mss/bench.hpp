// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mss/exact_index.hpp"
#include "mss/hnsw.hpp"
#include "mss/synth.hpp"

namespace mss {

enum class Algo : std::uint8_t { Brute, BitBound, TwoStage, Hnsw };

const char* algo_name(Algo algo);
Algo algo_from_name(const std::string& name);

/// One benchmark grid: dataset source, algorithm, parameter lists, and
/// measurement settings.
struct BenchConfig {
    std::string dataset_path;                      ///< empty: use synth spec
    SynthSpec synth;                               ///< plain synthetic fallback
    std::optional<ClusteredSynthSpec> clustered;   ///< clustered synthetic dataset

    Algo algo = Algo::Brute;
    std::size_t k = 20;
    std::size_t query_count = 100;
    std::uint64_t query_seed = 1;

    std::vector<double> cutoffs;        ///< bitbound / two_stage; empty = no cutoff
    std::vector<std::uint32_t> fold_ms; ///< two_stage fold levels
    FoldScheme fold_scheme = FoldScheme::Sectioned;
    std::vector<std::uint32_t> hnsw_ms; ///< HNSW M grid
    std::vector<std::uint32_t> efs;     ///< HNSW ef_search grid
    std::uint32_t ef_construction = 200;
    std::uint64_t hnsw_seed = 7;

    int repeats = 3;
    int threads = 1;
    bool deterministic_timing = false; ///< emit zero qps/wall_ns for reproducible files
};

/// One measured grid point.
struct BenchRecord {
    std::string algorithm;
    std::uint64_t k = 0;
    double cutoff = 0.0;      ///< 0 = none
    std::uint32_t fold_m = 0; ///< 0 = n/a
    std::string fold_scheme;  ///< empty = n/a
    std::uint32_t hnsw_m = 0; ///< 0 = n/a
    std::uint32_t ef = 0;     ///< 0 = n/a
    int threads = 1;
    double recall = 0.0;
    double qps = 0.0;
    std::uint64_t wall_ns_per_query = 0;
    bool pareto = false;

    bool operator==(const BenchRecord&) const = default;
};

/// Recall of `result` against the oracle top-k: |result ∩ oracle| / k.
double recall_at_k(const TopKResult& result, const TopKResult& oracle, std::size_t k);

/// Mark the Pareto-optimal records on (recall, qps): a record is on the
/// frontier iff no other record is at least as good in both and better in one.
void mark_pareto(std::vector<BenchRecord>& records);

/// Run the full grid: build or load the dataset, compute brute-force oracles,
/// measure every grid point, and mark the Pareto set. Records are sorted by
/// their parameters so output files are deterministic.
std::vector<BenchRecord> run_bench(const BenchConfig& config);

std::string records_to_csv(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> records_from_csv(const std::string& csv);
std::string records_to_json(const std::vector<BenchRecord>& records);

/// Load the dataset a config describes (file, clustered synth, or plain synth).
std::vector<Fingerprint> load_bench_dataset(const BenchConfig& config);

} // namespace mss
