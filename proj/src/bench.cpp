// SPDX-License-Identifier: Apache-2.0
#include "mss/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mss/io.hpp"

namespace mss {

namespace {

using Clock = std::chrono::steady_clock;

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

// Runs all queries once and returns the elapsed nanoseconds. threads > 1
// fans the queries out to concurrent readers of the shared index.
std::uint64_t time_queries(const std::function<void(std::size_t)>& run_query,
                           std::size_t query_count, int threads) {
    auto start = Clock::now();
#ifdef _OPENMP
    if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(dynamic)
        for (std::size_t i = 0; i < query_count; ++i) run_query(i);
    } else {
        for (std::size_t i = 0; i < query_count; ++i) run_query(i);
    }
#else
    for (std::size_t i = 0; i < query_count; ++i) run_query(i);
#endif
    auto elapsed = Clock::now() - start;
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());
}

struct Measurement {
    double recall = 0.0;
    double qps = 0.0;
    std::uint64_t wall_ns_per_query = 0;
};

// Measures one grid point: recall from a first untimed pass, then the median
// wall time over `repeats` timed passes (skipped in deterministic mode).
Measurement measure_point(const BenchConfig& config,
                          const std::vector<TopKResult>& oracles,
                          const std::function<TopKResult(std::size_t)>& query_fn) {
    Measurement out;
    std::size_t nq = oracles.size();
    double total_recall = 0.0;
    for (std::size_t i = 0; i < nq; ++i)
        total_recall += recall_at_k(query_fn(i), oracles[i], config.k);
    out.recall = nq == 0 ? 0.0 : total_recall / static_cast<double>(nq);

    if (config.deterministic_timing || nq == 0) return out;

    int repeats = std::max(1, config.repeats);
    std::vector<std::uint64_t> times;
    times.reserve(repeats);
    for (int r = 0; r < repeats; ++r)
        times.push_back(time_queries([&](std::size_t i) { (void)query_fn(i); }, nq,
                                     config.threads));
    std::sort(times.begin(), times.end());
    std::uint64_t median = times[(times.size() - 1) / 2];
    out.wall_ns_per_query = median / nq;
    out.qps = median == 0 ? 0.0 : 1e9 * static_cast<double>(nq) / static_cast<double>(median);
    return out;
}

// Rethrows grid-point failures with the point's parameters attached.
template <typename Fn>
void with_point_context(const std::string& context, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        throw Error("grid point " + context + ": " + e.what());
    }
}

bool record_order(const BenchRecord& a, const BenchRecord& b) {
    auto key = [](const BenchRecord& r) {
        return std::tie(r.algorithm, r.fold_m, r.fold_scheme, r.hnsw_m, r.ef, r.cutoff, r.k,
                        r.threads);
    };
    return key(a) < key(b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

} // namespace

const char* algo_name(Algo algo) {
    switch (algo) {
    case Algo::Brute: return "brute";
    case Algo::BitBound: return "bitbound";
    case Algo::TwoStage: return "two_stage";
    case Algo::Hnsw: return "hnsw";
    }
    return "unknown";
}

Algo algo_from_name(const std::string& name) {
    if (name == "brute") return Algo::Brute;
    if (name == "bitbound") return Algo::BitBound;
    if (name == "two_stage") return Algo::TwoStage;
    if (name == "hnsw") return Algo::Hnsw;
    throw ParameterError("unknown algorithm: " + name);
}

double recall_at_k(const TopKResult& result, const TopKResult& oracle, std::size_t k) {
    if (k == 0) throw ParameterError("k must be at least 1");
    std::size_t matched = 0;
    for (const Hit& expected : oracle.hits)
        for (const Hit& got : result.hits)
            if (expected.id == got.id) {
                ++matched;
                break;
            }
    return static_cast<double>(matched) / static_cast<double>(k);
}

void mark_pareto(std::vector<BenchRecord>& records) {
    for (BenchRecord& r : records) {
        bool dominated = false;
        for (const BenchRecord& other : records) {
            if (&other == &r) continue;
            bool geq = other.recall >= r.recall && other.qps >= r.qps;
            bool strict = other.recall > r.recall || other.qps > r.qps;
            if (geq && strict) {
                dominated = true;
                break;
            }
        }
        r.pareto = !dominated;
    }
}

std::vector<Fingerprint> load_bench_dataset(const BenchConfig& config) {
    if (!config.dataset_path.empty()) return read_fingerprints_file(config.dataset_path);
    if (config.clustered) return synthesize_clustered(*config.clustered);
    return synthesize(config.synth);
}

std::vector<BenchRecord> run_bench(const BenchConfig& config) {
    if (config.k == 0) throw ParameterError("k must be at least 1");
    std::vector<Fingerprint> db = load_bench_dataset(config);
    if (db.empty()) throw ParameterError("benchmark dataset is empty");
    std::vector<Fingerprint> queries = sample_queries(db, config.query_count, config.query_seed);

    // Brute-force oracle, one pass per query. A cutoff-filtered oracle is the
    // prefix of this ranking with scores >= cutoff, because the threshold
    // filter commutes with truncation on a descending ranking.
    std::vector<TopKResult> oracles(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i)
        oracles[i] = search_bruteforce(db, queries[i], config.k);

    auto filtered_oracles = [&](double cutoff) {
        std::vector<TopKResult> out(oracles.size());
        for (std::size_t i = 0; i < oracles.size(); ++i) {
            for (const Hit& hit : oracles[i].hits)
                if (hit.score.exact() >= cutoff) out[i].hits.push_back(hit);
        }
        return out;
    };

    std::vector<BenchRecord> records;
    BenchRecord base;
    base.k = config.k;
    base.threads = config.threads;

    switch (config.algo) {
    case Algo::Brute: {
        BenchRecord record = base;
        record.algorithm = algo_name(Algo::Brute);
        Measurement m = measure_point(config, oracles, [&](std::size_t i) {
            return search_bruteforce(db, queries[i], config.k);
        });
        record.recall = m.recall;
        record.qps = m.qps;
        record.wall_ns_per_query = m.wall_ns_per_query;
        records.push_back(record);
        break;
    }
    case Algo::BitBound: {
        if (config.cutoffs.empty())
            throw ParameterError("bitbound benchmark needs at least one cutoff");
        BitBoundIndex index = BitBoundIndex::build(db);
        for (double cutoff : config.cutoffs) {
            with_point_context("bitbound Sc=" + format_double(cutoff), [&] {
                BenchRecord record = base;
                record.algorithm = algo_name(Algo::BitBound);
                record.cutoff = cutoff;
                auto filtered = filtered_oracles(cutoff);
                Measurement m = measure_point(config, filtered, [&](std::size_t i) {
                    return search_bitbound(index, queries[i], config.k, cutoff);
                });
                record.recall = m.recall;
                record.qps = m.qps;
                record.wall_ns_per_query = m.wall_ns_per_query;
                records.push_back(record);
            });
        }
        break;
    }
    case Algo::TwoStage: {
        if (config.fold_ms.empty())
            throw ParameterError("two_stage benchmark needs at least one fold level");
        for (std::uint32_t m_level : config.fold_ms) {
            BitBoundIndex index;
            with_point_context("two_stage m=" + std::to_string(m_level), [&] {
                index = BitBoundIndex::build(db, FoldSpec{config.fold_scheme, m_level});
            });
            auto run_for = [&](std::optional<double> cutoff) {
                std::string context = "two_stage m=" + std::to_string(m_level) +
                                      (cutoff ? " Sc=" + format_double(*cutoff) : "");
                with_point_context(context, [&] {
                    BenchRecord record = base;
                    record.algorithm = algo_name(Algo::TwoStage);
                    record.fold_m = m_level;
                    record.fold_scheme = fold_scheme_name(config.fold_scheme);
                    record.cutoff = cutoff.value_or(0.0);
                    auto point_oracles = cutoff ? filtered_oracles(*cutoff) : oracles;
                    Measurement m = measure_point(config, point_oracles, [&](std::size_t i) {
                        return cutoff ? search_two_stage(index, queries[i], config.k, *cutoff)
                                      : search_two_stage_topk(index, queries[i], config.k);
                    });
                    record.recall = m.recall;
                    record.qps = m.qps;
                    record.wall_ns_per_query = m.wall_ns_per_query;
                    records.push_back(record);
                });
            };
            if (config.cutoffs.empty())
                run_for(std::nullopt);
            else
                for (double cutoff : config.cutoffs) run_for(cutoff);
        }
        break;
    }
    case Algo::Hnsw: {
        if (config.hnsw_ms.empty() || config.efs.empty())
            throw ParameterError("hnsw benchmark needs M and ef grids");
        for (std::uint32_t ef : config.efs)
            if (ef < config.k) throw ParameterError("every ef must be at least k");
        for (std::uint32_t M : config.hnsw_ms) {
            HnswParams params;
            params.M = M;
            params.ef_construction = std::max(config.ef_construction, M);
            params.seed = config.hnsw_seed;
            HnswGraph graph(params);
            with_point_context("hnsw M=" + std::to_string(M) + " build", [&] {
                for (const Fingerprint& fp : db) graph.insert(fp);
                graph.freeze();
            });
            for (std::uint32_t ef : config.efs) {
                with_point_context(
                    "hnsw M=" + std::to_string(M) + " ef=" + std::to_string(ef), [&] {
                        BenchRecord record = base;
                        record.algorithm = algo_name(Algo::Hnsw);
                        record.hnsw_m = M;
                        record.ef = ef;
                        Measurement m = measure_point(config, oracles, [&](std::size_t i) {
                            return graph.search(queries[i], config.k, ef);
                        });
                        record.recall = m.recall;
                        record.qps = m.qps;
                        record.wall_ns_per_query = m.wall_ns_per_query;
                        records.push_back(record);
                    });
            }
        }
        break;
    }
    }

    std::sort(records.begin(), records.end(), record_order);
    mark_pareto(records);
    return records;
}

std::string records_to_csv(const std::vector<BenchRecord>& records) {
    std::string out = "algorithm,k,cutoff,fold_m,fold_scheme,hnsw_m,ef,threads,recall,qps,"
                      "wall_ns_per_query,pareto\n";
    for (const BenchRecord& r : records) {
        out += r.algorithm;
        out += ',' + std::to_string(r.k);
        out += ',' + format_double(r.cutoff);
        out += ',' + std::to_string(r.fold_m);
        out += ',' + r.fold_scheme;
        out += ',' + std::to_string(r.hnsw_m);
        out += ',' + std::to_string(r.ef);
        out += ',' + std::to_string(r.threads);
        out += ',' + format_double(r.recall);
        out += ',' + format_double(r.qps);
        out += ',' + std::to_string(r.wall_ns_per_query);
        out += ',';
        out += r.pareto ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::vector<BenchRecord> records_from_csv(const std::string& csv) {
    std::vector<BenchRecord> records;
    std::stringstream ss(csv);
    std::string line;
    bool header = true;
    std::size_t line_number = 0;
    while (std::getline(ss, line)) {
        ++line_number;
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 12)
            throw ParseError("line " + std::to_string(line_number) +
                             ": expected 12 CSV fields");
        BenchRecord r;
        r.algorithm = fields[0];
        r.k = std::stoull(fields[1]);
        r.cutoff = std::strtod(fields[2].c_str(), nullptr);
        r.fold_m = static_cast<std::uint32_t>(std::stoul(fields[3]));
        r.fold_scheme = fields[4];
        r.hnsw_m = static_cast<std::uint32_t>(std::stoul(fields[5]));
        r.ef = static_cast<std::uint32_t>(std::stoul(fields[6]));
        r.threads = std::stoi(fields[7]);
        r.recall = std::strtod(fields[8].c_str(), nullptr);
        r.qps = std::strtod(fields[9].c_str(), nullptr);
        r.wall_ns_per_query = std::stoull(fields[10]);
        r.pareto = fields[11] == "1";
        records.push_back(std::move(r));
    }
    return records;
}

std::string records_to_json(const std::vector<BenchRecord>& records) {
    nlohmann::json array = nlohmann::json::array();
    for (const BenchRecord& r : records) {
        nlohmann::json item;
        item["algorithm"] = r.algorithm;
        item["k"] = r.k;
        item["cutoff"] = r.cutoff;
        item["fold_m"] = r.fold_m;
        item["fold_scheme"] = r.fold_scheme;
        item["hnsw_m"] = r.hnsw_m;
        item["ef"] = r.ef;
        item["threads"] = r.threads;
        item["recall"] = r.recall;
        item["qps"] = r.qps;
        item["wall_ns_per_query"] = r.wall_ns_per_query;
        item["pareto"] = r.pareto;
        array.push_back(std::move(item));
    }
    return array.dump(2) + "\n";
}

} // namespace mss
