// SPDX-License-Identifier: Apache-2.0
//
// mss: molecular similarity search over binary fingerprints.
//
// Subcommands: synth, build, search, bench, model, pareto.
// Exit codes: 0 success, 2 parse/config error, 3 runtime error.
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mss/acceptance.hpp"
#include "mss/bench.hpp"
#include "mss/io.hpp"
#include "mss/reports.hpp"

namespace {

using namespace mss;

void write_text_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open for reading: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string search_results_csv(const std::vector<TopKResult>& results) {
    std::string out = "query,rank,id,score,intersection,union,fixed12\n";
    char line[160];
    for (std::size_t q = 0; q < results.size(); ++q) {
        for (std::size_t rank = 0; rank < results[q].hits.size(); ++rank) {
            const Hit& hit = results[q].hits[rank];
            std::snprintf(line, sizeof(line), "%zu,%zu,%llu,%.17g,%u,%u,%u\n", q, rank,
                          static_cast<unsigned long long>(hit.id), hit.score.exact(),
                          hit.score.intersection_count, hit.score.union_count,
                          hit.score.fixed12());
            out += line;
        }
    }
    return out;
}

std::string search_results_json(const std::vector<TopKResult>& results) {
    nlohmann::json queries = nlohmann::json::array();
    for (const TopKResult& result : results) {
        nlohmann::json hits = nlohmann::json::array();
        for (const Hit& hit : result.hits) {
            nlohmann::json item;
            item["id"] = hit.id;
            item["score"] = hit.score.exact();
            item["intersection"] = hit.score.intersection_count;
            item["union"] = hit.score.union_count;
            item["fixed12"] = hit.score.fixed12();
            hits.push_back(std::move(item));
        }
        queries.push_back(std::move(hits));
    }
    return queries.dump(2) + "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"molecular similarity search over binary fingerprints"};
    app.require_subcommand(1);

    // ---- synth -------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic fingerprint database");
    std::uint64_t synth_n = 10000;
    std::uint32_t synth_bits = 1024;
    double synth_mu = 47.5, synth_sigma = 12.2, synth_mutation = 0.38;
    std::uint64_t synth_seed = 0, synth_clusters = 0;
    std::string synth_out = "-";
    synth_cmd->add_option("--n", synth_n, "number of fingerprints");
    synth_cmd->add_option("--bits", synth_bits, "fingerprint length (multiple of 64)");
    synth_cmd->add_option("--mu", synth_mu, "mean bit count");
    synth_cmd->add_option("--sigma", synth_sigma, "bit count standard deviation");
    synth_cmd->add_option("--seed", synth_seed, "RNG seed");
    synth_cmd->add_option("--clusters", synth_clusters,
                          "cluster size; 0 = unclustered uniform positions");
    synth_cmd->add_option("--mutation", synth_mutation,
                          "per-member fraction of resampled parent bits (clustered mode)");
    synth_cmd->add_option("--out", synth_out, "output file, - for stdout");

    // ---- build -------------------------------------------------------------
    auto* build_cmd = app.add_subcommand("build", "build and serialize an index");
    std::string build_algo = "bitbound", build_in, build_out;
    std::uint32_t build_fold_m = 0;
    std::string build_fold_scheme = "sectioned";
    std::uint32_t build_hnsw_m = 16, build_ef = 200;
    std::uint64_t build_seed = 0;
    build_cmd->add_option("--algo", build_algo, "bitbound | two_stage | hnsw")
        ->check(CLI::IsMember({"bitbound", "two_stage", "hnsw"}));
    build_cmd->add_option("--in", build_in, "fingerprint text file")->required();
    build_cmd->add_option("--out", build_out, "index output file")->required();
    build_cmd->add_option("--fold-m", build_fold_m, "folding level (two_stage)");
    build_cmd->add_option("--fold-scheme", build_fold_scheme, "sectioned | adjacent")
        ->check(CLI::IsMember({"sectioned", "adjacent"}));
    build_cmd->add_option("--hnsw-m", build_hnsw_m, "HNSW adjacency size M");
    build_cmd->add_option("--ef", build_ef, "HNSW ef_construction");
    build_cmd->add_option("--seed", build_seed, "HNSW level seed");

    // ---- search ------------------------------------------------------------
    auto* search_cmd = app.add_subcommand("search", "run top-k queries");
    std::string search_algo = "brute", search_in, search_index, search_queries;
    std::string search_out = "-", search_format = "csv";
    std::size_t search_k = 10;
    double search_cutoff = 0.0;
    std::uint32_t search_ef = 0, search_fold_m = 0;
    std::string search_fold_scheme = "sectioned";
    std::uint32_t search_hnsw_m = 16, search_efc = 200;
    std::uint64_t search_seed = 0;
    int search_threads = 1;
    search_cmd->add_option("--algo", search_algo, "brute | bitbound | two_stage | hnsw")
        ->check(CLI::IsMember({"brute", "bitbound", "two_stage", "hnsw"}));
    search_cmd->add_option("--in", search_in, "fingerprint text file (build in memory)");
    search_cmd->add_option("--index", search_index, "serialized index file");
    search_cmd->add_option("--queries", search_queries, "query fingerprint file")->required();
    search_cmd->add_option("--k", search_k, "hits per query");
    search_cmd->add_option("--cutoff", search_cutoff, "similarity cutoff in (0,1]");
    search_cmd->add_option("--ef", search_ef, "HNSW ef_search (default max(k, 64))");
    search_cmd->add_option("--fold-m", search_fold_m, "folding level for in-memory two_stage");
    search_cmd->add_option("--fold-scheme", search_fold_scheme, "sectioned | adjacent")
        ->check(CLI::IsMember({"sectioned", "adjacent"}));
    search_cmd->add_option("--hnsw-m", search_hnsw_m, "HNSW M for in-memory build");
    search_cmd->add_option("--ef-construction", search_efc, "HNSW ef_construction");
    search_cmd->add_option("--seed", search_seed, "HNSW level seed for in-memory build");
    search_cmd->add_option("--threads", search_threads, "concurrent query readers");
    search_cmd->add_option("--out", search_out, "output file, - for stdout");
    search_cmd->add_option("--format", search_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    // ---- bench -------------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "measure recall and QPS over a grid");
    std::string bench_suite;
    std::string bench_algo = "brute", bench_in, bench_out, bench_format = "csv";
    std::uint64_t bench_synth_n = 10000, bench_synth_seed = 42, bench_clusters = 0;
    std::uint32_t bench_bits = 1024;
    double bench_mu = 47.5, bench_sigma = 12.2, bench_mutation = 0.38;
    std::size_t bench_k = 20, bench_queries = 100;
    std::uint64_t bench_query_seed = 1, bench_hnsw_seed = 7;
    std::vector<double> bench_cutoffs;
    std::vector<std::uint32_t> bench_fold_ms, bench_hnsw_ms, bench_efs;
    std::string bench_fold_scheme = "sectioned";
    std::uint32_t bench_efc = 200;
    int bench_repeats = 3, bench_threads = 1;
    bool bench_deterministic = false;
    bench_cmd->add_option("--suite", bench_suite, "run a named suite (acceptance)");
    bench_cmd->add_option("--algo", bench_algo, "brute | bitbound | two_stage | hnsw")
        ->check(CLI::IsMember({"brute", "bitbound", "two_stage", "hnsw"}));
    bench_cmd->add_option("--in", bench_in, "dataset file (default: synthetic)");
    bench_cmd->add_option("--synth-n", bench_synth_n, "synthetic dataset size");
    bench_cmd->add_option("--bits", bench_bits, "synthetic fingerprint length");
    bench_cmd->add_option("--mu", bench_mu, "synthetic mean bit count");
    bench_cmd->add_option("--sigma", bench_sigma, "synthetic count standard deviation");
    bench_cmd->add_option("--synth-seed", bench_synth_seed, "synthetic dataset seed");
    bench_cmd->add_option("--clusters", bench_clusters,
                          "cluster size for the clustered synthetic dataset (0 = uniform)");
    bench_cmd->add_option("--mutation", bench_mutation, "clustered mutation fraction");
    bench_cmd->add_option("--k", bench_k, "hits per query");
    bench_cmd->add_option("--queries", bench_queries, "query count (sampled from the dataset)");
    bench_cmd->add_option("--query-seed", bench_query_seed, "query sampling seed");
    bench_cmd->add_option("--cutoff", bench_cutoffs, "similarity cutoffs")->delimiter(',');
    bench_cmd->add_option("--fold-m", bench_fold_ms, "two_stage fold levels")->delimiter(',');
    bench_cmd->add_option("--fold-scheme", bench_fold_scheme, "sectioned | adjacent")
        ->check(CLI::IsMember({"sectioned", "adjacent"}));
    bench_cmd->add_option("--hnsw-m", bench_hnsw_ms, "HNSW M grid")->delimiter(',');
    bench_cmd->add_option("--ef", bench_efs, "HNSW ef_search grid")->delimiter(',');
    bench_cmd->add_option("--ef-construction", bench_efc, "HNSW ef_construction");
    bench_cmd->add_option("--hnsw-seed", bench_hnsw_seed, "HNSW level seed");
    bench_cmd->add_option("--repeats", bench_repeats, "timing repeats (median)");
    bench_cmd->add_option("--threads", bench_threads, "concurrent query readers");
    bench_cmd->add_flag("--deterministic", bench_deterministic,
                        "emit zero timing fields for byte-reproducible output");
    bench_cmd->add_option("--out", bench_out, "output prefix (.csv and .json)");
    bench_cmd->add_option("--format", bench_format, "stdout format: csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    // ---- model -------------------------------------------------------------
    auto* model_cmd = app.add_subcommand("model", "analytic speedup and hardware cost reports");
    double model_mu = 47.5, model_sigma = 12.2, model_pruned = 0.0;
    std::string model_in, model_out;
    std::vector<double> model_cutoffs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
    std::vector<std::uint32_t> model_fold_ms = {1, 2, 4, 8, 16, 32};
    std::uint64_t model_db_size = 1924000;
    double model_peak = 460.0, model_eff = 0.90, model_cap = 410.0, model_freq = 450e6;
    std::uint32_t model_bits = 1024;
    model_cmd->add_option("--mu", model_mu, "bit count mean");
    model_cmd->add_option("--sigma", model_sigma, "bit count standard deviation");
    model_cmd->add_option("--in", model_in, "fit mu/sigma from this fingerprint file");
    model_cmd->add_option("--cutoff", model_cutoffs, "cutoff grid")->delimiter(',');
    model_cmd->add_option("--fold-m", model_fold_ms, "fold levels for the cost report")
        ->delimiter(',');
    model_cmd->add_option("--db-size", model_db_size, "database size N");
    model_cmd->add_option("--pruned", model_pruned, "pruned fraction for the QPS row");
    model_cmd->add_option("--peak-bw", model_peak, "peak bandwidth GB/s");
    model_cmd->add_option("--efficiency", model_eff, "bandwidth efficiency (0,1]");
    model_cmd->add_option("--bw-cap", model_cap, "bandwidth cap GB/s");
    model_cmd->add_option("--freq", model_freq, "kernel frequency Hz");
    model_cmd->add_option("--bits", model_bits, "fingerprint bits");
    model_cmd->add_option("--out", model_out, "output prefix (_model.csv, _cost.json)");

    // ---- pareto ------------------------------------------------------------
    auto* pareto_cmd = app.add_subcommand("pareto", "recompute the Pareto flags of a bench CSV");
    std::string pareto_in, pareto_out = "-";
    pareto_cmd->add_option("--in", pareto_in, "bench CSV file")->required();
    pareto_cmd->add_option("--out", pareto_out, "output file, - for stdout");

    CLI11_PARSE(app, argc, argv);

    if (synth_cmd->parsed()) {
        std::vector<Fingerprint> db;
        if (synth_clusters > 0) {
            ClusteredSynthSpec spec;
            spec.n = synth_n;
            spec.length_bits = synth_bits;
            spec.mu = synth_mu;
            spec.sigma = synth_sigma;
            spec.cluster_size = synth_clusters;
            spec.mutation = synth_mutation;
            spec.seed = synth_seed;
            db = synthesize_clustered(spec);
        } else {
            SynthSpec spec;
            spec.n = synth_n;
            spec.length_bits = synth_bits;
            spec.mu = synth_mu;
            spec.sigma = synth_sigma;
            spec.seed = synth_seed;
            db = synthesize(spec);
        }
        std::ostringstream out;
        write_fingerprints(out, db);
        write_text_output(synth_out, out.str());
        return 0;
    }

    if (build_cmd->parsed()) {
        std::vector<Fingerprint> db = read_fingerprints_file(build_in);
        if (db.empty()) throw ParameterError("refusing to build an index over an empty database");
        if (build_algo == "hnsw") {
            HnswParams params;
            params.M = build_hnsw_m;
            params.ef_construction = std::max(build_ef, build_hnsw_m);
            params.seed = build_seed;
            HnswGraph graph(params);
            for (const Fingerprint& fp : db) graph.insert(fp);
            graph.freeze();
            save_hnsw_file(build_out, graph);
        } else {
            std::optional<FoldSpec> spec;
            if (build_algo == "two_stage") {
                if (build_fold_m == 0)
                    throw ParameterError("two_stage build requires --fold-m");
                spec = FoldSpec{fold_scheme_from_name(build_fold_scheme), build_fold_m};
            } else if (build_fold_m > 0) {
                spec = FoldSpec{fold_scheme_from_name(build_fold_scheme), build_fold_m};
            }
            save_bitbound_file(build_out, BitBoundIndex::build(db, spec));
        }
        return 0;
    }

    if (search_cmd->parsed()) {
        std::vector<Fingerprint> queries = read_fingerprints_file(search_queries);
        if (queries.empty()) throw ParameterError("query file is empty");
        std::size_t ef = search_ef > 0 ? search_ef : std::max<std::size_t>(search_k, 64);

        std::function<TopKResult(const Fingerprint&)> run_query;
        std::vector<Fingerprint> db;
        BitBoundIndex bitbound;
        std::optional<HnswGraph> hnsw;

        if (!search_index.empty()) {
            if (search_algo == "hnsw") {
                hnsw = load_hnsw_file(search_index);
            } else {
                bitbound = load_bitbound_file(search_index);
            }
        } else {
            if (search_in.empty())
                throw ParameterError("search needs --index or --in");
            db = read_fingerprints_file(search_in);
            if (search_algo == "bitbound") {
                bitbound = BitBoundIndex::build(db);
            } else if (search_algo == "two_stage") {
                if (search_fold_m == 0)
                    throw ParameterError("two_stage search requires --fold-m");
                bitbound = BitBoundIndex::build(
                    db, FoldSpec{fold_scheme_from_name(search_fold_scheme), search_fold_m});
            } else if (search_algo == "hnsw") {
                HnswParams params;
                params.M = search_hnsw_m;
                params.ef_construction = std::max(search_efc, search_hnsw_m);
                params.seed = search_seed;
                hnsw.emplace(params);
                for (const Fingerprint& fp : db) hnsw->insert(fp);
                hnsw->freeze();
            }
        }

        if (search_algo == "brute") {
            if (db.empty() && !search_index.empty()) {
                run_query = [&](const Fingerprint& q) {
                    return search_bruteforce(bitbound, q, search_k);
                };
            } else {
                run_query = [&](const Fingerprint& q) {
                    return search_bruteforce(db, q, search_k);
                };
            }
        } else if (search_algo == "bitbound") {
            double cutoff = search_cutoff > 0.0 ? search_cutoff : 1e-9;
            run_query = [&, cutoff](const Fingerprint& q) {
                return search_bitbound(bitbound, q, search_k, cutoff);
            };
        } else if (search_algo == "two_stage") {
            if (search_cutoff > 0.0) {
                run_query = [&](const Fingerprint& q) {
                    return search_two_stage(bitbound, q, search_k, search_cutoff);
                };
            } else {
                run_query = [&](const Fingerprint& q) {
                    return search_two_stage_topk(bitbound, q, search_k);
                };
            }
        } else {
            run_query = [&, ef](const Fingerprint& q) {
                return hnsw->search(q, search_k, std::max(ef, search_k));
            };
        }

        std::vector<TopKResult> results(queries.size());
#ifdef _OPENMP
        if (search_threads > 1) {
#pragma omp parallel for num_threads(search_threads) schedule(dynamic)
            for (std::size_t i = 0; i < queries.size(); ++i) results[i] = run_query(queries[i]);
        } else
#endif
        {
            for (std::size_t i = 0; i < queries.size(); ++i) results[i] = run_query(queries[i]);
        }

        write_text_output(search_out, search_format == "json" ? search_results_json(results)
                                                              : search_results_csv(results));
        return 0;
    }

    if (bench_cmd->parsed()) {
        if (!bench_suite.empty()) {
            if (bench_suite != "acceptance")
                throw ParameterError("unknown suite: " + bench_suite);
            auto results = mss::acceptance::run_all(std::cout);
            return mss::acceptance::all_passed(results) ? 0 : 3;
        }

        BenchConfig config;
        config.dataset_path = bench_in;
        if (bench_in.empty()) {
            if (bench_clusters > 0) {
                ClusteredSynthSpec spec;
                spec.n = bench_synth_n;
                spec.length_bits = bench_bits;
                spec.mu = bench_mu;
                spec.sigma = bench_sigma;
                spec.cluster_size = bench_clusters;
                spec.mutation = bench_mutation;
                spec.seed = bench_synth_seed;
                config.clustered = spec;
            } else {
                config.synth.n = bench_synth_n;
                config.synth.length_bits = bench_bits;
                config.synth.mu = bench_mu;
                config.synth.sigma = bench_sigma;
                config.synth.seed = bench_synth_seed;
            }
        }
        config.algo = algo_from_name(bench_algo);
        config.k = bench_k;
        config.query_count = bench_queries;
        config.query_seed = bench_query_seed;
        config.cutoffs = bench_cutoffs;
        config.fold_ms = bench_fold_ms;
        config.fold_scheme = fold_scheme_from_name(bench_fold_scheme);
        config.hnsw_ms = bench_hnsw_ms;
        config.efs = bench_efs;
        config.ef_construction = bench_efc;
        config.hnsw_seed = bench_hnsw_seed;
        config.repeats = bench_repeats;
        config.threads = bench_threads;
        config.deterministic_timing = bench_deterministic;

        std::vector<BenchRecord> records = run_bench(config);
        if (!bench_out.empty()) {
            write_text_output(bench_out + ".csv", records_to_csv(records));
            write_text_output(bench_out + ".json", records_to_json(records));
        } else {
            std::cout << (bench_format == "json" ? records_to_json(records)
                                                 : records_to_csv(records));
        }
        return 0;
    }

    if (model_cmd->parsed()) {
        GaussianFit fit{model_mu, model_sigma};
        if (!model_in.empty()) {
            std::vector<Fingerprint> db = read_fingerprints_file(model_in);
            std::vector<std::uint32_t> counts;
            counts.reserve(db.size());
            for (const Fingerprint& fp : db) counts.push_back(fp.bit_count());
            fit = fit_gaussian(counts);
        }
        PlatformSpec platform;
        platform.peak_bandwidth_GBs = model_peak;
        platform.efficiency = model_eff;
        platform.bandwidth_cap_GBs = model_cap;
        platform.kernel_freq_Hz = model_freq;
        platform.fingerprint_bits = model_bits;

        std::string model_csv = model_report_csv(fit, model_cutoffs);
        std::string cost_json =
            cost_report_json(platform, model_db_size, model_fold_ms, model_pruned);
        if (!model_out.empty()) {
            write_text_output(model_out + "_model.csv", model_csv);
            write_text_output(model_out + "_cost.json", cost_json);
        } else {
            std::cout << model_csv << cost_json;
        }
        return 0;
    }

    if (pareto_cmd->parsed()) {
        std::vector<BenchRecord> records = records_from_csv(read_text_file(pareto_in));
        mark_pareto(records);
        write_text_output(pareto_out, records_to_csv(records));
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mss::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
