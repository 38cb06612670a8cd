// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mss/bench.hpp"
#include "mss/io.hpp"
#include "test_util.hpp"

using namespace mss;
using mss::test::uniform_below;

TEST_CASE("synthesize draws the requested count distribution") {
    SynthSpec spec;
    spec.n = 100000;
    spec.seed = 9;
    auto db = synthesize(spec);
    REQUIRE(db.size() == spec.n);
    double mean = 0.0;
    for (const auto& fp : db) mean += fp.bit_count();
    mean /= static_cast<double>(db.size());
    double var = 0.0;
    for (const auto& fp : db) var += (fp.bit_count() - mean) * (fp.bit_count() - mean);
    double sd = std::sqrt(var / static_cast<double>(db.size()));
    CHECK(std::abs(mean - 47.5) < 0.2);
    CHECK(std::abs(sd - 12.2) < 0.2);
}

TEST_CASE("synthesize with vanishing sigma pins every count") {
    SynthSpec spec;
    spec.n = 500;
    spec.mu = 50;
    spec.sigma = 1e-9;
    spec.seed = 1;
    for (const auto& fp : synthesize(spec)) CHECK(fp.bit_count() == 50);
}

TEST_CASE("synthesize is deterministic per seed") {
    SynthSpec spec;
    spec.n = 300;
    spec.seed = 77;
    auto a = synthesize(spec);
    auto b = synthesize(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].same_bits(b[i]));

    spec.seed = 78;
    auto c = synthesize(spec);
    bool any_differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) any_differs = any_differs || !a[i].same_bits(c[i]);
    CHECK(any_differs);
}

TEST_CASE("synthesize validates parameters") {
    SynthSpec spec;
    spec.n = 10;
    spec.mu = 0;
    CHECK_THROWS_AS(synthesize(spec), ParameterError);
    spec.mu = 2000;
    CHECK_THROWS_AS(synthesize(spec), ParameterError);
    spec.mu = 47.5;
    spec.sigma = 0;
    CHECK_THROWS_AS(synthesize(spec), ParameterError);
    spec.sigma = 1;
    spec.length_bits = 100;
    CHECK_THROWS_AS(synthesize(spec), ParameterError);
}

TEST_CASE("clustered synthesize keeps the count distribution") {
    ClusteredSynthSpec spec;
    spec.n = 20000;
    spec.seed = 13;
    auto db = synthesize_clustered(spec);
    REQUIRE(db.size() == spec.n);
    double mean = 0.0;
    for (const auto& fp : db) mean += fp.bit_count();
    mean /= static_cast<double>(db.size());
    CHECK(std::abs(mean - 47.5) < 1.5);

    // Members of one cluster really are near neighbors.
    double self_sim = tanimoto(db[0], db[1]).exact();
    CHECK(self_sim > 0.3);
}

TEST_CASE("recall@k definition") {
    auto hit = [](std::uint32_t inter, std::uint32_t uni, std::uint64_t id) {
        return Hit{TanimotoScore{inter, uni}, id};
    };
    TopKResult oracle{{hit(9, 10, 1), hit(8, 10, 2), hit(7, 10, 3), hit(6, 10, 4)}};
    TopKResult result{{hit(9, 10, 1), hit(7, 10, 3), hit(1, 10, 99), hit(1, 10, 98)}};
    CHECK(recall_at_k(result, oracle, 4) == doctest::Approx(0.5));
    CHECK(recall_at_k(oracle, oracle, 4) == doctest::Approx(1.0));
    CHECK(recall_at_k(TopKResult{}, oracle, 4) == doctest::Approx(0.0));
}

TEST_CASE("pareto flags match an exhaustive dominance check") {
    std::mt19937_64 rng(21);
    std::vector<BenchRecord> records(60);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].algorithm = "x";
        records[i].k = i;
        records[i].recall = static_cast<double>(uniform_below(rng, 11)) / 10.0;
        records[i].qps = static_cast<double>(uniform_below(rng, 1000));
    }
    mark_pareto(records);
    for (const auto& r : records) {
        bool dominated = false;
        for (const auto& other : records) {
            if (&other == &r) continue;
            if (other.recall >= r.recall && other.qps >= r.qps &&
                (other.recall > r.recall || other.qps > r.qps))
                dominated = true;
        }
        CHECK(r.pareto == !dominated);
    }
}

TEST_CASE("bench CSV round trips exactly") {
    std::vector<BenchRecord> records(3);
    records[0].algorithm = "hnsw";
    records[0].k = 20;
    records[0].hnsw_m = 16;
    records[0].ef = 200;
    records[0].recall = 0.93333333333333335;
    records[0].qps = 12345.678901234567;
    records[0].wall_ns_per_query = 81003;
    records[0].pareto = true;
    records[1].algorithm = "two_stage";
    records[1].k = 20;
    records[1].cutoff = 0.8;
    records[1].fold_m = 4;
    records[1].fold_scheme = "sectioned";
    records[1].recall = 1.0 / 3.0;
    records[1].qps = 0.1;
    records[2].algorithm = "brute";
    records[2].k = 5;
    records[2].recall = 1.0;
    records[2].threads = 4;

    std::string csv = records_to_csv(records);
    std::vector<BenchRecord> back = records_from_csv(csv);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(back[i] == records[i]);
    CHECK(records_to_csv(back) == csv);
}

TEST_CASE("bench run: brute force scores recall 1 on itself") {
    BenchConfig config;
    config.synth.n = 400;
    config.synth.seed = 31;
    config.algo = Algo::Brute;
    config.k = 10;
    config.query_count = 20;
    config.deterministic_timing = true;
    auto records = run_bench(config);
    REQUIRE(records.size() == 1);
    CHECK(records[0].recall == doctest::Approx(1.0));
    CHECK(records[0].qps == 0.0);
    CHECK(records[0].pareto);
}

TEST_CASE("bench run: identity fold scores recall 1") {
    BenchConfig config;
    ClusteredSynthSpec data;
    data.n = 600;
    data.seed = 32;
    config.clustered = data;
    config.algo = Algo::TwoStage;
    config.k = 10;
    config.query_count = 15;
    config.fold_ms = {1, 4};
    config.deterministic_timing = true;
    auto records = run_bench(config);
    REQUIRE(records.size() == 2);
    CHECK(records[0].fold_m == 1);
    CHECK(records[0].recall == doctest::Approx(1.0));
    CHECK(records[1].fold_m == 4);
    CHECK(records[1].recall > 0.5);
}

TEST_CASE("bench run: hnsw grid reaches 0.9 recall and rises along ef") {
    BenchConfig config;
    ClusteredSynthSpec data;
    data.n = 3000;
    data.seed = 33;
    config.clustered = data;
    config.algo = Algo::Hnsw;
    config.k = 10;
    config.query_count = 40;
    config.hnsw_ms = {5, 10, 20};
    config.efs = {10, 40, 120};
    config.ef_construction = 80;
    config.deterministic_timing = true;
    auto records = run_bench(config);
    REQUIRE(records.size() == 9);

    double best = 0.0;
    for (const auto& r : records) best = std::max(best, r.recall);
    CHECK(best >= 0.9);

    for (std::uint32_t m : config.hnsw_ms) {
        double previous = -1.0;
        for (const auto& r : records) {
            if (r.hnsw_m != m) continue;
            CHECK(r.recall >= previous);
            previous = r.recall;
        }
    }
}

TEST_CASE("bench config validation") {
    BenchConfig config;
    config.algo = Algo::BitBound;
    config.synth.n = 50;
    CHECK_THROWS_AS(run_bench(config), ParameterError);

    config.algo = Algo::Hnsw;
    config.hnsw_ms = {8};
    config.efs = {4};
    config.k = 10;
    CHECK_THROWS_AS(run_bench(config), ParameterError);
}
