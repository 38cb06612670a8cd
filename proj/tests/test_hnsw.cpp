// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "mss/hnsw.hpp"
#include "mss/io.hpp"
#include "mss/synth.hpp"
#include "test_util.hpp"

using namespace mss;
using mss::test::random_fingerprint;
using mss::test::uniform_below;

namespace {

std::vector<Fingerprint> clustered(std::size_t n, std::uint64_t seed) {
    ClusteredSynthSpec spec;
    spec.n = n;
    spec.seed = seed;
    return synthesize_clustered(spec);
}

HnswGraph build_graph(const std::vector<Fingerprint>& db, HnswParams params) {
    HnswGraph graph(params);
    for (const Fingerprint& fp : db) graph.insert(fp);
    return graph;
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
        for (std::uint32_t nb : graph.links()[node][0])
            if (!seen[nb]) {
                seen[nb] = 1;
                ++visited;
                frontier.push_back(nb);
            }
    }
    return visited == graph.size();
}

// Literal reference interpreter of the base-layer traversal: visited set v,
// candidate set C and result set M seeded with the entry point, both kept as
// plain vectors bounded by ef, distances recomputed on demand.
std::vector<std::pair<double, std::uint64_t>>
reference_search_layer_base(const HnswGraph& graph, const Fingerprint& query,
                            std::uint64_t entry_id, std::size_t ef) {
    using Item = std::pair<double, std::uint64_t>;
    auto nearer = [](const Item& a, const Item& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    };
    auto dist_to = [&](std::uint64_t id) {
        return 1.0 - tanimoto(query, graph.fingerprint(id)).exact();
    };

    std::set<std::uint64_t> visited{entry_id};
    std::vector<Item> candidates{{dist_to(entry_id), entry_id}};
    std::vector<Item> results{{dist_to(entry_id), entry_id}};

    while (!candidates.empty()) {
        auto top_it = std::min_element(candidates.begin(), candidates.end(), nearer);
        Item top = *top_it;
        candidates.erase(top_it);
        Item furthest = *std::max_element(results.begin(), results.end(), nearer);
        if (top.first > furthest.first) break;

        for (std::uint64_t e : graph.neighbors(top.second, 0)) {
            if (visited.count(e)) continue;
            visited.insert(e);
            Item f = *std::max_element(results.begin(), results.end(), nearer);
            double d = dist_to(e);
            if (d < f.first || results.size() < ef) {
                candidates.push_back({d, e});
                if (candidates.size() > ef)
                    candidates.erase(
                        std::max_element(candidates.begin(), candidates.end(), nearer));
                results.push_back({d, e});
                if (results.size() > ef)
                    results.erase(std::max_element(results.begin(), results.end(), nearer));
            }
        }
    }
    std::sort(results.begin(), results.end(), nearer);
    return results;
}

} // namespace

TEST_CASE("params validation") {
    HnswParams params;
    params.M = 1;
    CHECK_THROWS_AS(HnswGraph{params}, ParameterError);
    params.M = 8;
    params.ef_construction = 4;
    CHECK_THROWS_AS(HnswGraph{params}, ParameterError);
    params.ef_construction = 16;
    CHECK_NOTHROW(HnswGraph{params});
    CHECK(params.max_degree(0) == 16);
    CHECK(params.max_degree(1) == 8);
}

TEST_CASE("first insert becomes the entry point with no edges") {
    HnswParams params;
    params.M = 4;
    params.ef_construction = 8;
    HnswGraph graph(params);
    std::mt19937_64 rng(1);
    Fingerprint fp = random_fingerprint(rng, 128, 20, 42);
    graph.insert(fp);
    CHECK(graph.size() == 1);
    CHECK(graph.entry_point_id() == 42);
    for (std::uint32_t layer = 0; layer <= graph.max_level(); ++layer)
        CHECK(graph.neighbors(42, layer).empty());
}

TEST_CASE("second insert creates one bidirectional base edge") {
    HnswParams params;
    params.M = 4;
    params.ef_construction = 8;
    HnswGraph graph(params);
    std::mt19937_64 rng(2);
    graph.insert(random_fingerprint(rng, 128, 20, 0));
    graph.insert(random_fingerprint(rng, 128, 25, 1));
    CHECK(graph.neighbors(0, 0) == std::vector<std::uint64_t>{1});
    CHECK(graph.neighbors(1, 0) == std::vector<std::uint64_t>{0});
}

TEST_CASE("duplicate ids and frozen graphs are rejected") {
    HnswParams params;
    params.M = 4;
    params.ef_construction = 8;
    HnswGraph graph(params);
    std::mt19937_64 rng(3);
    graph.insert(random_fingerprint(rng, 128, 20, 7));
    CHECK_THROWS_AS(graph.insert(random_fingerprint(rng, 128, 21, 7)), StateError);
    graph.freeze();
    CHECK_THROWS_AS(graph.insert(random_fingerprint(rng, 128, 22, 8)), StateError);
}

TEST_CASE("degree caps hold and the base layer is connected") {
    auto db = clustered(200, 11);
    HnswParams params;
    params.M = 8;
    params.ef_construction = 32;
    params.seed = 5;
    HnswGraph graph = build_graph(db, params);

    for (std::size_t slot = 0; slot < graph.size(); ++slot) {
        const auto& layers = graph.links()[slot];
        for (std::uint32_t layer = 0; layer < layers.size(); ++layer) {
            CHECK(layers[layer].size() <= params.max_degree(layer));
            // Bidirectional: every edge has its reverse.
            for (std::uint32_t nb : layers[layer]) {
                const auto& back = graph.links()[nb][layer];
                CHECK(std::find(back.begin(), back.end(), slot) != back.end());
            }
        }
    }
    CHECK(layer0_connected(graph));
}

TEST_CASE("greedy layer descent walks a hand-built path graph") {
    // Three nodes on layer 1 in a path a(1023) - b(1024) - c(1025), with
    // distances to the query 0.947, 0.667, 0.182.
    std::vector<std::uint32_t> qbits{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    Fingerprint q = Fingerprint::from_positions(64, qbits, 9000);

    auto make = [&](std::initializer_list<std::uint32_t> shared, std::uint32_t filler_base,
                    std::uint64_t id) {
        std::vector<std::uint32_t> bits(shared);
        std::uint32_t next = filler_base;
        while (bits.size() < 10) bits.push_back(next++);
        return Fingerprint::from_positions(64, bits, id);
    };
    Fingerprint a = make({0}, 20, 1023);           // 1 shared -> 1/19
    Fingerprint b = make({0, 1, 2, 3, 4}, 35, 1024); // 5 shared -> 5/15
    Fingerprint c = make({0, 1, 2, 3, 4, 5, 6, 7, 8}, 50, 1025); // 9 shared -> 9/11

    HnswParams params;
    params.M = 2;
    params.ef_construction = 2;
    std::vector<std::vector<std::vector<std::uint32_t>>> links(3);
    links[0] = {{1}, {1}};         // a: layer0 and layer1 both link to b
    links[1] = {{0, 2}, {0, 2}};   // b
    links[2] = {{1}, {1}};         // c
    HnswGraph graph = HnswGraph::from_parts(params, {a, b, c}, {1, 1, 1}, links, 0);

    CHECK(graph.search_layer_top(q, 1023, 1) == 1025);
    // An entry that is already a local optimum comes straight back.
    CHECK(graph.search_layer_top(q, 1025, 1) == 1025);

    // The result is at least as close as all of its neighbors.
    auto dist = [&](std::uint64_t id) {
        return 1.0 - tanimoto(q, graph.fingerprint(id)).exact();
    };
    std::uint64_t top = graph.search_layer_top(q, 1023, 1);
    for (std::uint64_t nb : graph.neighbors(top, 1)) CHECK(dist(top) <= dist(nb));
}

TEST_CASE("base-layer search returns the whole component when ef is large") {
    auto db = clustered(150, 13);
    HnswParams params;
    params.M = 6;
    params.ef_construction = 24;
    params.seed = 3;
    HnswGraph graph = build_graph(db, params);
    REQUIRE(layer0_connected(graph));

    std::mt19937_64 rng(17);
    Fingerprint q = random_fingerprint(rng, 1024, 40, 77777);
    auto result = graph.search_layer_base(q, graph.entry_point_id(), db.size() + 10);
    CHECK(result.size() == db.size());

    std::set<std::uint64_t> distinct;
    for (auto& [d, id] : result) distinct.insert(id);
    CHECK(distinct.size() == result.size());
    for (std::size_t i = 1; i < result.size(); ++i)
        CHECK(result[i - 1].first <= result[i].first);
}

TEST_CASE("base-layer search matches the reference interpreter") {
    SynthSpec uniform_spec;
    uniform_spec.n = 800;
    uniform_spec.seed = 20;

    for (auto& db : {clustered(1000, 19), synthesize(uniform_spec)}) {
        HnswParams params;
        params.M = 8;
        params.ef_construction = 48;
        params.seed = 9;
        HnswGraph graph = build_graph(db, params);

        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 12; ++trial) {
            Fingerprint q = trial % 2 == 0
                                ? db[uniform_below(rng, db.size())]
                                : random_fingerprint(rng, 1024, 30 + uniform_below(rng, 40),
                                                     50000 + trial);
            std::size_t ef = trial % 3 == 0 ? 200 : 1 + uniform_below(rng, 64);
            auto expected = reference_search_layer_base(graph, q, graph.entry_point_id(), ef);
            auto got = graph.search_layer_base(q, graph.entry_point_id(), ef);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].second == expected[i].second);
                CHECK(got[i].first == expected[i].first);
            }
        }
    }
}

TEST_CASE("search finds an inserted fingerprint with score 1") {
    auto db = clustered(500, 29);
    HnswParams params;
    params.M = 8;
    params.ef_construction = 40;
    params.seed = 1;
    HnswGraph graph = build_graph(db, params);

    std::mt19937_64 rng(31);
    int found = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const Fingerprint& q = db[uniform_below(rng, db.size())];
        TopKResult result = graph.search(q, 10, 64);
        bool self = false;
        bool all_perfect = result.hits.size() == 10;
        for (const Hit& hit : result.hits) {
            if (hit.id == q.id() && hit.score.exact() == 1.0) self = true;
            all_perfect = all_perfect && hit.score.exact() == 1.0;
        }
        if (self || all_perfect) ++found;
    }
    CHECK(found >= 99);
}

TEST_CASE("exhaustive beam equals brute force on a connected graph") {
    auto db = clustered(400, 37);
    HnswParams params;
    params.M = 8;
    params.ef_construction = 40;
    params.seed = 2;
    HnswGraph graph = build_graph(db, params);
    REQUIRE(layer0_connected(graph));

    std::mt19937_64 rng(41);
    for (int t = 0; t < 5; ++t) {
        Fingerprint q = db[uniform_below(rng, db.size())];
        TopKResult expected = search_bruteforce(db, q, db.size());
        TopKResult got = graph.search(q, db.size(), db.size());
        REQUIRE(got == expected);
    }
}

TEST_CASE("recall is non-decreasing along every (query, ef) ladder") {
    auto db = clustered(2000, 43);
    HnswParams params;
    params.M = 12;
    params.ef_construction = 64;
    params.seed = 4;
    HnswGraph graph = build_graph(db, params);
    std::vector<Fingerprint> queries = sample_queries(db, 25, 6);

    const std::size_t k = 10;
    double final_mean = 0.0;
    for (const Fingerprint& q : queries) {
        TopKResult oracle = search_bruteforce(db, q, k);
        double previous = -1.0;
        for (std::size_t ef : {10u, 20u, 40u, 80u, 160u}) {
            TopKResult got = graph.search(q, k, ef);
            std::size_t matched = 0;
            for (const Hit& expected : oracle.hits)
                for (const Hit& hit : got.hits)
                    if (expected.id == hit.id) ++matched;
            double recall = static_cast<double>(matched) / k;
            CHECK(recall >= previous);
            previous = recall;
        }
        final_mean += previous;
    }
    CHECK(final_mean / static_cast<double>(queries.size()) >= 0.9);
}

TEST_CASE("same seed and insertion order give bit-identical graphs") {
    auto db = clustered(300, 47);
    HnswParams params;
    params.M = 6;
    params.ef_construction = 24;
    params.seed = 12;

    auto serialize = [&] {
        HnswGraph graph = build_graph(db, params);
        graph.freeze();
        std::ostringstream out;
        save_hnsw(out, graph);
        return out.str();
    };
    CHECK(serialize() == serialize());
}

TEST_CASE("search parameter validation") {
    HnswParams params;
    params.M = 4;
    params.ef_construction = 8;
    HnswGraph graph(params);
    std::mt19937_64 rng(53);
    CHECK(graph.search(random_fingerprint(rng, 128, 10, 0), 5, 10).hits.empty());
    graph.insert(random_fingerprint(rng, 128, 12, 1));
    CHECK_THROWS_AS(graph.search(random_fingerprint(rng, 128, 10, 0), 5, 3), ParameterError);
    CHECK_THROWS_AS(graph.search_layer_top(random_fingerprint(rng, 128, 10, 0), 1, 0),
                    ParameterError);
}
