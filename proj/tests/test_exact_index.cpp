// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "mss/exact_index.hpp"
#include "mss/synth.hpp"
#include "test_util.hpp"

using namespace mss;
using mss::test::random_db;
using mss::test::random_fingerprint;
using mss::test::uniform_below;

namespace {

// Full-sort oracle: score everything, sort under the global hit order,
// optionally filter, truncate.
TopKResult oracle_topk(std::span<const Fingerprint> db, const Fingerprint& query,
                       std::size_t k, std::optional<double> cutoff = std::nullopt) {
    std::vector<Hit> hits;
    for (const Fingerprint& fp : db) {
        TanimotoScore score = tanimoto(query, fp);
        if (cutoff && score.exact() < *cutoff) continue;
        hits.push_back(Hit{score, fp.id()});
    }
    std::sort(hits.begin(), hits.end(), better_hit);
    if (hits.size() > k) hits.resize(k);
    return TopKResult{std::move(hits)};
}

} // namespace

TEST_CASE("prune_range arithmetic") {
    PruneRange r = prune_range(50, 0.8);
    CHECK(r.lo == 40);
    CHECK(r.hi == 62);

    PruneRange exact = prune_range(37, 1.0);
    CHECK(exact.lo == 37);
    CHECK(exact.hi == 37);

    PruneRange zero = prune_range(0, 0.5);
    CHECK(zero.lo == 0);
    CHECK(zero.hi == 0);

    CHECK_THROWS_AS(prune_range(10, 0.0), ParameterError);
    CHECK_THROWS_AS(prune_range(10, 1.5), ParameterError);
    CHECK_THROWS_AS(prune_range(10, -0.2), ParameterError);
}

TEST_CASE("build on empty database") {
    BitBoundIndex idx = BitBoundIndex::build({});
    CHECK(idx.empty());
    for (std::uint64_t offset : idx.bucket_offsets()) CHECK(offset == 0);
}

TEST_CASE("build sorts by bit count") {
    std::mt19937_64 rng(5);
    std::vector<Fingerprint> db;
    db.push_back(random_fingerprint(rng, 128, 5, 0));
    db.push_back(random_fingerprint(rng, 128, 2, 1));
    db.push_back(random_fingerprint(rng, 128, 9, 2));
    BitBoundIndex idx = BitBoundIndex::build(db);
    REQUIRE(idx.size() == 3);
    CHECK(idx.entries()[0].bit_count() == 2);
    CHECK(idx.entries()[1].bit_count() == 5);
    CHECK(idx.entries()[2].bit_count() == 9);
}

TEST_CASE("build rejects duplicates and mixed lengths") {
    std::mt19937_64 rng(6);
    std::vector<Fingerprint> dup;
    dup.push_back(random_fingerprint(rng, 128, 4, 7));
    dup.push_back(random_fingerprint(rng, 128, 6, 7));
    CHECK_THROWS_AS(BitBoundIndex::build(dup), BuildError);

    std::vector<Fingerprint> mixed;
    mixed.push_back(Fingerprint(128, 0));
    mixed.push_back(Fingerprint(192, 1));
    CHECK_THROWS_AS(BitBoundIndex::build(mixed), DimensionError);
}

TEST_CASE("bucket offsets equal the bit-count histogram") {
    std::mt19937_64 rng(42);
    auto db = random_db(rng, 1000, 256, 0, 256);
    BitBoundIndex idx = BitBoundIndex::build(db);

    std::vector<std::uint64_t> histogram(257, 0);
    for (const Fingerprint& fp : db) ++histogram[fp.bit_count()];

    const auto& offsets = idx.bucket_offsets();
    REQUIRE(offsets.size() == 258);
    CHECK(offsets[0] == 0);
    CHECK(offsets[257] == 1000);
    for (std::uint32_t c = 0; c <= 256; ++c) CHECK(offsets[c + 1] - offsets[c] == histogram[c]);
}

TEST_CASE("brute force finds the query itself first") {
    std::mt19937_64 rng(9);
    auto db = random_db(rng, 200, 256, 10, 120);
    const Fingerprint& q = db[57];
    TopKResult result = search_bruteforce(db, q, 5);
    REQUIRE(!result.hits.empty());
    CHECK(result.hits[0].id == 57);
    CHECK(result.hits[0].score.exact() == 1.0);
}

TEST_CASE("brute force with k >= db returns a full sort") {
    std::mt19937_64 rng(10);
    auto db = random_db(rng, 50, 128, 0, 128);
    Fingerprint q = random_fingerprint(rng, 128, 30, 999);
    TopKResult result = search_bruteforce(db, q, 100);
    CHECK(result.hits.size() == 50);
    CHECK(result == oracle_topk(db, q, 100));
}

TEST_CASE("brute force equals the full-sort oracle") {
    std::mt19937_64 rng(11);
    auto db = random_db(rng, 1000, 256, 0, 200);
    for (int trial = 0; trial < 20; ++trial) {
        Fingerprint q =
            random_fingerprint(rng, 256, 1 + uniform_below(rng, 200), 10000 + trial);
        CHECK(search_bruteforce(db, q, 20) == oracle_topk(db, q, 20));
    }
}

TEST_CASE("k_r1 formula reproduces the folding table column") {
    CHECK(two_stage_k_r1(1, 1) == 1);
    CHECK(two_stage_k_r1(1, 2) == 4);
    CHECK(two_stage_k_r1(1, 4) == 12);
    CHECK(two_stage_k_r1(1, 8) == 32);
    CHECK(two_stage_k_r1(1, 16) == 80);
    CHECK(two_stage_k_r1(1, 32) == 192);
    CHECK(two_stage_k_r1(20, 4) == 240);
    CHECK(two_stage_k_r1(20, 8) == 640);
    CHECK_THROWS_AS(two_stage_k_r1(10, 3), ParameterError);
}

TEST_CASE("bitbound with cutoff 1.0 returns only identical supports") {
    std::mt19937_64 rng(12);
    auto db = random_db(rng, 300, 128, 5, 60);
    // Plant an exact twin of db[4] under a fresh id.
    std::vector<std::uint64_t> words(db[4].words().begin(), db[4].words().end());
    db.push_back(Fingerprint::from_words(128, std::move(words), 9999));

    BitBoundIndex idx = BitBoundIndex::build(db);
    TopKResult result = search_bitbound(idx, db[4], 10, 1.0);
    REQUIRE(result.hits.size() >= 2);
    for (const Hit& hit : result.hits) CHECK(hit.score.exact() == 1.0);
    CHECK(result.hits[0].id == 4);
    CHECK(result.hits[1].id == 9999);
}

TEST_CASE("bitbound returns empty when nothing meets the cutoff") {
    std::vector<Fingerprint> db;
    db.push_back(Fingerprint::from_positions(128, std::array<std::uint32_t, 1>{0}, 0));
    db.push_back(Fingerprint::from_positions(128, std::array<std::uint32_t, 1>{1}, 1));
    BitBoundIndex idx = BitBoundIndex::build(db);
    Fingerprint q = Fingerprint::from_positions(128, std::array<std::uint32_t, 1>{64}, 5);
    TopKResult result = search_bitbound(idx, q, 10, 0.9);
    CHECK(result.hits.empty());
}

TEST_CASE("bitbound equals filtered brute force on randomized trials") {
    std::mt19937_64 rng(1234);
    auto db = random_db(rng, 2000, 256, 0, 180);
    BitBoundIndex idx = BitBoundIndex::build(db);
    const double cutoffs[] = {0.3, 0.5, 0.8, 0.95, 1.0};
    for (int trial = 0; trial < 200; ++trial) {
        Fingerprint q =
            random_fingerprint(rng, 256, uniform_below(rng, 181), 50000 + trial);
        double cutoff = cutoffs[trial % 5];
        std::size_t k = 1 + uniform_below(rng, 64);
        TopKResult expected = oracle_topk(db, q, k, cutoff);
        TopKResult actual = search_bitbound(idx, q, k, cutoff);
        REQUIRE(actual == expected);
    }
}

TEST_CASE("pruning soundness: entries outside the band score below the cutoff") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 2000; ++trial) {
        auto ca = 1 + static_cast<std::uint32_t>(uniform_below(rng, 128));
        auto cb = 1 + static_cast<std::uint32_t>(uniform_below(rng, 128));
        Fingerprint a = random_fingerprint(rng, 128, ca, 0);
        Fingerprint b = random_fingerprint(rng, 128, cb, 1);
        double cutoff = 0.25 + 0.7 * (trial % 10) / 10.0;
        PruneRange range = prune_range(ca, cutoff);
        if (cb < range.lo || cb > range.hi)
            REQUIRE(tanimoto(a, b).exact() < cutoff);
    }
}

TEST_CASE("two-stage with m=1 equals bitbound exactly") {
    std::mt19937_64 rng(21);
    auto db = random_db(rng, 500, 256, 5, 150);
    BitBoundIndex folded = BitBoundIndex::build(db, FoldSpec{FoldScheme::Sectioned, 1});
    BitBoundIndex plain = BitBoundIndex::build(db);
    for (int trial = 0; trial < 20; ++trial) {
        Fingerprint q = random_fingerprint(rng, 256, 5 + uniform_below(rng, 140), 7000 + trial);
        double cutoff = trial % 2 == 0 ? 0.3 : 0.6;
        CHECK(search_two_stage(folded, q, 10, cutoff) ==
              search_bitbound(plain, q, 10, cutoff));
    }
}

TEST_CASE("two-stage requires a folded index") {
    std::mt19937_64 rng(22);
    auto db = random_db(rng, 10, 128, 1, 60);
    BitBoundIndex idx = BitBoundIndex::build(db);
    Fingerprint q = random_fingerprint(rng, 128, 30, 100);
    CHECK_THROWS_AS(search_two_stage(idx, q, 5, 0.5), StateError);
}

TEST_CASE("two-stage result is a subset of the cutoff-filtered oracle ranking") {
    std::mt19937_64 rng(23);
    auto db = random_db(rng, 2000, 512, 20, 120);
    BitBoundIndex idx = BitBoundIndex::build(db, FoldSpec{FoldScheme::Sectioned, 4});
    for (int trial = 0; trial < 10; ++trial) {
        const Fingerprint& q = db[uniform_below(rng, db.size())];
        TopKResult result = search_two_stage(idx, q, 10, 0.4);
        TopKResult oracle = oracle_topk(db, q, db.size(), 0.4);
        // Every returned hit must appear in the oracle with the same score.
        for (const Hit& hit : result.hits) {
            auto it = std::find_if(oracle.hits.begin(), oracle.hits.end(),
                                   [&](const Hit& h) { return h.id == hit.id; });
            REQUIRE(it != oracle.hits.end());
            CHECK(compare_scores(it->score, hit.score) == 0);
        }
        // Self-match always survives both stages.
        REQUIRE(!result.hits.empty());
        CHECK(result.hits[0].id == q.id());
    }
}

TEST_CASE("two-stage recall stays high and sectioned beats adjacent on clustered data") {
    // Near-neighbor structure is what folding preserves; see synth.hpp for
    // why position-uniform data cannot exercise this.
    ClusteredSynthSpec spec;
    spec.n = 3000;
    spec.seed = 24;
    auto db = synthesize_clustered(spec);
    std::mt19937_64 rng(25);
    std::size_t k = 10;
    int queries = 40;

    auto recall_for = [&](FoldScheme scheme, std::uint32_t m) {
        BitBoundIndex idx = BitBoundIndex::build(db, FoldSpec{scheme, m});
        std::mt19937_64 qrng(77);
        double total = 0.0;
        for (int trial = 0; trial < queries; ++trial) {
            const Fingerprint& q = db[uniform_below(qrng, db.size())];
            TopKResult oracle = oracle_topk(db, q, k);
            TopKResult approx = search_two_stage_topk(idx, q, k);
            std::size_t matched = 0;
            for (const Hit& hit : oracle.hits)
                for (const Hit& got : approx.hits)
                    if (hit.id == got.id) ++matched;
            total += static_cast<double>(matched) / k;
        }
        return total / queries;
    };

    CHECK(recall_for(FoldScheme::Sectioned, 2) >= 0.95);
    CHECK(recall_for(FoldScheme::Sectioned, 4) >= 0.95);
    double sectioned16 = recall_for(FoldScheme::Sectioned, 16);
    double adjacent16 = recall_for(FoldScheme::Adjacent, 16);
    CHECK(sectioned16 >= adjacent16);
    (void)rng;
}

#ifdef _OPENMP
TEST_CASE("parallel scans match the serial reference bit for bit") {
    std::mt19937_64 rng(25);
    auto db = random_db(rng, 6000, 256, 0, 160);
    BitBoundIndex plain = BitBoundIndex::build(db);
    BitBoundIndex folded = BitBoundIndex::build(db, FoldSpec{FoldScheme::Adjacent, 4});
    for (int trial = 0; trial < 10; ++trial) {
        Fingerprint q = random_fingerprint(rng, 256, 10 + uniform_below(rng, 120), 90000 + trial);
        CHECK(search_bruteforce(db, q, 25, Exec::Parallel) ==
              search_bruteforce(db, q, 25, Exec::Serial));
        CHECK(search_bitbound(plain, q, 25, 0.4, Exec::Parallel) ==
              search_bitbound(plain, q, 25, 0.4, Exec::Serial));
        CHECK(search_two_stage(folded, q, 25, 0.4, Exec::Parallel) ==
              search_two_stage(folded, q, 25, 0.4, Exec::Serial));
        CHECK(search_two_stage_topk(folded, q, 25, Exec::Parallel) ==
              search_two_stage_topk(folded, q, 25, Exec::Serial));
    }
}
#endif
