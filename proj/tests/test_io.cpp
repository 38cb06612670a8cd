// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mss/io.hpp"
#include "mss/synth.hpp"
#include "test_util.hpp"

using namespace mss;

namespace {

std::vector<Fingerprint> parse(const std::string& text) {
    std::istringstream in(text);
    return read_fingerprints(in);
}

} // namespace

TEST_CASE("ingest a single 1024-bit record") {
    std::string line(256, '0');
    line[0] = 'f';
    line[1] = 'f';
    auto db = parse(line + "\n");
    REQUIRE(db.size() == 1);
    CHECK(db[0].length() == 1024);
    CHECK(db[0].id() == 0);
    // "ff..." packs into byte 0: bits 0-7 set.
    CHECK(db[0].bit_count() == 8);
    for (std::uint32_t i = 0; i < 8; ++i) CHECK(db[0].test_bit(i));
    CHECK_FALSE(db[0].test_bit(8));
}

TEST_CASE("ingest honors explicit ids, comments, and blank lines") {
    std::string a(16, '0'), b(16, '1');
    auto db = parse("# comment\n\n" + a + "\t42\n" + b + "\t7\n");
    REQUIRE(db.size() == 2);
    CHECK(db[0].id() == 42);
    CHECK(db[1].id() == 7);
    CHECK(db[0].length() == 64);
}

TEST_CASE("ingest errors carry line numbers") {
    std::string good(16, '0');
    CHECK_THROWS_WITH_AS(parse(good + "\n" + std::string(15, '0') + "\n"),
                         doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_WITH_AS(parse("zz" + std::string(14, '0') + "\n"),
                         doctest::Contains("line 1"), ParseError);
    CHECK_THROWS_WITH_AS(parse(good + "\t5\n" + good + "\t5\n"),
                         doctest::Contains("duplicate id"), ParseError);
    CHECK_THROWS_WITH_AS(parse(good + "\n" + std::string(32, '0') + "\n"),
                         doctest::Contains("length differs"), ParseError);
    CHECK_THROWS_WITH_AS(parse(good + "\tx\n"), doctest::Contains("non-negative integer"),
                         ParseError);
}

TEST_CASE("empty input gives an empty database") {
    CHECK(parse("").empty());
    CHECK(parse("# only a comment\n").empty());
}

TEST_CASE("fingerprint text round trip") {
    SynthSpec spec;
    spec.n = 200;
    spec.length_bits = 256;
    spec.mu = 30;
    spec.sigma = 8;
    spec.seed = 3;
    auto db = synthesize(spec);

    std::ostringstream out;
    write_fingerprints(out, db);
    auto back = parse(out.str());
    REQUIRE(back.size() == db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
        CHECK(back[i].id() == db[i].id());
        CHECK(back[i].same_bits(db[i]));
    }
}

TEST_CASE("bitbound index round trip") {
    SynthSpec spec;
    spec.n = 500;
    spec.seed = 4;
    auto db = synthesize(spec);

    for (std::optional<FoldSpec> fold_spec :
         {std::optional<FoldSpec>{}, std::optional<FoldSpec>{FoldSpec{FoldScheme::Adjacent, 4}}}) {
        BitBoundIndex index = BitBoundIndex::build(db, fold_spec);
        std::ostringstream out;
        save_bitbound(out, index);
        std::istringstream in(out.str());
        BitBoundIndex loaded = load_bitbound(in);

        CHECK(loaded.size() == index.size());
        CHECK(loaded.length_bits() == index.length_bits());
        CHECK(loaded.has_fold() == index.has_fold());
        CHECK(loaded.bucket_offsets() == index.bucket_offsets());
        for (std::size_t i = 0; i < index.size(); ++i) {
            CHECK(loaded.entries()[i].id() == index.entries()[i].id());
            CHECK(loaded.entries()[i].same_bits(index.entries()[i]));
        }

        // Loaded index answers queries identically.
        std::mt19937_64 rng(5);
        Fingerprint q = mss::test::random_fingerprint(rng, 1024, 45, 999999);
        if (fold_spec) {
            CHECK(search_two_stage(loaded, q, 10, 0.3) == search_two_stage(index, q, 10, 0.3));
        } else {
            CHECK(search_bitbound(loaded, q, 10, 0.3) == search_bitbound(index, q, 10, 0.3));
        }

        // Serialization is deterministic.
        std::ostringstream again;
        save_bitbound(again, loaded);
        CHECK(again.str() == out.str());
    }
}

TEST_CASE("bitbound load rejects corrupted input") {
    std::istringstream bad_magic("XXXX....");
    CHECK_THROWS_AS(load_bitbound(bad_magic), ParseError);

    SynthSpec spec;
    spec.n = 10;
    spec.seed = 6;
    BitBoundIndex index = BitBoundIndex::build(synthesize(spec));
    std::ostringstream out;
    save_bitbound(out, index);
    std::string truncated = out.str().substr(0, out.str().size() / 2);
    std::istringstream in(truncated);
    CHECK_THROWS_AS(load_bitbound(in), ParseError);
}

TEST_CASE("hnsw graph round trip preserves search behavior") {
    ClusteredSynthSpec spec;
    spec.n = 400;
    spec.seed = 7;
    auto db = synthesize_clustered(spec);

    HnswParams params;
    params.M = 6;
    params.ef_construction = 24;
    params.seed = 2;
    HnswGraph graph(params);
    for (const Fingerprint& fp : db) graph.insert(fp);
    graph.freeze();

    std::ostringstream out;
    save_hnsw(out, graph);
    std::istringstream in(out.str());
    HnswGraph loaded = load_hnsw(in);

    CHECK(loaded.size() == graph.size());
    CHECK(loaded.max_level() == graph.max_level());
    CHECK(loaded.entry_point_id() == graph.entry_point_id());
    CHECK(loaded.params().M == params.M);
    CHECK(loaded.frozen());

    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        const Fingerprint& q = db[mss::test::uniform_below(rng, db.size())];
        CHECK(loaded.search(q, 5, 32) == graph.search(q, 5, 32));
    }

    std::ostringstream again;
    save_hnsw(again, loaded);
    CHECK(again.str() == out.str());
}
