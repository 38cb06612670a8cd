// SPDX-License-Identifier: Apache-2.0
#include "mss/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace mss {

namespace {

constexpr std::uint16_t kFormatVersion = 1;

void put_bytes(std::ostream& out, const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

template <typename T>
void put_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    put_bytes(out, bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw ParseError("unexpected end of index file");
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return static_cast<T>(value);
}

void put_words(std::ostream& out, std::span<const std::uint64_t> words) {
    for (std::uint64_t w : words) put_le(out, w);
}

std::vector<std::uint64_t> get_words(std::istream& in, std::size_t count) {
    std::vector<std::uint64_t> words(count);
    for (std::size_t i = 0; i < count; ++i) words[i] = get_le<std::uint64_t>(in);
    return words;
}

void expect_magic(std::istream& in, const char (&magic)[5]) {
    char got[4];
    in.read(got, 4);
    if (!in || std::memcmp(got, magic, 4) != 0)
        throw ParseError(std::string("bad magic, expected ") + magic);
    auto version = get_le<std::uint16_t>(in);
    if (version != kFormatVersion)
        throw ParseError("unsupported format version " + std::to_string(version));
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open for reading: " + path);
    return in;
}

} // namespace

std::vector<Fingerprint> read_fingerprints(std::istream& in) {
    std::vector<Fingerprint> db;
    std::unordered_set<std::uint64_t> explicit_ids;
    std::string line;
    std::size_t line_number = 0;
    std::uint32_t length_bits = 0;

    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;

        std::string_view view(line);
        view.remove_prefix(start);
        std::size_t tab = view.find('\t');
        std::string_view hex = tab == std::string_view::npos ? view : view.substr(0, tab);
        std::uint64_t id = db.size();
        bool has_explicit_id = false;
        if (tab != std::string_view::npos) {
            std::string_view id_text = view.substr(tab + 1);
            if (id_text.empty()) throw ParseError("line " + std::to_string(line_number) +
                                                  ": empty id column");
            std::uint64_t parsed = 0;
            for (char c : id_text) {
                if (c < '0' || c > '9')
                    throw ParseError("line " + std::to_string(line_number) +
                                     ": id must be a non-negative integer");
                parsed = parsed * 10 + static_cast<std::uint64_t>(c - '0');
            }
            id = parsed;
            has_explicit_id = true;
        }

        if (hex.size() % 16 != 0)
            throw ParseError("line " + std::to_string(line_number) +
                             ": hex length must be a multiple of 16 (L a multiple of 64)");
        Fingerprint fp;
        try {
            fp = Fingerprint::from_hex(hex, id);
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_number) + ": " + e.what());
        }
        if (length_bits == 0)
            length_bits = fp.length();
        else if (fp.length() != length_bits)
            throw ParseError("line " + std::to_string(line_number) +
                             ": fingerprint length differs from the first record");
        if (has_explicit_id && !explicit_ids.insert(id).second)
            throw ParseError("line " + std::to_string(line_number) + ": duplicate id " +
                             std::to_string(id));
        db.push_back(std::move(fp));
    }
    return db;
}

std::vector<Fingerprint> read_fingerprints_file(const std::string& path) {
    auto in = open_in(path);
    return read_fingerprints(in);
}

void write_fingerprints(std::ostream& out, std::span<const Fingerprint> db) {
    for (const Fingerprint& fp : db) out << fp.to_hex() << '\t' << fp.id() << '\n';
}

void write_fingerprints_file(const std::string& path, std::span<const Fingerprint> db) {
    auto out = open_out(path);
    write_fingerprints(out, db);
}

void save_bitbound(std::ostream& out, const BitBoundIndex& index) {
    put_bytes(out, "MSKB", 4);
    put_le(out, kFormatVersion);
    put_le(out, index.length_bits());
    std::uint32_t fold_m = index.has_fold() ? index.fold_spec()->m : 0;
    put_le(out, fold_m);
    std::uint8_t scheme =
        index.has_fold() ? static_cast<std::uint8_t>(index.fold_spec()->scheme) : 0;
    put_le(out, scheme);
    put_le(out, static_cast<std::uint64_t>(index.size()));
    for (const Fingerprint& fp : index.entries()) {
        put_le(out, fp.id());
        put_le(out, static_cast<std::uint16_t>(fp.bit_count()));
        put_words(out, fp.words());
    }
    if (index.has_fold())
        for (const Fingerprint& fp : index.folded_entries()) put_words(out, fp.words());
}

BitBoundIndex load_bitbound(std::istream& in) {
    expect_magic(in, "MSKB");
    auto length_bits = get_le<std::uint32_t>(in);
    auto fold_m = get_le<std::uint32_t>(in);
    auto scheme = get_le<std::uint8_t>(in);
    auto count = get_le<std::uint64_t>(in);
    if (length_bits == 0 || length_bits % 64 != 0)
        throw ParseError("index fingerprint length must be a positive multiple of 64");
    if (scheme > 1) throw ParseError("unknown fold scheme tag");

    std::size_t words_per_entry = length_bits / 64;
    std::vector<Fingerprint> db;
    db.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto id = get_le<std::uint64_t>(in);
        auto stored_count = get_le<std::uint16_t>(in);
        Fingerprint fp =
            Fingerprint::from_words(length_bits, get_words(in, words_per_entry), id);
        if (fp.bit_count() != stored_count)
            throw ParseError("stored bit count does not match entry words");
        db.push_back(std::move(fp));
    }

    std::optional<FoldSpec> spec;
    if (fold_m > 0) spec = FoldSpec{static_cast<FoldScheme>(scheme), fold_m};
    BitBoundIndex index = BitBoundIndex::build(db, spec);

    if (fold_m > 0) {
        // The folded block is reproducible from the entries; read it and
        // verify instead of trusting it blindly.
        std::size_t folded_words = (length_bits / fold_m + 63) / 64;
        for (std::uint64_t i = 0; i < count; ++i) {
            auto words = get_words(in, folded_words);
            const Fingerprint& expected = index.folded_entries()[i];
            if (!std::equal(words.begin(), words.end(), expected.words().begin(),
                            expected.words().end()))
                throw ParseError("folded block does not match the entries");
        }
    }
    return index;
}

void save_bitbound_file(const std::string& path, const BitBoundIndex& index) {
    auto out = open_out(path);
    save_bitbound(out, index);
}

BitBoundIndex load_bitbound_file(const std::string& path) {
    auto in = open_in(path);
    return load_bitbound(in);
}

void save_hnsw(std::ostream& out, const HnswGraph& graph) {
    put_bytes(out, "MSKH", 4);
    put_le(out, kFormatVersion);
    const HnswParams& p = graph.params();
    put_le(out, p.M);
    put_le(out, p.ef_construction);
    put_le(out, p.ef_search);
    std::uint64_t scale_bits;
    double scale = p.effective_level_scale();
    std::memcpy(&scale_bits, &scale, sizeof(scale));
    put_le(out, scale_bits);
    put_le(out, p.seed);

    std::uint32_t length_bits = graph.empty() ? 0 : graph.fingerprints().front().length();
    put_le(out, length_bits);
    put_le(out, static_cast<std::uint64_t>(graph.size()));
    put_le(out, graph.entry_slot());

    for (std::size_t slot = 0; slot < graph.size(); ++slot) {
        const Fingerprint& fp = graph.fingerprints()[slot];
        put_le(out, fp.id());
        put_le(out, graph.levels()[slot]);
        put_words(out, fp.words());
    }
    // Per-node adjacency as CSR rows: layer count, then per layer the
    // neighbor count and slots.
    for (std::size_t slot = 0; slot < graph.size(); ++slot) {
        const auto& layers = graph.links()[slot];
        put_le(out, static_cast<std::uint32_t>(layers.size()));
        for (const auto& row : layers) {
            put_le(out, static_cast<std::uint32_t>(row.size()));
            for (std::uint32_t nb : row) put_le(out, nb);
        }
    }
}

HnswGraph load_hnsw(std::istream& in) {
    expect_magic(in, "MSKH");
    HnswParams params;
    params.M = get_le<std::uint32_t>(in);
    params.ef_construction = get_le<std::uint32_t>(in);
    params.ef_search = get_le<std::uint32_t>(in);
    auto scale_bits = get_le<std::uint64_t>(in);
    std::memcpy(&params.level_scale, &scale_bits, sizeof(params.level_scale));
    params.seed = get_le<std::uint64_t>(in);

    auto length_bits = get_le<std::uint32_t>(in);
    auto count = get_le<std::uint64_t>(in);
    auto entry_slot = get_le<std::uint32_t>(in);
    if (count > 0 && (length_bits == 0 || length_bits % 64 != 0))
        throw ParseError("graph fingerprint length must be a positive multiple of 64");

    std::size_t words_per_entry = length_bits / 64;
    std::vector<Fingerprint> fingerprints;
    std::vector<std::uint32_t> levels;
    fingerprints.reserve(count);
    levels.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto id = get_le<std::uint64_t>(in);
        auto level = get_le<std::uint32_t>(in);
        fingerprints.push_back(
            Fingerprint::from_words(length_bits, get_words(in, words_per_entry), id));
        levels.push_back(level);
    }

    std::vector<std::vector<std::vector<std::uint32_t>>> links(count);
    for (std::uint64_t slot = 0; slot < count; ++slot) {
        auto layer_count = get_le<std::uint32_t>(in);
        links[slot].resize(layer_count);
        for (std::uint32_t layer = 0; layer < layer_count; ++layer) {
            auto n = get_le<std::uint32_t>(in);
            links[slot][layer].resize(n);
            for (std::uint32_t j = 0; j < n; ++j) {
                auto nb = get_le<std::uint32_t>(in);
                if (nb >= count) throw ParseError("neighbor slot out of range");
                links[slot][layer][j] = nb;
            }
        }
    }
    return HnswGraph::from_parts(params, std::move(fingerprints), std::move(levels),
                                 std::move(links), entry_slot);
}

void save_hnsw_file(const std::string& path, const HnswGraph& graph) {
    auto out = open_out(path);
    save_hnsw(out, graph);
}

HnswGraph load_hnsw_file(const std::string& path) {
    auto in = open_in(path);
    return load_hnsw(in);
}

} // namespace mss
