// SPDX-License-Identifier: Apache-2.0
#include "mss/fingerprint.hpp"

#include <bit>
#include <cctype>

namespace mss {

namespace {

std::uint32_t words_for_bits(std::uint32_t length_bits) {
    return (length_bits + 63) / 64;
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

Fingerprint::Fingerprint(std::uint32_t length_bits, std::uint64_t id)
    : id_(id), length_bits_(length_bits), words_(words_for_bits(length_bits), 0) {
    if (length_bits == 0) throw ParameterError("fingerprint length must be positive");
}

Fingerprint Fingerprint::from_positions(std::uint32_t length_bits,
                                        std::span<const std::uint32_t> positions,
                                        std::uint64_t id) {
    Fingerprint fp(length_bits, id);
    for (std::uint32_t pos : positions) fp.set_bit(pos);
    return fp;
}

Fingerprint Fingerprint::from_hex(std::string_view hex, std::uint64_t id) {
    if (hex.empty() || hex.size() % 2 != 0)
        throw ParseError("hex fingerprint must have a positive, even number of characters");
    Fingerprint fp(static_cast<std::uint32_t>(hex.size() * 4), id);
    for (std::size_t byte = 0; byte < hex.size() / 2; ++byte) {
        int hi = hex_nibble(hex[2 * byte]);
        int lo = hex_nibble(hex[2 * byte + 1]);
        if (hi < 0 || lo < 0) throw ParseError("invalid hex character in fingerprint");
        std::uint64_t value = static_cast<std::uint64_t>((hi << 4) | lo);
        fp.words_[byte / 8] |= value << (8 * (byte % 8));
    }
    fp.bit_count_ = 0;
    for (std::uint64_t w : fp.words_) fp.bit_count_ += std::popcount(w);
    return fp;
}

Fingerprint Fingerprint::from_words(std::uint32_t length_bits, std::vector<std::uint64_t> words,
                                    std::uint64_t id) {
    if (length_bits == 0) throw ParameterError("fingerprint length must be positive");
    if (words.size() != words_for_bits(length_bits))
        throw DimensionError("word count does not match fingerprint length");
    if (length_bits % 64 != 0) {
        std::uint64_t mask = (std::uint64_t{1} << (length_bits % 64)) - 1;
        if ((words.back() & ~mask) != 0)
            throw ParameterError("bits set beyond fingerprint length");
    }
    Fingerprint fp;
    fp.id_ = id;
    fp.length_bits_ = length_bits;
    fp.words_ = std::move(words);
    for (std::uint64_t w : fp.words_) fp.bit_count_ += std::popcount(w);
    return fp;
}

void Fingerprint::set_bit(std::uint32_t index) {
    if (index >= length_bits_) throw ParameterError("bit index out of range");
    std::uint64_t mask = std::uint64_t{1} << (index % 64);
    std::uint64_t& word = words_[index / 64];
    if ((word & mask) == 0) {
        word |= mask;
        ++bit_count_;
    }
}

bool Fingerprint::test_bit(std::uint32_t index) const {
    if (index >= length_bits_) throw ParameterError("bit index out of range");
    return (words_[index / 64] >> (index % 64)) & 1;
}

std::string Fingerprint::to_hex() const {
    static const char digits[] = "0123456789abcdef";
    std::size_t bytes = (length_bits_ + 7) / 8;
    std::string out(bytes * 2, '0');
    for (std::size_t byte = 0; byte < bytes; ++byte) {
        auto value = static_cast<std::uint8_t>(words_[byte / 8] >> (8 * (byte % 8)));
        out[2 * byte] = digits[value >> 4];
        out[2 * byte + 1] = digits[value & 0xF];
    }
    return out;
}

int compare_scores(const TanimotoScore& a, const TanimotoScore& b) {
    // Normalize the empty-union convention to 0/1 so cross-multiplication
    // stays valid.
    std::uint64_t ai = a.union_count == 0 ? 0 : a.intersection_count;
    std::uint64_t au = a.union_count == 0 ? 1 : a.union_count;
    std::uint64_t bi = b.union_count == 0 ? 0 : b.intersection_count;
    std::uint64_t bu = b.union_count == 0 ? 1 : b.union_count;
    std::uint64_t lhs = ai * bu;
    std::uint64_t rhs = bi * au;
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
}

std::uint32_t popcount(const Fingerprint& fp) {
    std::uint32_t total = 0;
    for (std::uint64_t w : fp.words()) total += std::popcount(w);
    return total;
}

TanimotoScore tanimoto(const Fingerprint& a, const Fingerprint& b) {
    if (a.length() != b.length())
        throw DimensionError("tanimoto requires equal fingerprint lengths");
    std::uint32_t inter = 0;
    std::uint32_t uni = 0;
    auto wa = a.words();
    auto wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i) {
        inter += std::popcount(wa[i] & wb[i]);
        uni += std::popcount(wa[i] | wb[i]);
    }
    return TanimotoScore{inter, uni};
}

Fingerprint fold(const Fingerprint& fp, const FoldSpec& spec) {
    std::uint32_t length = fp.length();
    std::uint32_t m = spec.m;
    if (m == 0 || (m & (m - 1)) != 0)
        throw ParameterError("folding level must be a power of two");
    if (length % m != 0)
        throw ParameterError("folding level must divide the fingerprint length");
    std::uint32_t folded_len = length / m;
    if (m == 1) {
        Fingerprint copy = fp;
        return copy;
    }

    auto words = fp.words();
    Fingerprint out(folded_len, fp.id());
    std::vector<std::uint64_t> folded((folded_len + 63) / 64, 0);

    if (spec.scheme == FoldScheme::Sectioned && folded_len % 64 == 0) {
        // Sections are word-aligned: OR the m word blocks together.
        std::uint32_t section_words = folded_len / 64;
        for (std::uint32_t s = 0; s < m; ++s)
            for (std::uint32_t w = 0; w < section_words; ++w)
                folded[w] |= words[s * section_words + w];
    } else if (spec.scheme == FoldScheme::Sectioned) {
        for (std::uint32_t j = 0; j < folded_len; ++j) {
            bool set = false;
            for (std::uint32_t s = 0; s < m && !set; ++s) {
                std::uint32_t src = s * folded_len + j;
                set = (words[src / 64] >> (src % 64)) & 1;
            }
            if (set) folded[j / 64] |= std::uint64_t{1} << (j % 64);
        }
    } else {
        for (std::uint32_t j = 0; j < folded_len; ++j) {
            bool set = false;
            for (std::uint32_t b = 0; b < m && !set; ++b) {
                std::uint32_t src = j * m + b;
                set = (words[src / 64] >> (src % 64)) & 1;
            }
            if (set) folded[j / 64] |= std::uint64_t{1} << (j % 64);
        }
    }
    return Fingerprint::from_words(folded_len, std::move(folded), fp.id());
}

Fingerprint fingerprint_or(const Fingerprint& a, const Fingerprint& b) {
    if (a.length() != b.length())
        throw DimensionError("bitwise OR requires equal fingerprint lengths");
    std::vector<std::uint64_t> words(a.words().begin(), a.words().end());
    auto wb = b.words();
    for (std::size_t i = 0; i < words.size(); ++i) words[i] |= wb[i];
    return Fingerprint::from_words(a.length(), std::move(words), a.id());
}

const char* fold_scheme_name(FoldScheme scheme) {
    return scheme == FoldScheme::Sectioned ? "sectioned" : "adjacent";
}

FoldScheme fold_scheme_from_name(std::string_view name) {
    if (name == "sectioned") return FoldScheme::Sectioned;
    if (name == "adjacent") return FoldScheme::Adjacent;
    throw ParameterError("unknown fold scheme: " + std::string(name));
}

} // namespace mss
