// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mss/error.hpp"

namespace mss {

/// Fixed-width binary fingerprint with a cached set-bit count.
///
/// Bit order: bit index 0 is the least significant bit of the first storage
/// word, so bits [0, 8) live in byte 0, bits [8, 16) in byte 1, and so on.
/// Hex ingestion maps the first hex character to the high nibble of byte 0.
///
/// Database fingerprints are restricted to lengths that are multiples of 64
/// (enforced at ingestion); folded fingerprints may be shorter.
class Fingerprint {
public:
    Fingerprint() = default;

    /// All-zero fingerprint of `length_bits` bits.
    explicit Fingerprint(std::uint32_t length_bits, std::uint64_t id = 0);

    /// Fingerprint with the given bit positions set.
    static Fingerprint from_positions(std::uint32_t length_bits,
                                      std::span<const std::uint32_t> positions,
                                      std::uint64_t id = 0);

    /// Parse a hex string; length is 4 bits per character. The string must
    /// have even length (whole bytes).
    static Fingerprint from_hex(std::string_view hex, std::uint64_t id = 0);

    /// Adopt pre-packed words. Bits at or above `length_bits` must be zero.
    static Fingerprint from_words(std::uint32_t length_bits, std::vector<std::uint64_t> words,
                                  std::uint64_t id = 0);

    std::uint64_t id() const { return id_; }
    void set_id(std::uint64_t id) { id_ = id; }
    std::uint32_t length() const { return length_bits_; }
    std::uint32_t bit_count() const { return bit_count_; }
    std::span<const std::uint64_t> words() const { return words_; }
    std::size_t word_count() const { return words_.size(); }

    void set_bit(std::uint32_t index);
    bool test_bit(std::uint32_t index) const;

    std::string to_hex() const;

    bool same_bits(const Fingerprint& other) const {
        return length_bits_ == other.length_bits_ && words_ == other.words_;
    }

private:
    std::uint64_t id_ = 0;
    std::uint32_t length_bits_ = 0;
    std::uint32_t bit_count_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Exact Tanimoto score as an integer rational plus its 12-bit fixed-point
/// quantization. The zero-union case scores 0 by convention.
struct TanimotoScore {
    std::uint32_t intersection_count = 0;
    std::uint32_t union_count = 0;

    double exact() const {
        return union_count == 0 ? 0.0
                                : static_cast<double>(intersection_count) / union_count;
    }

    /// floor(4096 * i / u) clamped to 4095; 0 when the union is empty.
    std::uint16_t fixed12() const {
        if (union_count == 0) return 0;
        std::uint64_t q = (4096ull * intersection_count) / union_count;
        return static_cast<std::uint16_t>(q > 4095 ? 4095 : q);
    }
};

/// Exact rational comparison: negative/zero/positive as a < b, a == b, a > b.
int compare_scores(const TanimotoScore& a, const TanimotoScore& b);

enum class FoldScheme : std::uint8_t {
    Sectioned = 0, ///< OR across the m sections of length L/m
    Adjacent = 1,  ///< OR within each group of m neighboring bits
};

/// Folding level and scheme. m must be a power of two dividing L.
struct FoldSpec {
    FoldScheme scheme = FoldScheme::Sectioned;
    std::uint32_t m = 1;
};

std::uint32_t popcount(const Fingerprint& fp);

/// Tanimoto similarity of two equal-length fingerprints.
TanimotoScore tanimoto(const Fingerprint& a, const Fingerprint& b);

/// Compress a fingerprint to L/m bits by bitwise OR.
Fingerprint fold(const Fingerprint& fp, const FoldSpec& spec);

/// Bitwise OR of two equal-length fingerprints; result takes a's id.
Fingerprint fingerprint_or(const Fingerprint& a, const Fingerprint& b);

const char* fold_scheme_name(FoldScheme scheme);
FoldScheme fold_scheme_from_name(std::string_view name);

} // namespace mss
