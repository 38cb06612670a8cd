// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mss/exact_index.hpp"
#include "mss/fingerprint.hpp"
#include "mss/hnsw.hpp"

namespace mss {

/// Fingerprint text format: one record per line, `HEX[\tID]`, where HEX has
/// L/4 characters (L a multiple of 64). Lines starting with '#' and blank
/// lines are skipped. Ids default to the record ordinal.
std::vector<Fingerprint> read_fingerprints(std::istream& in);
std::vector<Fingerprint> read_fingerprints_file(const std::string& path);

void write_fingerprints(std::ostream& out, std::span<const Fingerprint> db);
void write_fingerprints_file(const std::string& path, std::span<const Fingerprint> db);

/// BitBound index file, magic "MSKB": version u16, L u32, fold m u32
/// (0 = unfolded), scheme u8, entry count u64, entries (id u64, bit_count
/// u16, words), then the folded words block when m > 0. Little-endian.
void save_bitbound(std::ostream& out, const BitBoundIndex& index);
void save_bitbound_file(const std::string& path, const BitBoundIndex& index);
BitBoundIndex load_bitbound(std::istream& in);
BitBoundIndex load_bitbound_file(const std::string& path);

/// HNSW graph file, magic "MSKH": version u16, params block, node table
/// (id u64, level u32, fingerprint words), per-layer CSR adjacency.
/// Little-endian.
void save_hnsw(std::ostream& out, const HnswGraph& graph);
void save_hnsw_file(const std::string& path, const HnswGraph& graph);
HnswGraph load_hnsw(std::istream& in);
HnswGraph load_hnsw_file(const std::string& path);

} // namespace mss
