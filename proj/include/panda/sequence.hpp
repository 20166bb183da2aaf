#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panda/bitvector.hpp"
#include "panda/error.hpp"

namespace panda {

/// Nucleotides as 2-bit codes: A=00, C=01, G=10, T=11.
class EncodedSeq {
 public:
  EncodedSeq() = default;
  explicit EncodedSeq(std::vector<std::uint8_t> codes) : codes_(std::move(codes)) {
    for (auto c : codes_) {
      if (c > 3) fail(Errc::shape, "nucleotide code out of range");
    }
  }

  static int code_of(char base) noexcept {
    switch (base) {
      case 'A': case 'a': return 0;
      case 'C': case 'c': return 1;
      case 'G': case 'g': return 2;
      case 'T': case 't': return 3;
      default: return -1;
    }
  }

  static EncodedSeq encode(std::string_view bases) {
    std::vector<std::uint8_t> codes;
    codes.reserve(bases.size());
    for (char b : bases) {
      const int c = code_of(b);
      if (c < 0) fail(Errc::parse, std::string("not a nucleotide: '") + b + "'");
      codes.push_back(static_cast<std::uint8_t>(c));
    }
    EncodedSeq s;
    s.codes_ = std::move(codes);
    return s;
  }

  std::string decode() const {
    static constexpr char kBases[] = {'A', 'C', 'G', 'T'};
    std::string s(codes_.size(), 'A');
    for (std::size_t i = 0; i < codes_.size(); ++i) s[i] = kBases[codes_[i]];
    return s;
  }

  std::size_t size() const noexcept { return codes_.size(); }
  bool empty() const noexcept { return codes_.empty(); }
  std::size_t bit_length() const noexcept { return 2 * codes_.size(); }
  std::uint8_t operator[](std::size_t i) const { return codes_[i]; }
  std::span<const std::uint8_t> codes() const noexcept { return codes_; }

  EncodedSeq sub(std::size_t pos, std::size_t len) const {
    EncodedSeq s;
    s.codes_.assign(codes_.begin() + static_cast<std::ptrdiff_t>(pos),
                    codes_.begin() + static_cast<std::ptrdiff_t>(pos + len));
    return s;
  }

  void append(const EncodedSeq& tail, std::size_t from = 0) {
    codes_.insert(codes_.end(), tail.codes_.begin() + static_cast<std::ptrdiff_t>(from), tail.codes_.end());
  }

  /// Row image: base i occupies bits 2i (high) and 2i+1 (low); the rest of
  /// the `width`-bit row is zero.
  BitVector pack(std::size_t width) const {
    if (width < bit_length()) fail(Errc::capacity, "sequence does not fit in the row");
    BitVector row(width);
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      row.set(2 * i, (codes_[i] >> 1) & 1U);
      row.set(2 * i + 1, codes_[i] & 1U);
    }
    return row;
  }

  static EncodedSeq unpack(const BitVector& row, std::size_t bases, std::size_t bit_offset = 0) {
    if (bit_offset + 2 * bases > row.size()) fail(Errc::shape, "row too short to unpack");
    std::vector<std::uint8_t> codes(bases);
    for (std::size_t i = 0; i < bases; ++i) {
      codes[i] = static_cast<std::uint8_t>((row.get(bit_offset + 2 * i) << 1) | row.get(bit_offset + 2 * i + 1));
    }
    EncodedSeq s;
    s.codes_ = std::move(codes);
    return s;
  }

  std::uint64_t hash(std::uint64_t seed = 0) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL ^ seed;
    std::uint64_t word = 0;
    std::size_t filled = 0;
    for (auto c : codes_) {
      word = (word << 2) | c;
      if (++filled == 32) {
        h = (h ^ word) * 0xFF51AFD7ED558CCDULL;
        h ^= h >> 33;
        word = 0;
        filled = 0;
      }
    }
    h = (h ^ word ^ (codes_.size() << 56)) * 0xC4CEB9FE1A85EC53ULL;
    h ^= h >> 29;
    return h;
  }

  friend bool operator==(const EncodedSeq&, const EncodedSeq&) = default;
  friend auto operator<=>(const EncodedSeq&, const EncodedSeq&) = default;

 private:
  std::vector<std::uint8_t> codes_;
};

struct EncodedSeqHash {
  std::size_t operator()(const EncodedSeq& s) const noexcept { return static_cast<std::size_t>(s.hash()); }
};

struct SequenceRecord {
  std::string name;
  std::string bases;
};

/// Reads FASTA or FASTQ (detected from the first header). FASTQ quality lines
/// are checked for length and discarded.
inline std::vector<SequenceRecord> read_fastx(std::istream& in) {
  std::vector<SequenceRecord> records;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      if (!out.empty() && out.back() == '\r') out.pop_back();
      return true;
    }
    return false;
  };
  auto where = [&] { return " (line " + std::to_string(lineno) + ")"; };

  char format = 0;
  while (next(line)) {
    if (line.empty()) continue;
    if (format == 0) {
      if (line[0] != '>' && line[0] != '@') fail(Errc::parse, "expected '>' or '@' header" + where());
      format = line[0];
    }
    if (format == '>') {
      if (line[0] == '>') {
        records.push_back({line.substr(1), {}});
      } else {
        if (line[0] == '@' || line[0] == '+') fail(Errc::parse, "unexpected FASTQ marker in FASTA" + where());
        records.back().bases += line;
      }
      continue;
    }
    if (line[0] != '@') fail(Errc::parse, "expected '@' header" + where());
    SequenceRecord rec{line.substr(1), {}};
    std::string plus;
    std::string qual;
    if (!next(rec.bases) || !next(plus) || plus.empty() || plus[0] != '+' || !next(qual)) {
      fail(Errc::parse, "truncated FASTQ record" + where());
    }
    if (qual.size() != rec.bases.size()) fail(Errc::parse, "quality length differs from sequence length" + where());
    records.push_back(std::move(rec));
  }
  for (const auto& r : records) {
    for (char c : r.bases) {
      const bool letter = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
      if (!letter) fail(Errc::parse, "non-letter symbol in sequence '" + r.name + "'");
    }
  }
  return records;
}

struct IngestResult {
  std::vector<EncodedSeq> fragments;
  std::size_t rejected_symbols = 0;
  std::vector<std::string> warnings;
};

/// Encodes records, splitting each read at every non-ACGT symbol.
inline IngestResult ingest(const std::vector<SequenceRecord>& records) {
  IngestResult out;
  for (const auto& rec : records) {
    std::size_t start = 0;
    std::size_t rejected = 0;
    for (std::size_t i = 0; i <= rec.bases.size(); ++i) {
      if (i < rec.bases.size() && EncodedSeq::code_of(rec.bases[i]) >= 0) continue;
      if (i > start) out.fragments.push_back(EncodedSeq::encode(std::string_view(rec.bases).substr(start, i - start)));
      if (i < rec.bases.size()) ++rejected;
      start = i + 1;
    }
    if (rejected > 0) {
      out.rejected_symbols += rejected;
      out.warnings.push_back("read '" + rec.name + "': split at " + std::to_string(rejected) + " non-ACGT symbol(s)");
    }
  }
  return out;
}

inline void write_fasta(std::ostream& out, const std::vector<EncodedSeq>& seqs, std::string_view name_prefix,
                        std::size_t line_width = 80) {
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    out << '>' << name_prefix << (i + 1) << " len=" << seqs[i].size() << '\n';
    const std::string s = seqs[i].decode();
    for (std::size_t p = 0; p < s.size(); p += line_width) out << s.substr(p, line_width) << '\n';
  }
}

}  // namespace panda
