#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

#include "panda/error.hpp"
#include "panda/sequence.hpp"

namespace panda {

/// True when no substring of length `len` occurs twice in `s`.
inline bool all_substrings_distinct(const EncodedSeq& s, std::size_t len) {
  if (len == 0 || s.size() < len) return true;
  std::unordered_set<EncodedSeq, EncodedSeqHash> seen;
  seen.reserve(s.size() - len + 1);
  for (std::size_t i = 0; i + len <= s.size(); ++i) {
    if (!seen.insert(s.sub(i, len)).second) return false;
  }
  return true;
}

/// Uniform random genome from a seeded mt19937_64. With distinct_len > 0 the
/// generator keeps drawing until every substring of that length is unique
/// (use k - 1 for a genome that assembles back exactly).
inline EncodedSeq random_genome(std::size_t length, std::uint64_t seed, std::size_t distinct_len = 0,
                                std::size_t max_attempts = 64) {
  std::mt19937_64 rng(seed);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<std::uint8_t> codes(length);
    for (auto& c : codes) c = static_cast<std::uint8_t>(rng() >> 62);
    EncodedSeq g(std::move(codes));
    if (all_substrings_distinct(g, distinct_len)) return g;
  }
  fail(Errc::range, "could not draw a genome with distinct substrings of the requested length");
}

/// Windows of `read_len` every `stride` bases; a last window is added at the
/// end when the stride does not land there.
inline std::vector<EncodedSeq> tile_reads(const EncodedSeq& genome, std::size_t read_len, std::size_t stride) {
  if (read_len == 0 || stride == 0) fail(Errc::range, "read length and stride must be positive");
  std::vector<EncodedSeq> reads;
  if (genome.size() <= read_len) {
    if (!genome.empty()) reads.push_back(genome);
    return reads;
  }
  std::size_t start = 0;
  for (; start + read_len <= genome.size(); start += stride) reads.push_back(genome.sub(start, read_len));
  if (start - stride + read_len != genome.size()) reads.push_back(genome.sub(genome.size() - read_len, read_len));
  return reads;
}

/// round(coverage * |genome| / read_len) reads at uniform random offsets.
inline std::vector<EncodedSeq> sample_reads(const EncodedSeq& genome, std::size_t read_len, double coverage,
                                            std::uint64_t seed) {
  if (read_len == 0 || !(coverage > 0)) fail(Errc::range, "read length and coverage must be positive");
  if (genome.size() < read_len) fail(Errc::range, "genome shorter than the read length");
  const auto n = static_cast<std::size_t>(std::llround(coverage * static_cast<double>(genome.size()) / static_cast<double>(read_len)));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pos(0, genome.size() - read_len);
  std::vector<EncodedSeq> reads;
  reads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) reads.push_back(genome.sub(pos(rng), read_len));
  return reads;
}

}  // namespace panda
