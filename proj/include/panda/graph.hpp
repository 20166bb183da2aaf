#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "panda/error.hpp"
#include "panda/fabric.hpp"
#include "panda/sequence.hpp"

namespace panda {

using NodeId = std::uint32_t;
using EdgeId = std::size_t;

struct KmerEntry {
  EncodedSeq kmer;
  std::uint64_t freq = 0;
  SubArrayId subarray = 0;  // where the key row lives
  RowIndex row = 0;
};

/// k-mer -> frequency, in fabric order (sub-array, then row).
struct KmerTable {
  std::size_t k = 0;
  std::vector<KmerEntry> entries;
  std::size_t saturated = 0;  // increments dropped at the all-ones ceiling

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }

  std::uint64_t total_frequency() const noexcept {
    std::uint64_t n = 0;
    for (const auto& e : entries) n += e.freq;
    return n;
  }

  std::optional<std::uint64_t> frequency(const EncodedSeq& kmer) const {
    for (const auto& e : entries) {
      if (e.kmer == kmer) return e.freq;
    }
    return std::nullopt;
  }

  /// `kmer<TAB>count` per line.
  void write_tsv(std::ostream& out) const {
    for (const auto& e : entries) out << e.kmer.decode() << '\t' << e.freq << '\n';
  }
};

/// Edge-list de Bruijn graph: three parallel columns (node1, node2, mult)
/// plus the label of every dense node id.
struct SparseGraph {
  std::size_t k = 0;
  std::vector<EncodedSeq> labels;
  std::vector<NodeId> node1;
  std::vector<NodeId> node2;
  std::vector<std::uint64_t> mult;

  std::size_t node_count() const noexcept { return labels.size(); }
  std::size_t edge_count() const noexcept { return node1.size(); }

  std::uint64_t total_multiplicity() const noexcept {
    std::uint64_t n = 0;
    for (auto m : mult) n += m;
    return n;
  }

  EdgeId add_edge(NodeId from, NodeId to, std::uint64_t m) {
    node1.push_back(from);
    node2.push_back(to);
    mult.push_back(m);
    return node1.size() - 1;
  }

  void validate() const {
    if (node1.size() != node2.size() || node1.size() != mult.size()) fail(Errc::shape, "edge columns differ in length");
    for (std::size_t i = 0; i < node1.size(); ++i) {
      if (node1[i] >= labels.size() || node2[i] >= labels.size()) fail(Errc::address, "edge endpoint out of range");
      if (mult[i] == 0) fail(Errc::shape, "edge multiplicity must be at least 1");
    }
  }

  /// `src<TAB>dst<TAB>mult` per line, labels decoded.
  void write_tsv(std::ostream& out) const {
    for (std::size_t i = 0; i < node1.size(); ++i) {
      out << labels[node1[i]].decode() << '\t' << labels[node2[i]].decode() << '\t' << mult[i] << '\n';
    }
  }
};

struct DegreeTable {
  std::vector<std::uint64_t> in_degree;
  std::vector<std::uint64_t> out_degree;
  std::uint64_t edge_cnt = 0;
  NodeId start = 0;
  /// Nodes whose out-degree equals in-degree + 1, as compared in the fabric.
  std::vector<bool> start_candidates;
};

struct EulerPath {
  std::vector<NodeId> vertices;
  std::vector<EncodedSeq> labels;  // labels[i] belongs to vertices[i]

  bool empty() const noexcept { return vertices.empty(); }
  std::size_t size() const noexcept { return vertices.size(); }
};

}  // namespace panda
