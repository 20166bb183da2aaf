#pragma once

#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "panda/graph.hpp"

namespace testing_support {

// Distinct 4-base label per vertex id (ids < 256), as for k = 5.
inline panda::EncodedSeq label_of(std::uint32_t id) {
  std::vector<std::uint8_t> codes(4);
  for (int i = 0; i < 4; ++i) codes[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((id >> (2 * (3 - i))) & 3U);
  return panda::EncodedSeq(std::move(codes));
}

inline panda::SparseGraph to_sparse(const oracle::Multigraph& m) {
  panda::SparseGraph g;
  g.k = 5;
  for (std::uint32_t v = 0; v < m.n; ++v) g.labels.push_back(label_of(v));
  for (const auto& [e, mult] : m.edges) g.add_edge(e.first, e.second, mult);
  return g;
}

inline oracle::Multigraph to_multigraph(const panda::SparseGraph& g) {
  oracle::Multigraph m;
  m.n = g.node_count();
  for (std::size_t e = 0; e < g.edge_count(); ++e) m.edges[{g.node1[e], g.node2[e]}] += g.mult[e];
  return m;
}

}  // namespace testing_support
