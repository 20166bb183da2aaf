#pragma once

// Host-side reference implementations. They avoid the library's own
// encodings and algorithms so that agreement means something.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Gates {
  bool or3, maj, and3, xor3;
};

inline Gates gates(bool a, bool b, bool c) {
  return {a || b || c, (a && b) || (a && c) || (b && c), a && b && c, (a != b) != c};
}

inline std::map<std::string, std::uint64_t> count_kmers(const std::vector<std::string>& reads, std::size_t k) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& r : reads) {
    for (std::size_t i = 0; i + k <= r.size(); ++i) ++counts[r.substr(i, k)];
  }
  return counts;
}

inline std::string random_bases(std::mt19937_64& rng, std::size_t n) {
  static constexpr char kBases[] = {'A', 'C', 'G', 'T'};
  std::uniform_int_distribution<int> d(0, 3);
  std::string s(n, 'A');
  for (auto& ch : s) ch = kBases[d(rng)];
  return s;
}

/// Directed multigraph as (src, dst) -> multiplicity over vertices [0, n).
struct Multigraph {
  std::size_t n = 0;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> edges;

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [e, m] : edges) t += m;
    return t;
  }
};

/// Random connected Eulerian multigraph: the edges of one random walk over
/// up to `max_vertices` vertices, relabeled so every vertex has an edge.
inline Multigraph random_eulerian(std::mt19937_64& rng, std::size_t max_vertices, bool closed) {
  std::uniform_int_distribution<std::size_t> nv(2, max_vertices);
  const std::size_t n = nv(rng);
  std::uniform_int_distribution<std::size_t> len(1, 4 * n);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
  std::vector<std::uint32_t> walk{pick(rng)};
  const std::size_t steps = len(rng);
  for (std::size_t i = 0; i < steps; ++i) walk.push_back(pick(rng));
  if (closed) walk.push_back(walk.front());
  std::map<std::uint32_t, std::uint32_t> ids;
  for (auto v : walk) ids.try_emplace(v, static_cast<std::uint32_t>(ids.size()));
  Multigraph g;
  g.n = ids.size();
  for (std::size_t i = 0; i + 1 < walk.size(); ++i) ++g.edges[{ids[walk[i]], ids[walk[i + 1]]}];
  return g;
}

/// Iterative Hierholzer from `start`; returns the vertex sequence.
inline std::vector<std::uint32_t> hierholzer(const Multigraph& g, std::uint32_t start) {
  std::vector<std::vector<std::uint32_t>> adj(g.n);
  for (const auto& [e, m] : g.edges) {
    for (std::uint64_t i = 0; i < m; ++i) adj[e.first].push_back(e.second);
  }
  std::vector<std::uint32_t> stack{start};
  std::vector<std::uint32_t> path;
  while (!stack.empty()) {
    const auto v = stack.back();
    if (!adj[v].empty()) {
      stack.push_back(adj[v].back());
      adj[v].pop_back();
    } else {
      path.push_back(v);
      stack.pop_back();
    }
  }
  std::reverse(path.begin(), path.end());
  return path;
}

/// Multiset of edges a vertex sequence walks.
inline std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> coverage(const std::vector<std::uint32_t>& path) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> c;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) ++c[{path[i], path[i + 1]}];
  return c;
}

/// Start vertex by the textbook rule: the vertex with out = in + 1, else
/// the lowest vertex with an out-edge.
inline std::uint32_t euler_start(const Multigraph& g) {
  std::vector<std::int64_t> bal(g.n, 0);
  for (const auto& [e, m] : g.edges) {
    bal[e.first] += static_cast<std::int64_t>(m);
    bal[e.second] -= static_cast<std::int64_t>(m);
  }
  for (std::uint32_t v = 0; v < g.n; ++v) {
    if (bal[v] == 1) return v;
  }
  return g.edges.begin()->first.first;
}

/// Bridge test in the underlying undirected multigraph: removing one unit
/// of u-v leaves u and v disconnected.
inline bool is_bridge(const Multigraph& g, std::uint32_t u, std::uint32_t v) {
  std::multiset<std::pair<std::uint32_t, std::uint32_t>> und;
  for (const auto& [e, m] : g.edges) {
    for (std::uint64_t i = 0; i < m; ++i) und.insert({e.first, e.second});
  }
  und.erase(und.find({u, v}));
  std::vector<std::vector<std::uint32_t>> adj(g.n);
  for (const auto& [a, b] : und) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(g.n, false);
  std::vector<std::uint32_t> st{u};
  seen[u] = true;
  while (!st.empty()) {
    const auto x = st.back();
    st.pop_back();
    for (auto y : adj[x]) {
      if (!seen[y]) {
        seen[y] = true;
        st.push_back(y);
      }
    }
  }
  return !seen[v];
}

}  // namespace oracle
