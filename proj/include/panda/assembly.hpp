#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "panda/error.hpp"
#include "panda/fabric.hpp"
#include "panda/graph.hpp"
#include "panda/isa.hpp"
#include "panda/mapping.hpp"
#include "panda/sequence.hpp"

namespace panda {

/// How edge frequencies become traversal multiplicities. Raw walks every
/// edge `frequency` times, which has no Euler path once read coverage varies
/// along the genome. Normalized divides by the median frequency (the
/// coverage estimate) and rounds, with a floor of 1.
enum class Multiplicity { raw, normalized };

struct AssemblyConfig {
  std::size_t freq_width = 8;
  std::size_t degree_width = 16;
  std::size_t count_width = 32;
  /// Hash sub-arrays k-mers are routed to; 0 sizes it so the worst case
  /// (every k-mer distinct) fits without spilling on average.
  std::size_t hash_subarrays = 0;
  /// Spill chain length limit; unset means as many as hash sub-arrays.
  std::optional<std::size_t> max_spill_subarrays;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  bool simplify = false;
  /// Throw on non-Eulerian components instead of degrading to greedy walks.
  bool strict = false;
  Multiplicity multiplicity = Multiplicity::normalized;
};

inline constexpr std::size_t kMaxK = 128;

inline std::vector<EncodedSeq> extract_kmers(const EncodedSeq& s, std::size_t k) {
  if (k < 2) fail(Errc::range, "k must be at least 2");
  std::vector<EncodedSeq> out;
  if (s.size() < k) return out;
  out.reserve(s.size() - k + 1);
  for (std::size_t i = 0; i + k <= s.size(); ++i) out.push_back(s.sub(i, k));
  return out;
}

namespace detail {

inline std::uint64_t packed_bytes(std::size_t bases) { return (2 * bases + 7) / 8; }

/// Runs fn(i) for i in [0, n) on up to `threads` workers; the first
/// exception is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct HashBucket {
  SubArrayId subarray = 0;
  std::size_t occupied = 0;
};

/// Looks up one k-mer in a hash sub-array: write it to the temp row, scan
/// the stored rows, then bump or create its counter. Returns false when the
/// k-mer is new and the sub-array is full.
inline bool hash_probe(Fabric& fabric, const HashLayout& layout, HashBucket& bucket, const BitVector& packed,
                       std::size_t& saturated) {
  SubArray& sub = fabric.subarray(bucket.subarray);
  const RowIndex temp = sub.layout().temp_rows.front();
  const MemAddress probe{bucket.subarray, temp, 0, layout.bits_per_kmer};
  panda_mem_insert(fabric, probe, packed.slice(0, layout.bits_per_kmer));
  if (auto hit = panda_cmp_scan(fabric, probe, layout.kmer_rows.begin, bucket.occupied)) {
    const VerticalWordRef ctr = layout.counter(bucket.subarray, *hit);
    if (panda_increment(fabric, ctr)) {
      // wrapped: pin the counter at its ceiling instead
      panda_mem_insert(fabric, ctr, ctr.width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << ctr.width) - 1);
      ++saturated;
    }
    return true;
  }
  if (bucket.occupied == layout.capacity()) return false;
  const RowIndex row = layout.kmer_rows.begin + bucket.occupied;
  panda_mem_insert(fabric, MemAddress{bucket.subarray, row, 0, layout.bits_per_kmer}, probe, layout.bits_per_kmer);
  panda_mem_insert(fabric, layout.counter(bucket.subarray, row), 1);
  ++bucket.occupied;
  return true;
}

}  // namespace detail

/// Counts every k-mer of `reads` inside the fabric. Each k-mer is routed by
/// hash to one hash sub-array, compared against the rows stored there and
/// either counted up in place or inserted with frequency 1. Sub-arrays that
/// fill up spill into a chain of extra sub-arrays. The table is read back
/// from the fabric at the end.
inline KmerTable hashmap_build(Fabric& fabric, std::span<const EncodedSeq> reads, std::size_t k,
                               const AssemblyConfig& cfg = {}) {
  if (k < 2 || k > kMaxK) fail(Errc::range, "k must be in [2, 128]");
  const HashLayout layout = layout_hash(fabric.geometry(), k, cfg.freq_width);
  const std::size_t cols = fabric.geometry().cols;

  fabric.set_stage(Stage::io);
  std::uint64_t bytes = 0;
  for (const auto& r : reads) bytes += detail::packed_bytes(r.size());
  fabric.host_trace().record(EventKind::XFER, bytes);

  KmerTable table;
  table.k = k;
  std::uint64_t total = 0;
  for (const auto& r : reads) total += r.size() >= k ? r.size() - k + 1 : 0;
  if (total == 0) return table;

  fabric.set_stage(Stage::hashmap);
  const std::size_t nbuckets =
      cfg.hash_subarrays > 0 ? cfg.hash_subarrays
                             : static_cast<std::size_t>((total + layout.capacity() - 1) / layout.capacity());
  std::vector<detail::HashBucket> buckets(nbuckets);
  for (auto& b : buckets) b.subarray = fabric.allocate();

  // route (read, offset) pairs to buckets, keeping stream order per bucket
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> routed(nbuckets);
  for (std::size_t r = 0; r < reads.size(); ++r) {
    if (reads[r].size() < k) continue;
    for (std::size_t i = 0; i + k <= reads[r].size(); ++i) {
      const std::size_t b = reads[r].sub(i, k).hash(cfg.seed) % nbuckets;
      routed[b].emplace_back(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(i));
    }
  }

  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> overflow(nbuckets);
  std::vector<std::size_t> saturated(nbuckets, 0);
  detail::parallel_for(nbuckets, cfg.threads, [&](std::size_t b) {
    for (const auto& [r, i] : routed[b]) {
      const BitVector packed = reads[r].sub(i, k).pack(cols);
      if (!detail::hash_probe(fabric, layout, buckets[b], packed, saturated[b])) overflow[b].emplace_back(r, i);
    }
  });
  routed.clear();
  for (auto s : saturated) table.saturated += s;

  // spill chain, sequential in bucket order
  const std::size_t max_spill = cfg.max_spill_subarrays.value_or(nbuckets);
  std::vector<detail::HashBucket> spill;
  for (const auto& list : overflow) {
    for (const auto& [r, i] : list) {
      const BitVector packed = reads[r].sub(i, k).pack(cols);
      bool placed = false;
      for (auto& s : spill) {
        if (detail::hash_probe(fabric, layout, s, packed, table.saturated)) {
          placed = true;
          break;
        }
      }
      if (placed) continue;
      if (spill.size() == max_spill) fail(Errc::capacity, "hash sub-arrays and spill chain are full");
      spill.push_back({fabric.allocate(), 0});
      detail::hash_probe(fabric, layout, spill.back(), packed, table.saturated);
    }
  }

  // read the table back out of the fabric
  auto read_back = [&](const detail::HashBucket& b) {
    std::vector<std::vector<std::uint64_t>> stripes;
    const std::size_t used_stripes = (b.occupied + cols - 1) / cols;
    for (std::size_t s = 0; s < used_stripes; ++s) stripes.push_back(read_vertical_field(fabric, layout.stripe(b.subarray, s)));
    SubArray& sub = fabric.subarray(b.subarray);
    for (std::size_t j = 0; j < b.occupied; ++j) {
      const RowIndex row = layout.kmer_rows.begin + j;
      KmerEntry e;
      e.kmer = EncodedSeq::unpack(sub.read_row(row), k);
      e.freq = stripes[j / cols][j % cols];
      e.subarray = b.subarray;
      e.row = row;
      table.entries.push_back(std::move(e));
    }
  };
  for (const auto& b : buckets) read_back(b);
  for (const auto& s : spill) read_back(s);
  return table;
}

/// Rows of one graph sub-array: edge j keeps node1 in row 2j, node2 in row
/// 2j+1, and its multiplicity as a vertical counter after the label rows.
struct GraphStoreLayout {
  std::size_t edges_per_subarray = 0;
  std::size_t counter_width = 8;
  std::size_t cols = 256;

  static GraphStoreLayout make(const Geometry& dims, std::size_t counter_width) {
    const std::size_t data = RowLayout::standard(dims.rows).data_region.size();
    std::size_t e = data / 2;
    while (e > 0 && 2 * e + counter_width * ((e + dims.cols - 1) / dims.cols) > data) --e;
    if (e == 0) fail(Errc::capacity, "graph sub-array cannot hold a single edge");
    return {e, counter_width, dims.cols};
  }

  VerticalWordRef counter(SubArrayId sub, std::size_t j) const {
    return {sub, j % cols, 2 * edges_per_subarray + (j / cols) * counter_width, counter_width};
  }
};

/// One edge per distinct k-mer: prefix (k-1)-mer -> suffix (k-1)-mer with
/// the k-mer's frequency as multiplicity. Labels and counters are copied
/// inside the fabric into graph sub-arrays.
inline SparseGraph debruijn_build(Fabric& fabric, const KmerTable& table, const AssemblyConfig& cfg = {}) {
  if (table.empty()) fail(Errc::shape, "empty k-mer table");
  const std::size_t k = table.k;
  const HashLayout hash = layout_hash(fabric.geometry(), k, cfg.freq_width);
  const GraphStoreLayout store = GraphStoreLayout::make(fabric.geometry(), cfg.freq_width);
  const std::size_t label_bits = 2 * (k - 1);
  fabric.set_stage(Stage::graph);

  SparseGraph g;
  g.k = k;
  std::unordered_map<EncodedSeq, NodeId, EncodedSeqHash> index;
  auto node_of = [&](EncodedSeq label) {
    fabric.host_trace().record(EventKind::DPU);
    auto [it, inserted] = index.try_emplace(label, static_cast<NodeId>(g.labels.size()));
    if (inserted) g.labels.push_back(std::move(label));
    return it->second;
  };

  SubArrayId sub = 0;
  for (std::size_t i = 0; i < table.entries.size(); ++i) {
    const auto& e = table.entries[i];
    const std::size_t j = i % store.edges_per_subarray;
    if (j == 0) sub = fabric.allocate();
    const MemAddress src1{e.subarray, e.row, 0, label_bits};
    const MemAddress src2{e.subarray, e.row, 2, label_bits};
    panda_mem_insert(fabric, MemAddress{sub, 2 * j, 0, label_bits}, src1, label_bits);
    panda_mem_insert(fabric, MemAddress{sub, 2 * j + 1, 0, label_bits}, src2, label_bits);
    panda_mem_insert(fabric, store.counter(sub, j), hash.counter(e.subarray, e.row));
    const NodeId a = node_of(e.kmer.sub(0, k - 1));
    const NodeId b = node_of(e.kmer.sub(1, k - 1));
    g.add_edge(a, b, e.freq);
  }
  return g;
}

/// Collapses chains: while node A's only distinct successor is B (B != A)
/// and B's only distinct predecessor is A, B is folded into A and A's label
/// grows by B's last bases. Multi-edges count as one adjacency.
inline SparseGraph simplify(Fabric& fabric, const SparseGraph& g) {
  g.validate();
  fabric.set_stage(Stage::graph);
  OpTrace& trace = fabric.host_trace();
  const std::size_t n = g.node_count();
  const std::size_t overlap = g.k >= 2 ? g.k - 2 : 0;

  std::vector<EncodedSeq> labels = g.labels;
  std::vector<NodeId> src = g.node1;
  std::vector<NodeId> dst = g.node2;
  std::vector<bool> edge_alive(g.edge_count(), true);
  std::vector<bool> node_alive(n, true);
  std::vector<std::vector<EdgeId>> out(n);
  std::vector<std::vector<EdgeId>> in(n);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    out[src[e]].push_back(e);
    in[dst[e]].push_back(e);
  }

  auto sole_target = [&](NodeId u) -> std::optional<NodeId> {
    std::optional<NodeId> t;
    for (EdgeId e : out[u]) {
      if (!edge_alive[e]) continue;
      if (t && *t != dst[e]) return std::nullopt;
      t = dst[e];
    }
    return t;
  };
  auto sole_source = [&](NodeId v) -> std::optional<NodeId> {
    std::optional<NodeId> s;
    for (EdgeId e : in[v]) {
      if (!edge_alive[e]) continue;
      if (s && *s != src[e]) return std::nullopt;
      s = src[e];
    }
    return s;
  };

  for (NodeId u = 0; u < n; ++u) {
    if (!node_alive[u]) continue;
    for (;;) {
      trace.record(EventKind::DPU, 2);
      const auto v = sole_target(u);
      if (!v || *v == u || !node_alive[*v]) break;
      const auto back = sole_source(*v);
      if (!back || *back != u) break;
      for (EdgeId e : out[u]) {
        if (edge_alive[e]) edge_alive[e] = false;  // all u -> v entries become internal
      }
      labels[u].append(labels[*v], overlap);
      std::vector<EdgeId> moved;
      for (EdgeId e : out[*v]) {
        if (!edge_alive[e]) continue;
        src[e] = u;
        moved.push_back(e);
      }
      out[u] = std::move(moved);
      out[*v].clear();
      node_alive[*v] = false;
      trace.record(EventKind::W);
    }
  }

  SparseGraph s;
  s.k = g.k;
  std::vector<NodeId> remap(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    if (!node_alive[v]) continue;
    remap[v] = static_cast<NodeId>(s.labels.size());
    s.labels.push_back(std::move(labels[v]));
  }
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (edge_alive[e]) s.add_edge(remap[src[e]], remap[dst[e]], g.mult[e]);
  }
  return s;
}

/// Copy-number estimate per edge; see Multiplicity. One DPU step per edge.
inline SparseGraph normalize_multiplicity(Fabric& fabric, const SparseGraph& g, Multiplicity mode) {
  if (mode == Multiplicity::raw || g.edge_count() == 0) return g;
  fabric.set_stage(Stage::graph);
  std::vector<std::uint64_t> sorted = g.mult;
  const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  const std::uint64_t coverage = std::max<std::uint64_t>(1, *mid);
  SparseGraph out = g;
  for (auto& m : out.mult) m = std::max<std::uint64_t>(1, (2 * m + coverage) / (2 * coverage));
  fabric.host_trace().record(EventKind::DPU, g.edge_count());
  return out;
}

namespace detail {

/// Accumulates (slot, value) pairs into one vertical word per slot, slot s
/// living in column s % cols of sub-array subs[s / cols]. Values for a slot
/// are stacked in layers; each layer is written once and added to the
/// accumulator for all columns in parallel.
inline void column_accumulate(Fabric& fabric, std::span<const SubArrayId> subs, const VerticalField& acc,
                              const VerticalField& layer, std::span<const std::size_t> slots,
                              std::span<const std::uint64_t> values) {
  const std::size_t cols = fabric.geometry().cols;
  const std::uint64_t limit = acc.width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << acc.width) - 1;
  std::vector<std::vector<std::vector<std::uint64_t>>> stacks(subs.size(), std::vector<std::vector<std::uint64_t>>(cols));
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (values[i] > limit) fail(Errc::capacity, "value does not fit the counter width");
    stacks[slots[i] / cols][slots[i] % cols].push_back(values[i]);
  }
  for (std::size_t s = 0; s < subs.size(); ++s) {
    std::size_t depth = 0;
    for (const auto& st : stacks[s]) depth = std::max(depth, st.size());
    for (std::size_t d = 0; d < depth; ++d) {
      std::vector<std::uint64_t> vals(cols, 0);
      BitVector mask(cols);
      for (ColIndex c = 0; c < cols; ++c) {
        if (d < stacks[s][c].size()) {
          vals[c] = stacks[s][c][d];
          mask.set(c, true);
        }
      }
      const VerticalField l{subs[s], layer.lsb_row, layer.width};
      const VerticalField a{subs[s], acc.lsb_row, acc.width};
      panda_mem_insert(fabric, l, vals, mask);
      if (panda_add(fabric, a, l, a, mask).any()) fail(Errc::capacity, "counter overflow during accumulation");
    }
  }
}

inline BitVector first_columns(std::size_t cols, std::size_t n) {
  BitVector m(cols);
  for (std::size_t c = 0; c < std::min(cols, n); ++c) m.set(c, true);
  return m;
}

}  // namespace detail

/// Degree accumulation in the fabric: one column per vertex, out- and
/// in-degree summed by vertical addition, start candidates found by comparing
/// out_degree against in_degree + 1 column-parallel. edge_cnt is summed into
/// per-column partial sums and reduced by the DPU. No Euler validation.
inline DegreeTable compute_degrees(Fabric& fabric, const SparseGraph& g, const AssemblyConfig& cfg = {}) {
  g.validate();
  fabric.set_stage(Stage::traverse);
  const std::size_t cols = fabric.geometry().cols;
  const std::size_t f = cols;
  const std::size_t w = cfg.degree_width;
  const std::size_t data = RowLayout::standard(fabric.geometry().rows).data_region.size();
  if (4 * w > data || 2 * cfg.count_width > data) fail(Errc::capacity, "counter fields do not fit the data region");
  const std::size_t n = g.node_count();

  DegreeTable dt;
  dt.in_degree.assign(n, 0);
  dt.out_degree.assign(n, 0);
  dt.start_candidates.assign(n, false);
  if (n == 0) return dt;

  const std::size_t ns = subarrays_needed(n, f);
  std::vector<SubArrayId> subs(ns);
  for (auto& s : subs) s = fabric.allocate();
  const VerticalField out_f{0, 0, w};
  const VerticalField in_f{0, w, w};
  const VerticalField layer_f{0, 2 * w, w};
  const VerticalField tmp_f{0, 3 * w, w};

  std::vector<std::size_t> slots(g.node1.begin(), g.node1.end());
  detail::column_accumulate(fabric, subs, out_f, layer_f, slots, g.mult);
  slots.assign(g.node2.begin(), g.node2.end());
  detail::column_accumulate(fabric, subs, in_f, layer_f, slots, g.mult);

  for (std::size_t s = 0; s < ns; ++s) {
    const BitVector active = detail::first_columns(cols, n - s * f);
    const VerticalField in{subs[s], in_f.lsb_row, w};
    const VerticalField tmp{subs[s], tmp_f.lsb_row, w};
    const VerticalField out{subs[s], out_f.lsb_row, w};
    panda_add_immediate(fabric, in, 1, tmp, active);
    const BitVector eq = panda_cmp_vertical(fabric, out, tmp, active);
    const auto outs = read_vertical_field(fabric, out);
    const auto ins = read_vertical_field(fabric, in);
    for (std::size_t c = 0; c < cols && s * f + c < n; ++c) {
      dt.out_degree[s * f + c] = outs[c];
      dt.in_degree[s * f + c] = ins[c];
      dt.start_candidates[s * f + c] = eq.get(c);
    }
  }

  if (g.edge_count() > 0) {
    const SubArrayId psub = fabric.allocate();
    const std::size_t cw = cfg.count_width;
    std::vector<std::size_t> eslots(g.edge_count());
    for (std::size_t i = 0; i < eslots.size(); ++i) eslots[i] = i % cols;
    const std::array<SubArrayId, 1> one{psub};
    detail::column_accumulate(fabric, one, VerticalField{psub, 0, cw}, VerticalField{psub, cw, cw}, eslots, g.mult);
    const auto partial = read_vertical_field(fabric, VerticalField{psub, 0, cw});
    std::int64_t total = 0;
    for (std::size_t c = 0; c < std::min(cols, g.edge_count()); ++c) {
      total = dpu_scalar(fabric.host_trace(), DpuOp::add_small, total, static_cast<std::int64_t>(partial[c]));
    }
    dt.edge_cnt = static_cast<std::uint64_t>(total);
  }
  return dt;
}

/// Applies the Euler-path degree conditions to `nodes` and returns the start
/// vertex: the unique node with out = in + 1, else the first node.
inline NodeId select_start(const DegreeTable& dt, std::span<const NodeId> nodes, OpTrace& trace) {
  if (nodes.empty()) fail(Errc::shape, "no nodes to start from");
  std::optional<NodeId> start;
  std::size_t ends = 0;
  for (NodeId v : nodes) {
    const auto out = static_cast<std::int64_t>(dt.out_degree[v]);
    const auto in = static_cast<std::int64_t>(dt.in_degree[v]);
    const bool host_start = out == in + 1;
    if (host_start != dt.start_candidates[v]) fail(Errc::consistency, "fabric start test disagrees with degrees");
    if (dpu_scalar(trace, DpuOp::compare_gt, out, in + 1) || dpu_scalar(trace, DpuOp::compare_gt, in, out + 1)) {
      fail(Errc::non_eulerian, "node " + std::to_string(v) + " has |out - in| >= 2");
    }
    if (host_start) {
      if (start) fail(Errc::non_eulerian, "more than one node with out = in + 1");
      start = v;
    }
    if (in == out + 1 && ++ends > 1) fail(Errc::non_eulerian, "more than one node with in = out + 1");
  }
  return start.value_or(nodes.front());
}

inline DegreeTable find_start(Fabric& fabric, const SparseGraph& g, const AssemblyConfig& cfg = {}) {
  if (g.node_count() == 0) fail(Errc::shape, "empty graph");
  DegreeTable dt = compute_degrees(fabric, g, cfg);
  std::vector<NodeId> all(g.node_count());
  std::iota(all.begin(), all.end(), NodeId{0});
  dt.start = select_start(dt, all, fabric.host_trace());
  return dt;
}

/// Remaining-multiplicity view of a graph used by the Euler walk. Out-edges
/// of each node are ordered by destination id, then edge id.
class ResidualGraph {
 public:
  explicit ResidualGraph(const SparseGraph& g) : g_(g), remaining_(g.mult), out_(g.node_count()), stamp_(g.node_count(), 0) {
    for (EdgeId e = 0; e < g.edge_count(); ++e) out_[g.node1[e]].push_back(e);
    for (auto& list : out_) {
      std::stable_sort(list.begin(), list.end(), [&](EdgeId a, EdgeId b) { return g.node2[a] < g.node2[b]; });
    }
  }

  const SparseGraph& graph() const noexcept { return g_; }
  std::uint64_t remaining(EdgeId e) const { return remaining_[e]; }
  const std::vector<EdgeId>& out_edges(NodeId u) const { return out_[u]; }
  void consume(EdgeId e) { --remaining_[e]; }

  /// True when every remaining out-edge of u leads to v.
  bool only_adjacent(NodeId u, NodeId v) const {
    for (EdgeId e : out_[u]) {
      if (remaining_[e] > 0 && g_.node2[e] != v) return false;
    }
    return true;
  }

  /// Vertices reachable from `from` over remaining edges (including itself).
  std::size_t reach_count(NodeId from, OpTrace* trace) {
    ++epoch_;
    std::vector<NodeId> stack{from};
    stamp_[from] = epoch_;
    std::size_t count = 1;
    std::uint64_t examined = 0;
    while (!stack.empty()) {
      const NodeId x = stack.back();
      stack.pop_back();
      for (EdgeId e : out_[x]) {
        ++examined;
        if (remaining_[e] == 0) continue;
        const NodeId y = g_.node2[e];
        if (stamp_[y] == epoch_) continue;
        stamp_[y] = epoch_;
        ++count;
        stack.push_back(y);
      }
    }
    if (trace) trace->record(EventKind::DPU, examined);
    return count;
  }

  /// Edge e = (u, v) may be taken if v is u's only remaining neighbour, or if
  /// removing one unit of it keeps every vertex reachable from u reachable
  /// (counted from v, where the walk continues).
  bool valid_next(EdgeId e, OpTrace* trace) {
    const NodeId u = g_.node1[e];
    const NodeId v = g_.node2[e];
    if (remaining_[e] == 0) fail(Errc::address, "edge has no remaining multiplicity");
    if (only_adjacent(u, v)) return true;
    const std::size_t before = reach_count(u, trace);
    --remaining_[e];
    const std::size_t after = reach_count(v, trace);
    ++remaining_[e];
    return after >= before;
  }

 private:
  const SparseGraph& g_;
  std::vector<std::uint64_t> remaining_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

/// Edge validity test on a graph whose `mult` column holds the remaining
/// multiplicities.
inline bool is_valid_next_edge(const SparseGraph& g, NodeId u, NodeId v, OpTrace* trace = nullptr) {
  g.validate();
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (g.node1[e] == u && g.node2[e] == v) {
      ResidualGraph r(g);
      return r.valid_next(e, trace);
    }
  }
  fail(Errc::address, "edge " + std::to_string(u) + "->" + std::to_string(v) + " does not exist");
}

/// Fleury walk state: host-side residual graph mirrored by vertical counters
/// in the fabric (edge multiplicities, out-degrees, one edge_cnt word per
/// walk), all decremented with PANDA_Add(-1) as edges are consumed.
class TraversalEngine {
 public:
  TraversalEngine(Fabric& fabric, const SparseGraph& g, const DegreeTable& dt, const AssemblyConfig& cfg = {})
      : fabric_(fabric), g_(g), residual_(g), w_(cfg.degree_width), cw_(cfg.count_width), out_left_(dt.out_degree),
        in_left_(dt.in_degree) {
    fabric_.set_stage(Stage::traverse);
    cols_ = fabric_.geometry().cols;
    edge_subs_ = load_counters(g.mult, w_);
    node_subs_ = load_counters(dt.out_degree, w_);
  }

  struct Walk {
    EulerPath path;
    bool complete = false;
  };

  /// Walks from `start` until `edges` edge units are consumed or no edge is
  /// left at the current vertex. With check_bridges the Fleury validity test
  /// picks the edge; otherwise the lowest-id destination is taken greedily.
  Walk walk(NodeId start, std::uint64_t edges, bool check_bridges) {
    fabric_.set_stage(Stage::traverse);
    OpTrace& trace = fabric_.host_trace();
    const VerticalWordRef cnt = counter_slot();
    panda_mem_insert(fabric_, cnt, edges);
    std::uint64_t left = edges;

    Walk result;
    append(result.path, start);
    NodeId u = start;
    while (!dpu_scalar(trace, DpuOp::compare_eq, static_cast<std::int64_t>(left), 0)) {
      std::optional<EdgeId> chosen;
      for (EdgeId e : residual_.out_edges(u)) {
        if (residual_.remaining(e) == 0) continue;
        trace.record(EventKind::DPU);
        if (!check_bridges || residual_.valid_next(e, &trace)) {
          chosen = e;
          break;
        }
      }
      if (!chosen) return result;
      const NodeId v = g_.node2[*chosen];
      residual_.consume(*chosen);
      --out_left_[u];
      --in_left_[v];
      --left;
      panda_decrement(fabric_, slot(edge_subs_, *chosen, w_));
      panda_decrement(fabric_, slot(node_subs_, u, w_));
      panda_decrement(fabric_, cnt);
      append(result.path, v);
      u = v;
    }
    result.complete = true;
    return result;
  }

  /// Edge-disjoint walks covering every remaining edge of `nodes`: each walk
  /// starts at the lowest node with surplus out-degree, else the lowest node
  /// with edges left.
  std::vector<EulerPath> greedy_cover(std::span<const NodeId> nodes) {
    std::vector<EulerPath> paths;
    for (;;) {
      std::uint64_t left = 0;
      std::optional<NodeId> surplus;
      std::optional<NodeId> any;
      for (NodeId v : nodes) {
        left += out_left_[v];
        if (out_left_[v] > 0 && !any) any = v;
        if (out_left_[v] > in_left_[v] && !surplus) surplus = v;
      }
      if (left == 0) break;
      Walk wk = walk(surplus.value_or(*any), left, false);
      paths.push_back(std::move(wk.path));
    }
    return paths;
  }

  std::uint64_t out_left(NodeId v) const { return out_left_[v]; }

  /// Reads every counter back and checks it against the host mirror.
  void verify_drained() {
    fabric_.set_stage(Stage::traverse);
    auto check = [&](const std::vector<SubArrayId>& subs, std::size_t width, std::size_t n, auto expected) {
      for (std::size_t s = 0; s < subs.size(); ++s) {
        const auto vals = read_vertical_field(fabric_, VerticalField{subs[s], 0, width});
        for (std::size_t c = 0; c < cols_ && s * cols_ + c < n; ++c) {
          if (vals[c] != expected(s * cols_ + c)) fail(Errc::consistency, "fabric counter disagrees with walk state");
        }
      }
    };
    check(edge_subs_, w_, g_.edge_count(), [&](std::size_t e) { return residual_.remaining(e); });
    check(node_subs_, w_, g_.node_count(), [&](std::size_t v) { return out_left_[v]; });
  }

 private:
  std::vector<SubArrayId> load_counters(const std::vector<std::uint64_t>& values, std::size_t width) {
    const std::uint64_t limit = width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
    std::vector<SubArrayId> subs(subarrays_needed(values.size(), cols_));
    for (std::size_t s = 0; s < subs.size(); ++s) {
      subs[s] = fabric_.allocate();
      std::vector<std::uint64_t> vals(cols_, 0);
      const BitVector mask = detail::first_columns(cols_, values.size() - s * cols_);
      for (std::size_t c = 0; c < cols_ && s * cols_ + c < values.size(); ++c) {
        if (values[s * cols_ + c] > limit) fail(Errc::capacity, "counter value does not fit its width");
        vals[c] = values[s * cols_ + c];
      }
      panda_mem_insert(fabric_, VerticalField{subs[s], 0, width}, vals, mask);
    }
    return subs;
  }

  VerticalWordRef slot(const std::vector<SubArrayId>& subs, std::size_t i, std::size_t width) const {
    return {subs[i / cols_], i % cols_, 0, width};
  }

  VerticalWordRef counter_slot() {
    if (next_counter_ % cols_ == 0) counter_subs_.push_back(fabric_.allocate());
    const std::size_t i = next_counter_++;
    return slot(counter_subs_, i, cw_);
  }

  /// Records the vertex in the fabric path buffer (32-bit ids) and the path.
  void append(EulerPath& path, NodeId v) {
    constexpr std::size_t id_bits = 32;
    const std::size_t data_rows = RowLayout::standard(fabric_.geometry().rows).data_region.size();
    const std::size_t per_row = std::max<std::size_t>(1, cols_ / id_bits);
    const std::size_t rows_per_slot = cols_ >= id_bits ? 1 : (id_bits + cols_ - 1) / cols_;
    const std::size_t slots_per_sub = (data_rows / rows_per_slot) * per_row;
    if (path_slot_ % slots_per_sub == 0) path_subs_.push_back(fabric_.allocate());
    const std::size_t local = path_slot_++ % slots_per_sub;
    const RowIndex row = (local / per_row) * rows_per_slot;
    const ColIndex col = cols_ >= id_bits ? (local % per_row) * id_bits : 0;
    BitVector bits(id_bits);
    for (std::size_t b = 0; b < id_bits; ++b) bits.set(b, (v >> b) & 1U);
    panda_mem_insert(fabric_, MemAddress{path_subs_.back(), row, col, id_bits}, bits);
    path.vertices.push_back(v);
    path.labels.push_back(g_.labels[v]);
  }

  Fabric& fabric_;
  const SparseGraph& g_;
  ResidualGraph residual_;
  std::size_t w_;
  std::size_t cw_;
  std::size_t cols_ = 0;
  std::vector<std::uint64_t> out_left_;
  std::vector<std::uint64_t> in_left_;
  std::vector<SubArrayId> edge_subs_;
  std::vector<SubArrayId> node_subs_;
  std::vector<SubArrayId> counter_subs_;
  std::vector<SubArrayId> path_subs_;
  std::size_t next_counter_ = 0;
  std::size_t path_slot_ = 0;
};

/// Fleury's algorithm from dt.start over the whole graph.
inline EulerPath fleury(Fabric& fabric, const SparseGraph& g, const DegreeTable& dt, const AssemblyConfig& cfg = {}) {
  TraversalEngine engine(fabric, g, dt, cfg);
  auto wk = engine.walk(dt.start, g.total_multiplicity(), true);
  if (!wk.complete) fail(Errc::disconnected, "walk stuck with edges left");
  engine.verify_drained();
  return std::move(wk.path);
}

/// First label, then each following label minus its (k-2)-base overlap.
inline EncodedSeq contigs_from_path(const EulerPath& p, std::size_t k) {
  if (p.labels.empty()) fail(Errc::shape, "empty path");
  if (k < 2) fail(Errc::range, "k must be at least 2");
  const std::size_t overlap = k - 2;
  EncodedSeq out = p.labels.front();
  for (std::size_t i = 1; i < p.labels.size(); ++i) {
    const auto& prev = p.labels[i - 1];
    const auto& next = p.labels[i];
    if (prev.size() < overlap || next.size() < overlap ||
        !std::equal(prev.codes().end() - static_cast<std::ptrdiff_t>(overlap), prev.codes().end(), next.codes().begin())) {
      fail(Errc::consistency, "adjacent path vertices do not overlap by k-2 bases");
    }
    out.append(next, overlap);
  }
  return out;
}

struct Component {
  std::vector<NodeId> nodes;  // ascending
  std::uint64_t edge_units = 0;
};

/// Weakly-connected components ordered by their smallest node id.
inline std::vector<Component> weak_components(const SparseGraph& g, OpTrace* trace = nullptr) {
  std::vector<NodeId> parent(g.node_count());
  std::iota(parent.begin(), parent.end(), NodeId{0});
  auto find = [&](NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const NodeId a = find(g.node1[e]);
    const NodeId b = find(g.node2[e]);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  if (trace) trace->record(EventKind::DPU, g.edge_count());
  std::vector<Component> comps;
  std::vector<std::size_t> index(g.node_count(), SIZE_MAX);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const NodeId r = find(v);
    if (index[r] == SIZE_MAX) {
      index[r] = comps.size();
      comps.emplace_back();
    }
    comps[index[r]].nodes.push_back(v);
  }
  for (EdgeId e = 0; e < g.edge_count(); ++e) comps[index[find(g.node1[e])]].edge_units += g.mult[e];
  return comps;
}

struct AssemblyResult {
  std::vector<EncodedSeq> contigs;
  KmerTable table;
  SparseGraph graph;       // as built from the table
  SparseGraph traversed;   // normalized multiplicities, optionally simplified
  std::vector<std::string> warnings;
  std::size_t non_eulerian_components = 0;
};

/// reads -> k-mer table -> de Bruijn graph -> (simplify) -> per component:
/// start vertex, Fleury walk, contig.
inline AssemblyResult assemble(Fabric& fabric, std::span<const EncodedSeq> reads, std::size_t k,
                               const AssemblyConfig& cfg = {}) {
  AssemblyResult res;
  res.table = hashmap_build(fabric, reads, k, cfg);
  if (res.table.saturated > 0) {
    res.warnings.push_back(std::to_string(res.table.saturated) + " k-mer count increment(s) lost to saturated counters");
  }
  if (res.table.empty()) {
    fabric.set_stage(Stage::other);
    return res;
  }
  res.graph = debruijn_build(fabric, res.table, cfg);
  res.traversed = normalize_multiplicity(fabric, res.graph, cfg.multiplicity);
  if (cfg.simplify) res.traversed = simplify(fabric, res.traversed);
  const SparseGraph& g = res.traversed;

  DegreeTable dt = compute_degrees(fabric, g, cfg);
  const auto comps = weak_components(g, &fabric.host_trace());
  TraversalEngine engine(fabric, g, dt, cfg);
  for (const auto& comp : comps) {
    std::string problem;
    try {
      const NodeId start = select_start(dt, comp.nodes, fabric.host_trace());
      auto wk = engine.walk(start, comp.edge_units, true);
      res.contigs.push_back(contigs_from_path(wk.path, k));
      if (wk.complete) continue;
      problem = "walk stuck with edges left";
      if (cfg.strict) fail(Errc::disconnected, problem);
    } catch (const Error& e) {
      if (cfg.strict || e.code() != Errc::non_eulerian) throw;
      problem = e.what();
    }
    ++res.non_eulerian_components;
    res.warnings.push_back("component at node " + std::to_string(comp.nodes.front()) + ": " + problem +
                           "; emitting greedy walks");
    for (const auto& p : engine.greedy_cover(comp.nodes)) res.contigs.push_back(contigs_from_path(p, k));
  }
  engine.verify_drained();

  fabric.set_stage(Stage::io);
  std::uint64_t bytes = 0;
  for (const auto& c : res.contigs) bytes += detail::packed_bytes(c.size());
  fabric.host_trace().record(EventKind::XFER, bytes);
  fabric.set_stage(Stage::other);
  return res;
}

}  // namespace panda
