#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "panda/error.hpp"
#include "panda/fabric.hpp"
#include "panda/graph.hpp"
#include "panda/isa.hpp"

namespace panda {

/// Region map of a hash sub-array: one k-mer per row in kmer_rows, and an
/// 8-bit (by default) vertical counter per k-mer in value_rows. The counter
/// of the k-mer in row r sits in stripe r / cols, column r % cols.
struct HashLayout {
  Geometry dims;
  std::size_t k = 0;
  std::size_t counter_width = 8;
  RowRange kmer_rows;
  RowRange value_rows;
  std::size_t stripes = 0;
  RowLayout special;
  std::size_t bits_per_kmer = 0;
  std::size_t unused_cols = 0;

  std::size_t capacity() const noexcept { return kmer_rows.size(); }

  VerticalWordRef counter(SubArrayId sub, RowIndex kmer_row) const {
    const std::size_t slot = kmer_row - kmer_rows.begin;
    return {sub, slot % dims.cols, value_rows.begin + (slot / dims.cols) * counter_width, counter_width};
  }

  VerticalField stripe(SubArrayId sub, std::size_t s) const {
    return {sub, value_rows.begin + s * counter_width, counter_width};
  }
};

inline HashLayout layout_hash(Geometry dims, std::size_t k, std::size_t counter_width = 8) {
  if (k < 1) fail(Errc::range, "k must be positive");
  if (2 * k > dims.cols) {
    fail(Errc::capacity, "a " + std::to_string(k) + "-mer needs " + std::to_string(2 * k) + " bits but rows have " +
                             std::to_string(dims.cols));
  }
  if (dims.rows < 16) fail(Errc::capacity, "hash layout needs at least 16 rows");
  if (counter_width == 0 || counter_width > 64) fail(Errc::range, "counter width must be in [1, 64]");
  HashLayout l;
  l.dims = dims;
  l.k = k;
  l.counter_width = counter_width;
  l.special = RowLayout::standard(dims.rows);
  const std::size_t data = l.special.data_region.size();
  std::size_t n = data;
  while (n > 0 && n + counter_width * ((n + dims.cols - 1) / dims.cols) > data) --n;
  if (n == 0) fail(Errc::capacity, "no room for k-mer rows and counters");
  l.stripes = (n + dims.cols - 1) / dims.cols;
  l.kmer_rows = {0, n};
  l.value_rows = {n, n + l.stripes * counter_width};
  l.bits_per_kmer = 2 * k;
  l.unused_cols = dims.cols - 2 * k;
  return l;
}

/// Interval-block partition: vertices hashed into M intervals, edge (u,v)
/// stored in block (interval(u), interval(v)), blocks dealt round-robin to
/// sub-array groups.
struct PartitionPlan {
  std::size_t M = 1;
  std::uint64_t seed = 0;
  std::size_t f = 256;
  std::size_t groups = 1;
  std::vector<std::uint32_t> vertex_interval;
  std::vector<std::vector<EdgeId>> blocks;  // M*M, row-major (src interval, dst interval)
  std::vector<std::size_t> chip_assignment;

  std::size_t block_index(std::size_t src_interval, std::size_t dst_interval) const {
    return src_interval * M + dst_interval;
  }
};

inline std::uint32_t vertex_interval(const EncodedSeq& label, std::size_t M, std::uint64_t seed = 0) {
  return static_cast<std::uint32_t>(label.hash(seed) % M);
}

inline PartitionPlan partition_graph(const SparseGraph& g, std::size_t M, Geometry dims = {}, std::uint64_t seed = 0,
                                     std::size_t groups = 0) {
  if (M < 1) fail(Errc::range, "M must be at least 1");
  PartitionPlan plan;
  plan.M = M;
  plan.seed = seed;
  plan.f = dims.f();
  plan.groups = groups == 0 ? M * M : groups;
  plan.vertex_interval.resize(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) plan.vertex_interval[v] = vertex_interval(g.labels[v], M, seed);
  plan.blocks.assign(M * M, {});
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    plan.blocks[plan.block_index(plan.vertex_interval[g.node1[e]], plan.vertex_interval[g.node2[e]])].push_back(e);
  }
  plan.chip_assignment.resize(M * M);
  for (std::size_t b = 0; b < M * M; ++b) plan.chip_assignment[b] = b % plan.groups;
  return plan;
}

inline std::size_t subarrays_needed(std::size_t vertices, std::size_t f) {
  if (f < 1) fail(Errc::range, "f must be at least 1");
  return (vertices + f - 1) / f;
}

/// Column-per-vertex slot: vertex n goes to sub-array n / f, column n % f.
inline VerticalWordRef place_vertical_word(const PartitionPlan& plan, NodeId node, std::size_t width = 16,
                                           RowIndex lsb_row = 0) {
  if (node >= plan.vertex_interval.size()) fail(Errc::address, "node not covered by the plan");
  return {node / plan.f, node % plan.f, lsb_row, width};
}

struct CapacityPlan {
  std::uint64_t genome_size = 0;
  std::size_t k = 0;
  std::uint64_t hash_bits = 0;
  std::uint64_t bytes = 0;
  std::uint64_t subarrays_needed = 0;

  double gib() const noexcept { return static_cast<double>(bytes) / (1024.0 * 1024.0 * 1024.0); }
};

/// Hash table footprint ~ 2 bits per base times (k + 1) per key.
inline CapacityPlan capacity_plan(std::uint64_t genome_size, std::size_t k, Geometry dims = {}) {
  if (genome_size < 1) fail(Errc::range, "genome size must be at least 1");
  CapacityPlan p;
  p.genome_size = genome_size;
  p.k = k;
  p.hash_bits = 2 * genome_size * (k + 1);
  p.bytes = (p.hash_bits + 7) / 8;
  const std::uint64_t per_sub = static_cast<std::uint64_t>(dims.rows) * dims.cols;
  p.subarrays_needed = (p.hash_bits + per_sub - 1) / per_sub;
  return p;
}

inline nlohmann::json to_json(const HashLayout& l) {
  auto range = [](const RowRange& r) { return nlohmann::json{{"begin", r.begin}, {"end", r.end}}; };
  return {
      {"rows", l.dims.rows},
      {"cols", l.dims.cols},
      {"k", l.k},
      {"counter_width", l.counter_width},
      {"kmer_rows", range(l.kmer_rows)},
      {"value_rows", range(l.value_rows)},
      {"stripes", l.stripes},
      {"temp_rows", l.special.temp_rows},
      {"init0_row", l.special.init0_row},
      {"init1_row", l.special.init1_row},
      {"carry_rows", l.special.carry_rows},
      {"resv_rows", l.special.resv_rows},
      {"bits_per_kmer", l.bits_per_kmer},
      {"unused_cols", l.unused_cols},
  };
}

inline nlohmann::json to_json(const PartitionPlan& p) {
  nlohmann::json blocks = nlohmann::json::array();
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    blocks.push_back({{"src_interval", b / p.M},
                      {"dst_interval", b % p.M},
                      {"group", p.chip_assignment[b]},
                      {"edges", p.blocks[b]}});
  }
  return {{"M", p.M}, {"seed", p.seed}, {"f", p.f}, {"groups", p.groups}, {"vertex_interval", p.vertex_interval},
          {"blocks", blocks}};
}

inline nlohmann::json to_json(const CapacityPlan& p) {
  return {{"genome_size", p.genome_size}, {"k", p.k},        {"hash_bits", p.hash_bits},
          {"bytes", p.bytes},             {"gib", p.gib()}, {"subarrays_needed", p.subarrays_needed}};
}

}  // namespace panda
