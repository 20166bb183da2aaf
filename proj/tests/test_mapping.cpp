#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "panda/mapping.hpp"

using namespace panda;

TEST(HashLayout, DefaultGeometry) {
  const auto l = layout_hash({}, 25);
  EXPECT_EQ(l.kmer_rows, (RowRange{0, 980}));
  EXPECT_EQ(l.value_rows.size(), 32u);
  EXPECT_EQ(l.stripes, 4u);
  EXPECT_EQ(l.special.special_rows().size(), 12u);
  EXPECT_EQ(l.kmer_rows.size() + l.value_rows.size() + l.special.special_rows().size(), 1024u);
  EXPECT_GE(l.stripes * 256, l.capacity());
}

TEST(HashLayout, BitsAndUnusedColumns) {
  const auto l = layout_hash({}, 32);
  EXPECT_EQ(l.bits_per_kmer, 64u);
  EXPECT_EQ(l.unused_cols, 192u);
  EXPECT_NO_THROW(layout_hash({}, 128));
  try {
    layout_hash({}, 129);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::capacity);
  }
}

TEST(HashLayout, CounterSlots) {
  const auto l = layout_hash({}, 25);
  const auto c0 = l.counter(3, 0);
  const auto c300 = l.counter(3, 300);
  EXPECT_EQ(c0.subarray, 3u);
  EXPECT_EQ(c0.col, 0u);
  EXPECT_EQ(c0.lsb_row, 980u);
  EXPECT_EQ(c300.col, 44u);
  EXPECT_EQ(c300.lsb_row, 988u);
  EXPECT_EQ(c300.width, 8u);
  std::set<std::pair<RowIndex, ColIndex>> slots;
  for (RowIndex r = 0; r < l.capacity(); ++r) {
    const auto c = l.counter(0, r);
    EXPECT_TRUE(slots.insert({c.lsb_row, c.col}).second);
    EXPECT_GE(c.lsb_row, l.value_rows.begin);
    EXPECT_LE(c.lsb_row + c.width, l.value_rows.end);
  }
}

TEST(HashLayout, RegionsAvoidSpecialRows) {
  for (std::size_t rows : {32u, 64u, 1024u}) {
    const auto l = layout_hash({rows, 64}, 8);
    for (auto r : l.special.special_rows()) {
      EXPECT_FALSE(l.kmer_rows.contains(r));
      EXPECT_FALSE(l.value_rows.contains(r));
    }
    EXPECT_LE(l.value_rows.end, l.special.data_region.end);
  }
}

TEST(Partition, SingleIntervalHoldsEverything) {
  SparseGraph g;
  g.k = 3;
  g.labels = {EncodedSeq::encode("AC"), EncodedSeq::encode("CG"), EncodedSeq::encode("GT")};
  g.add_edge(0, 1, 1);
  g.add_edge(1, 2, 4);
  const auto p = partition_graph(g, 1);
  ASSERT_EQ(p.blocks.size(), 1u);
  EXPECT_EQ(p.blocks[0].size(), 2u);
}

TEST(Partition, EdgesFollowEndpointHashes) {
  SparseGraph g;
  g.k = 5;
  const char* names[] = {"AAAA", "CCCC", "GGGG", "TTTT", "ACGT", "TGCA"};
  for (auto n : names) g.labels.push_back(EncodedSeq::encode(n));
  for (NodeId u = 0; u < 6; ++u) {
    for (NodeId v = 0; v < 6; ++v) {
      if ((u + v) % 2 == 0) g.add_edge(u, v, u + 1);
    }
  }
  for (std::size_t M : {2u, 3u}) {
    const auto p = partition_graph(g, M, {}, 17, 2);
    ASSERT_EQ(p.blocks.size(), M * M);
    std::uint64_t total = 0;
    std::multiset<EdgeId> seen;
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      for (EdgeId e : p.blocks[b]) {
        const auto iu = g.labels[g.node1[e]].hash(17) % M;
        const auto iv = g.labels[g.node2[e]].hash(17) % M;
        EXPECT_EQ(b, iu * M + iv);
        total += g.mult[e];
        seen.insert(e);
      }
      EXPECT_EQ(p.chip_assignment[b], b % 2);
    }
    EXPECT_EQ(seen.size(), g.edge_count());
    EXPECT_EQ(std::set<EdgeId>(seen.begin(), seen.end()).size(), g.edge_count());
    EXPECT_EQ(total, g.total_multiplicity());
  }
}

TEST(Placement, SubarraysNeeded) {
  EXPECT_EQ(subarrays_needed(256, 256), 1u);
  EXPECT_EQ(subarrays_needed(257, 256), 2u);
  EXPECT_EQ(subarrays_needed(519771, 256), 2031u);
  EXPECT_EQ(subarrays_needed(0, 256), 0u);
}

TEST(Placement, VerticalWordSlots) {
  SparseGraph g;
  g.labels.resize(400);
  const auto p = partition_graph(g, 1);
  const auto w0 = place_vertical_word(p, 0);
  const auto w256 = place_vertical_word(p, 256);
  const auto w300 = place_vertical_word(p, 300);
  EXPECT_EQ(w0.subarray, 0u);
  EXPECT_EQ(w0.col, 0u);
  EXPECT_EQ(w256.subarray, 1u);
  EXPECT_EQ(w256.col, 0u);
  EXPECT_EQ(w300.subarray, 1u);
  EXPECT_EQ(w300.col, 44u);
  EXPECT_THROW(place_vertical_word(p, 400), Error);
}

TEST(Capacity, Formula) {
  const auto human = capacity_plan(3'000'000'000ULL, 32);
  EXPECT_EQ(human.hash_bits, 198'000'000'000ULL);
  EXPECT_NEAR(human.gib(), 23.0, 2.3);
  EXPECT_EQ(capacity_plan(1, 1).hash_bits, 4u);
  const auto small = capacity_plan(10'000, 25);
  EXPECT_EQ(small.hash_bits, 520'000u);
  EXPECT_EQ(small.bytes, 65'000u);
  EXPECT_EQ(small.subarrays_needed, 2u);
}

TEST(Json, LayoutExport) {
  const auto j = to_json(layout_hash({}, 25));
  EXPECT_EQ(j["kmer_rows"]["end"], 980);
  EXPECT_EQ(j["stripes"], 4);
  EXPECT_EQ(to_json(capacity_plan(10'000, 25))["bytes"], 65000);
}
