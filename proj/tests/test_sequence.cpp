#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "panda/sequence.hpp"
#include "panda/workload.hpp"

using namespace panda;

TEST(EncodedSeq, FixedCodes) {
  const auto s = EncodedSeq::encode("ACGT");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], 0);
  EXPECT_EQ(s[1], 1);
  EXPECT_EQ(s[2], 2);
  EXPECT_EQ(s[3], 3);
  EXPECT_EQ(s.bit_length(), 8u);
}

TEST(EncodedSeq, RoundTripRandom) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto text = oracle::random_bases(rng, rng() % 300);
    EXPECT_EQ(EncodedSeq::encode(text).decode(), text);
  }
}

TEST(EncodedSeq, LowercaseAcceptedOtherSymbolsRejected) {
  EXPECT_EQ(EncodedSeq::encode("acgt").decode(), "ACGT");
  try {
    EncodedSeq::encode("ACNT");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::parse);
  }
}

TEST(EncodedSeq, PackUnpackRowImage) {
  const auto s = EncodedSeq::encode("CGTA");
  const auto row = s.pack(16);
  // C=01 G=10 T=11 A=00, high bit first per base
  EXPECT_EQ(row.to_string(), "0110110000000000");
  EXPECT_EQ(EncodedSeq::unpack(row, 4), s);
  EXPECT_EQ(EncodedSeq::unpack(row, 2, 4), EncodedSeq::encode("TA"));
  EXPECT_THROW(s.pack(7), Error);
}

TEST(EncodedSeq, SubAppendAndOrder) {
  auto s = EncodedSeq::encode("CGTG");
  s.append(EncodedSeq::encode("GTGC"), 3);
  EXPECT_EQ(s.decode(), "CGTGC");
  EXPECT_EQ(s.sub(1, 3).decode(), "GTG");
  EXPECT_LT(EncodedSeq::encode("AC"), EncodedSeq::encode("AG"));
  EXPECT_NE(EncodedSeq::encode("AC").hash(), EncodedSeq::encode("CA").hash());
  EXPECT_NE(EncodedSeq::encode("AC").hash(1), EncodedSeq::encode("AC").hash(2));
}

TEST(Fastx, MultiLineFasta) {
  std::istringstream in(">r1 first\nACGT\nACG\n\n>r2\nTTTT\n");
  const auto recs = read_fastx(in);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].name, "r1 first");
  EXPECT_EQ(recs[0].bases, "ACGTACG");
  EXPECT_EQ(recs[1].bases, "TTTT");
}

TEST(Fastx, FastqQualityIgnored) {
  std::istringstream in("@q1\nACGT\n+\nIIII\n@q2\nGG\n+q2\n!!\n");
  const auto recs = read_fastx(in);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].bases, "GG");
}

TEST(Fastx, MalformedInputsAreParseErrors) {
  for (const std::string text : {"ACGT\n", "@q1\nACGT\n+\nII\n", "@q1\nACGT\n", ">r\nAC-GT\n"}) {
    std::istringstream in(text);
    try {
      read_fastx(in);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::parse) << text;
    }
  }
}

TEST(Fastx, EmptyInputGivesNoRecords) {
  std::istringstream in("");
  EXPECT_TRUE(read_fastx(in).empty());
}

TEST(Ingest, SplitsAtNonAcgt) {
  const auto res = ingest({{"r", "ACGTNNACGGNT"}});
  ASSERT_EQ(res.fragments.size(), 3u);
  EXPECT_EQ(res.fragments[0].decode(), "ACGT");
  EXPECT_EQ(res.fragments[1].decode(), "ACGG");
  EXPECT_EQ(res.fragments[2].decode(), "T");
  EXPECT_EQ(res.rejected_symbols, 3u);
  EXPECT_FALSE(res.warnings.empty());
}

TEST(Fasta, WriteWrapsLines) {
  std::ostringstream out;
  write_fasta(out, {EncodedSeq::encode("ACGTACGTAC")}, "c", 4);
  EXPECT_EQ(out.str(), ">c1 len=10\nACGT\nACGT\nAC\n");
}

TEST(Workload, TiledReadCount) {
  const auto g = random_genome(1000, 5);
  const auto reads = tile_reads(g, 100, 1);
  EXPECT_EQ(reads.size(), 901u);
  EXPECT_EQ(reads.back(), g.sub(900, 100));
  const auto strided = tile_reads(g, 100, 70);
  // starts 0,70,...,840 then a tail window at 900
  EXPECT_EQ(strided.size(), 14u);
  EXPECT_EQ(strided.back(), g.sub(900, 100));
}

TEST(Workload, CoverageSampling) {
  const auto g = random_genome(10000, 5);
  const auto reads = sample_reads(g, 100, 30.0, 9);
  EXPECT_NEAR(static_cast<double>(reads.size()), 3000.0, 1.0);
  for (const auto& r : reads) EXPECT_EQ(r.size(), 100u);
}

TEST(Workload, DeterministicAndDistinct) {
  EXPECT_EQ(random_genome(5000, 11, 24), random_genome(5000, 11, 24));
  EXPECT_NE(random_genome(5000, 11), random_genome(5000, 12));
  EXPECT_TRUE(all_substrings_distinct(random_genome(5000, 11, 24), 24));
  EXPECT_FALSE(all_substrings_distinct(EncodedSeq::encode("ACGACG"), 3));
  EXPECT_THROW(random_genome(100, 1, 2), Error);
}
