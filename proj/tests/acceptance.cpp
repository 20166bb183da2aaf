// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "graph_helpers.hpp"
#include "oracles.hpp"
#include "panda/panda.hpp"

using namespace panda;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared end-to-end workload: 10 kb genome with distinct 24-mers, 100-base
// reads at stride 1.
struct Workload {
  EncodedSeq genome;
  std::vector<EncodedSeq> reads;
};

const Workload& workload() {
  static const Workload w = [] {
    Workload x;
    x.genome = random_genome(10000, 1, 24);
    x.reads = tile_reads(x.genome, 100, 1);
    return x;
  }();
  return w;
}

struct Run {
  AssemblyResult result;
  OpTrace trace;
};

Run run(std::size_t k, bool simplify, unsigned threads = 1) {
  Fabric fabric;
  AssemblyConfig cfg;
  cfg.simplify = simplify;
  cfg.threads = threads;
  Run r;
  r.result = assemble(fabric, workload().reads, k, cfg);
  r.trace = fabric.merged_trace();
  return r;
}

const Run& baseline() {
  static const Run r = run(25, false);
  return r;
}

Outcome logic_exactness() {
  const auto t0 = Clock::now();
  SubArray sub(16, 8);
  // column j holds input pattern j: row 0 = bit 2, row 1 = bit 1, row 2 = bit 0
  BitVector r0(8), r1(8), r2(8);
  for (std::size_t j = 0; j < 8; ++j) {
    r0.set(j, (j >> 2) & 1);
    r1.set(j, (j >> 1) & 1);
    r2.set(j, j & 1);
  }
  sub.write_row(0, r0);
  sub.write_row(1, r1);
  sub.write_row(2, r2);
  std::size_t checked = 0;
  for (const auto& cfg : sense::kCompute) {
    const auto out = sub.activate({0, 1, 2}, cfg);
    for (std::size_t j = 0; j < 8; ++j) {
      const int ones = static_cast<int>(r0.get(j)) + r1.get(j) + r2.get(j);
      const bool or3 = ones >= 1, maj = ones >= 2, and3 = ones == 3, parity = ones % 2 == 1;
      if (out.or3.get(j) != or3 || out.maj.get(j) != maj || out.and3.get(j) != and3 || out.xor3.get(j) != parity ||
          out.nor3.get(j) != !or3 || out.min.get(j) != !maj || out.nand3.get(j) != !and3) {
        return {false, sense::name(cfg) + " wrong on pattern " + std::to_string(j)};
      }
      const bool mux = (!out.maj.get(j) && out.or3.get(j)) || (out.maj.get(j) && out.and3.get(j));
      if (mux != parity) return {false, "parity identity broken on pattern " + std::to_string(j)};
      ++checked;
    }
  }
  for (RowIndex r = 0; r < 3; ++r) {
    const BitVector expect = r == 0 ? r0 : r == 1 ? r1 : r2;
    if (sub.read_row(r) != expect) return {false, "READ mismatch"};
    checked += 8;
  }
  const double s = seconds_since(t0);
  return {s < 1.0, fmt("%zu pattern/config checks, %.3f s", checked, s)};
}

Outcome two_input() {
  SubArray sub(16, 4);
  BitVector a(4), b(4);
  for (std::size_t j = 0; j < 4; ++j) {
    a.set(j, (j >> 1) & 1);
    b.set(j, j & 1);
  }
  sub.write_row(0, a);
  sub.write_row(1, b);
  const std::vector<std::pair<Logic2, std::function<bool(bool, bool)>>> ops = {
      {Logic2::And, [](bool x, bool y) { return x && y; }},  {Logic2::Or, [](bool x, bool y) { return x || y; }},
      {Logic2::Xor, [](bool x, bool y) { return x != y; }},  {Logic2::Xnor, [](bool x, bool y) { return x == y; }},
      {Logic2::Nand, [](bool x, bool y) { return !(x && y); }}, {Logic2::Nor, [](bool x, bool y) { return !(x || y); }}};
  for (const auto& [op, fn] : ops) {
    const auto out = logic2(sub, op, 0, 1);
    for (std::size_t j = 0; j < 4; ++j) {
      if (out.get(j) != fn(a.get(j), b.get(j))) return {false, "op " + std::to_string(static_cast<int>(op))};
    }
  }
  return {true, "6 functions x 4 rows"};
}

Outcome adder() {
  const auto t0 = Clock::now();
  Fabric f({128, 256});
  const auto s = f.allocate();
  const auto all = BitVector::ones(256);
  {
    const VerticalField A{s, 0, 8}, B{s, 8, 8}, O{s, 16, 8};
    std::vector<std::uint64_t> av(256), bv(256);
    for (unsigned y = 0; y < 256; ++y) bv[y] = y;
    panda_mem_insert(f, B, bv, all);
    for (unsigned x = 0; x < 256; ++x) {
      std::fill(av.begin(), av.end(), x);
      panda_mem_insert(f, A, av, all);
      const auto carry = panda_add(f, A, B, O, all);
      const auto out = read_vertical_field(f, O);
      for (unsigned y = 0; y < 256; ++y) {
        if (out[y] != (x + y) % 256 || carry.get(y) != (x + y >= 256)) return {false, fmt("8-bit %u+%u", x, y)};
      }
    }
  }
  std::mt19937_64 rng(32);
  const VerticalField A{s, 0, 32}, B{s, 32, 32}, O{s, 64, 32};
  std::vector<std::uint64_t> av(256), bv(256);
  std::size_t cases = 0;
  while (cases < 10000) {
    for (std::size_t j = 0; j < 256; ++j) {
      av[j] = rng() & 0xFFFFFFFFu;
      bv[j] = rng() & 0xFFFFFFFFu;
    }
    panda_mem_insert(f, A, av, all);
    panda_mem_insert(f, B, bv, all);
    const auto carry = panda_add(f, A, B, O, all);
    const auto out = read_vertical_field(f, O);
    for (std::size_t j = 0; j < 256; ++j) {
      const std::uint64_t sum = av[j] + bv[j];
      if (out[j] != (sum & 0xFFFFFFFFu) || carry.get(j) != (sum >> 32 != 0)) return {false, "32-bit mismatch"};
    }
    cases += 256;
  }
  const double secs = seconds_since(t0);
  return {secs < 10.0, fmt("65536 + %zu cases, %.2f s", cases, secs)};
}

Outcome counting() {
  std::mt19937_64 rng(4);
  std::vector<std::string> text;
  std::vector<EncodedSeq> reads;
  for (int i = 0; i < 1000; ++i) {
    text.push_back(oracle::random_bases(rng, 100));
    reads.push_back(EncodedSeq::encode(text.back()));
  }
  for (std::size_t k : {22u, 25u, 27u, 32u}) {
    Fabric f;
    const auto table = hashmap_build(f, reads, k);
    std::map<std::string, std::uint64_t> got;
    for (const auto& e : table.entries) got[e.kmer.decode()] += e.freq;
    if (got != oracle::count_kmers(text, k)) return {false, "k=" + std::to_string(k)};
  }
  return {true, "1000 reads, k in {22,25,27,32}"};
}

Outcome euler_properties() {
  const auto& r = baseline().result;
  if (r.graph.total_multiplicity() != r.table.total_frequency()) return {false, "multiplicity != frequency"};
  {
    Fabric f;
    const auto dt = compute_degrees(f, r.graph);
    std::uint64_t in = 0, out = 0;
    for (auto d : dt.in_degree) in += d;
    for (auto d : dt.out_degree) out += d;
    if (in != out || out != dt.edge_cnt || dt.edge_cnt != r.graph.total_multiplicity()) return {false, "degree sums"};
  }
  std::mt19937_64 rng(55);
  for (int i = 0; i < 100; ++i) {
    const auto m = oracle::random_eulerian(rng, 50, i % 2 == 0);
    const auto g = testing_support::to_sparse(m);
    Fabric f;
    const auto dt = find_start(f, g);
    std::uint64_t in = 0, out = 0;
    for (auto d : dt.in_degree) in += d;
    for (auto d : dt.out_degree) out += d;
    if (in != out || out != dt.edge_cnt || dt.edge_cnt != m.total()) return {false, fmt("degree sums, graph %d", i)};
    const auto path = fleury(f, g, dt);
    const auto cov = oracle::coverage(path.vertices);
    if (cov != m.edges || cov != oracle::coverage(oracle::hierholzer(m, oracle::euler_start(m)))) {
      return {false, fmt("coverage, graph %d", i)};
    }
  }
  return {true, "100 random multigraphs"};
}

Outcome round_trip() {
  const auto t0 = Clock::now();
  const auto& genome = workload().genome;
  if (!all_substrings_distinct(genome, 24)) return {false, "workload genome has repeated 24-mers"};
  const auto& plain = baseline().result;
  const auto simp = run(25, true).result;
  const bool ok_plain = plain.contigs.size() == 1 && plain.contigs[0] == genome;
  const bool ok_simp = simp.contigs.size() == 1 && simp.contigs[0] == genome;
  const double secs = seconds_since(t0);
  return {ok_plain && ok_simp && secs < 300,
          fmt("simplify off %s, on %s, %.1f s", ok_plain ? "exact" : "MISMATCH", ok_simp ? "exact" : "MISMATCH", secs)};
}

Outcome stage_breakdown() {
  const auto rep = account(baseline().trace, CostConfig{});
  const double frac = rep.fraction(Stage::hashmap);
  return {frac >= 0.40, fmt("hashmap fraction %.3f", frac)};
}

Outcome k_trend() {
  std::vector<double> t;
  std::string detail;
  for (std::size_t k : {22u, 25u, 27u, 32u}) {
    const auto& tr = k == 25 ? baseline().trace : run(k, false).trace;
    t.push_back(account(tr, CostConfig{}).total.latency_ns);
    detail += fmt("k=%zu %.1f ms ", k, t.back() / 1e6);
  }
  bool dec = true;
  for (std::size_t i = 1; i < t.size(); ++i) dec = dec && t[i] < t[i - 1];
  return {dec, detail};
}

Outcome pd_sweep() {
  const auto cfg = CostConfig::load(std::string(PANDA_DATA_DIR) + "/calibration.json");
  const std::vector<std::size_t> pds{1, 8};
  const auto pts = sweep_pd(baseline().trace, cfg, pds);
  const double speedup = pts[0].runtime_ns / pts[1].runtime_ns;
  const double power = pts[1].avg_power_mw / pts[0].avg_power_mw;
  bool ok = speedup >= 2.5 && speedup <= 3.5 && power >= 5 && power <= 9;

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::size_t> all;
  for (std::size_t p = 1; p <= 64; ++p) all.push_back(p);
  for (int i = 0; i < 200 && ok; ++i) {
    CostConfig c;
    for (auto kind : kAllEventKinds) c.cost(kind) = {10 * u(rng), 10 * u(rng)};
    c.leakage_base_mw = 1000 * u(rng);
    c.leakage_per_group_mw = i % 4 == 0 ? 0 : 1000 * u(rng);
    c.parallel_fraction = i % 5 == 0 ? (i % 10 == 0 ? 0.0 : 1.0) : u(rng);
    const auto sw = sweep_pd(i % 2 ? baseline().trace : OpTrace{}, c, all);
    for (std::size_t j = 1; j < sw.size(); ++j) {
      if (sw[j].runtime_ns > sw[j - 1].runtime_ns || sw[j].avg_power_mw < sw[j - 1].avg_power_mw) {
        ok = false;
        break;
      }
    }
  }
  return {ok, fmt("runtime %.2fx, power %.2fx at P_d=8; 200 random configs monotone", speedup, power)};
}

Outcome memory_wall() {
  const auto cfg = CostConfig::load(std::string(PANDA_DATA_DIR) + "/calibration.json");
  const auto m = memory_wall_metrics(baseline().trace, cfg);
  bool ok = m.mbr <= 0.17 && m.rur >= 0.60 && m.mbr + m.rur <= 1;
  std::mt19937_64 rng(10);
  for (int i = 0; i < 200 && ok; ++i) {
    OpTrace t;
    for (auto kind : kAllEventKinds) t.record(kind, rng() % 1000);
    const auto x = memory_wall_metrics(t, cfg);
    ok = x.mbr >= 0 && x.rur >= 0 && x.mbr + x.rur <= 1 + 1e-12;
  }
  return {ok, fmt("MBR %.2e, RUR %.4f", m.mbr, m.rur)};
}

Outcome capacity() {
  const auto plan = capacity_plan(3'000'000'000ULL, 32);
  const double gib = plan.gib();
  const auto n = subarrays_needed(519'771, 256);
  return {std::abs(gib - 23.0) <= 2.3 && n == 2031, fmt("%.2f GiB, %zu sub-arrays", gib, static_cast<std::size_t>(n))};
}

Outcome reproducible() {
  auto artifacts = [] {
    const auto r = run(25, true, 4);
    std::ostringstream fasta;
    write_fasta(fasta, r.result.contigs, "contig_");
    return std::vector<std::string>{fasta.str(), to_json(account(r.trace, CostConfig{}, 4)).dump(), r.trace.to_csv()};
  };
  const auto a = artifacts();
  const auto b = artifacts();
  return {a == b, fmt("contigs %zu B, report %zu B, trace %zu B", a[0].size(), a[1].size(), a[2].size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"logic exactness", logic_exactness},
      {"two-input emulation", two_input},
      {"adder", adder},
      {"k-mer counting", counting},
      {"graph and Euler properties", euler_properties},
      {"end-to-end round trip", round_trip},
      {"stage breakdown", stage_breakdown},
      {"k-length trend", k_trend},
      {"P_d sweep", pd_sweep},
      {"memory-wall metrics", memory_wall},
      {"capacity formula", capacity},
      {"reproducibility", reproducible},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << o.detail
              << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion/criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
