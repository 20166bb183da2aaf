// panda: command-line driver for the simulated PIM assembler.
//
// Exit codes: 0 ok, 1 self-check failure or internal inconsistency,
// 2 unreadable or malformed input, 3 capacity exhausted, 4 bad configuration.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "panda/panda.hpp"

namespace fs = std::filesystem;
using namespace panda;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSelfCheck = 1;
constexpr int kExitParse = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitConfig = 4;

// Options every subcommand accepts.
struct Common {
  std::string cost_config;
  std::size_t rows = 1024;
  std::size_t cols = 256;
  std::size_t pd = 1;
  std::size_t k = 25;
  std::uint64_t seed = 0;
  bool simplify = false;
  std::string out;

  Geometry geometry() const { return {rows, cols}; }

  CostConfig costs() const { return cost_config.empty() ? CostConfig{} : CostConfig::load(cost_config); }

  void check() const {
    if (k < 2 || k > kMaxK) fail(Errc::configuration, "--k must be in [2, 128]");
    if (pd < 1) fail(Errc::configuration, "--pd must be at least 1");
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--cost-config", c.cost_config, "flat JSON cost config (defaults to the built-in table)");
  cmd->add_option("--rows", c.rows, "sub-array rows")->capture_default_str();
  cmd->add_option("--cols", c.cols, "sub-array columns")->capture_default_str();
  cmd->add_option("--pd", c.pd, "parallelism degree (sub-array groups)")->capture_default_str();
  cmd->add_option("--k", c.k, "k-mer length")->capture_default_str();
  cmd->add_option("--seed", c.seed, "seed for hashing and workload generation")->capture_default_str();
  cmd->add_flag("--simplify", c.simplify, "merge unbranched chains before traversal");
  cmd->add_option("--out", c.out, "output file, or output directory for assemble/gen");
}

std::vector<EncodedSeq> load_reads(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::parse, "cannot open " + path);
  IngestResult ing = ingest(read_fastx(in));
  for (const auto& w : ing.warnings) std::cerr << "warning: " << w << '\n';
  return std::move(ing.fragments);
}

// Writes to the --out file, or stdout when none was given.
template <typename Fn>
void emit(const std::string& path, Fn fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::configuration, "cannot write " + path);
  fn(out);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::configuration, "cannot write " + path.string());
  out << content;
}

struct Run {
  AssemblyResult result;
  OpTrace trace;
};

Run run_pipeline(const Common& c, const std::vector<EncodedSeq>& reads, std::size_t k, bool strict, bool raw) {
  Fabric fabric(c.geometry());
  AssemblyConfig cfg;
  cfg.seed = c.seed;
  cfg.simplify = c.simplify;
  cfg.strict = strict;
  cfg.threads = static_cast<unsigned>(c.pd);
  if (raw) cfg.multiplicity = Multiplicity::raw;
  Run run;
  run.result = assemble(fabric, reads, k, cfg);
  run.trace = fabric.merged_trace();
  return run;
}

std::vector<std::size_t> parse_list(const std::string& s, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos) {
        const std::size_t lo = std::stoul(item.substr(0, dash));
        const std::size_t hi = std::stoul(item.substr(dash + 1));
        for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
      } else {
        out.push_back(std::stoul(item));
      }
    } catch (const std::logic_error&) {
      fail(Errc::configuration, std::string("bad ") + what + " list '" + s + "'");
    }
  }
  if (out.empty()) fail(Errc::configuration, std::string("empty ") + what + " list");
  return out;
}

int exit_code(Errc e) {
  switch (e) {
    case Errc::parse: return kExitParse;
    case Errc::capacity: return kExitCapacity;
    case Errc::configuration:
    case Errc::range: return kExitConfig;
    default: return kExitSelfCheck;
  }
}

bool oracle_matches(const TruthRow& r) {
  const int ones = r.in[0] + r.in[1] + r.in[2];
  if (r.config == sense::kRead) return r.or3 == r.in[0] && r.maj == r.in[1] && r.and3 == r.in[2];
  const bool or3 = ones >= 1, maj = ones >= 2, and3 = ones == 3, xor3 = ones % 2 == 1;
  return r.or3 == or3 && r.maj == maj && r.and3 == and3 && r.xor3 == xor3 && r.nor3 == !or3 && r.min == !maj &&
         r.nand3 == !and3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated SOT-MRAM processing-in-memory genome assembler"};
  app.require_subcommand(1);

  // assemble
  Common a;
  std::string a_in;
  bool a_strict = false;
  bool a_raw = false;
  auto* assemble_cmd = app.add_subcommand("assemble", "assemble reads into contigs on the simulated fabric");
  add_common(assemble_cmd, a);
  assemble_cmd->add_option("--in", a_in, "FASTA/FASTQ reads")->required();
  assemble_cmd->add_flag("--strict", a_strict, "fail on non-Eulerian components instead of greedy fallback");
  assemble_cmd->add_flag("--raw-multiplicity", a_raw, "walk each edge as many times as its k-mer frequency");

  // gen
  Common g;
  std::size_t g_len = 10000;
  std::size_t g_read = 100;
  std::optional<std::size_t> g_stride;
  std::optional<double> g_coverage;
  bool g_any = false;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic genome and reads");
  add_common(gen_cmd, g);
  gen_cmd->add_option("--length", g_len, "genome length")->capture_default_str();
  gen_cmd->add_option("--read-len", g_read, "read length")->capture_default_str();
  auto* stride_opt = gen_cmd->add_option("--stride", g_stride, "tile reads every N bases");
  gen_cmd->add_option("--coverage", g_coverage, "sample reads at random offsets to this coverage")->excludes(stride_opt);
  gen_cmd->add_flag("--any-genome", g_any, "skip the distinct (k-1)-mer requirement");

  // sweep
  Common s;
  std::string s_in;
  std::string s_trace;
  std::string s_pd_list = "1-8";
  std::string s_k_list;
  auto* sweep_cmd = app.add_subcommand("sweep", "runtime/power across parallelism degrees and k");
  add_common(sweep_cmd, s);
  auto* s_in_opt = sweep_cmd->add_option("--in", s_in, "reads to assemble for each k");
  sweep_cmd->add_option("--trace", s_trace, "re-price a saved trace instead of running")->excludes(s_in_opt);
  sweep_cmd->add_option("--pd-list", s_pd_list, "comma list or ranges, e.g. 1-8")->capture_default_str();
  sweep_cmd->add_option("--k-list", s_k_list, "comma list of k (defaults to --k)");

  // truthtable
  Common t;
  int t_fault = -1;
  auto* tt_cmd = app.add_subcommand("truthtable", "dump and self-check the sense amplifier truth table");
  add_common(tt_cmd, t);
  tt_cmd->add_option("--fault-maj-threshold", t_fault, "test hook: override the MAJ threshold")->group("");

  // calibrate
  Common cal;
  std::string cal_in;
  std::string cal_trace;
  double cal_time = 3.0;
  double cal_power = 7.0;
  std::size_t cal_target_pd = 8;
  auto* cal_cmd = app.add_subcommand("calibrate", "fit parallel_fraction and per-group leakage");
  add_common(cal_cmd, cal);
  auto* cal_in_opt = cal_cmd->add_option("--in", cal_in, "reads to assemble");
  cal_cmd->add_option("--trace", cal_trace, "saved trace")->excludes(cal_in_opt);
  cal_cmd->add_option("--time-ratio", cal_time, "runtime(1) / runtime(P)")->capture_default_str();
  cal_cmd->add_option("--power-ratio", cal_power, "power(P) / power(1)")->capture_default_str();
  cal_cmd->add_option("--target-pd", cal_target_pd, "P for the ratios")->capture_default_str();

  // plan
  Common pl;
  std::optional<std::uint64_t> pl_genome;
  auto* plan_cmd = app.add_subcommand("plan", "hash layout and capacity plan as JSON");
  add_common(plan_cmd, pl);
  plan_cmd->add_option("--genome-size", pl_genome, "genome size in bases for the capacity plan");

  // price
  Common pr;
  std::string pr_trace;
  auto* price_cmd = app.add_subcommand("price", "price a saved trace into a stage report");
  add_common(price_cmd, pr);
  price_cmd->add_option("--trace", pr_trace, "trace CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*assemble_cmd) {
      a.check();
      const CostConfig costs = a.costs();
      const auto reads = load_reads(a_in);
      const Run run = run_pipeline(a, reads, a.k, a_strict, a_raw);
      for (const auto& w : run.result.warnings) std::cerr << "warning: " << w << '\n';
      const StageReport rep = account(run.trace, costs, a.pd);
      const fs::path dir = a.out.empty() ? fs::path(".") : fs::path(a.out);
      fs::create_directories(dir);
      std::ostringstream fasta, kmers, edges;
      write_fasta(fasta, run.result.contigs, "contig_");
      run.result.table.write_tsv(kmers);
      run.result.graph.write_tsv(edges);
      write_file(dir / "contigs.fasta", fasta.str());
      write_file(dir / "report.json", to_json(rep).dump(2) + "\n");
      write_file(dir / "trace.csv", run.trace.to_csv());
      write_file(dir / "kmers.tsv", kmers.str());
      write_file(dir / "edges.tsv", edges.str());
      std::cout << run.result.contigs.size() << " contig(s), " << run.result.table.size() << " distinct " << a.k
                << "-mers, modeled runtime " << rep.pd_runtime_ns / 1e6 << " ms at P_d=" << a.pd << '\n';
      return kExitOk;
    }

    if (*gen_cmd) {
      g.check();
      if (g_read < 1 || g_len < 1) fail(Errc::configuration, "--length and --read-len must be positive");
      const EncodedSeq genome = random_genome(g_len, g.seed, g_any ? 0 : g.k - 1);
      const auto reads = g_coverage ? sample_reads(genome, g_read, *g_coverage, g.seed + 1)
                                    : tile_reads(genome, g_read, g_stride.value_or(1));
      const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
      fs::create_directories(dir);
      std::ostringstream gf, rf;
      write_fasta(gf, {genome}, "genome_");
      write_fasta(rf, reads, "read_");
      write_file(dir / "genome.fasta", gf.str());
      write_file(dir / "reads.fasta", rf.str());
      std::cout << reads.size() << " reads\n";
      return kExitOk;
    }

    if (*sweep_cmd) {
      s.check();
      const CostConfig costs = s.costs();
      const auto pds = parse_list(s_pd_list, "P_d");
      std::vector<std::pair<std::string, OpTrace>> series;
      if (!s_trace.empty()) {
        std::ifstream in(s_trace);
        if (!in) fail(Errc::parse, "cannot open " + s_trace);
        series.emplace_back("trace", OpTrace::read_csv(in));
      } else {
        if (s_in.empty()) fail(Errc::configuration, "sweep needs --in or --trace");
        const auto reads = load_reads(s_in);
        const auto ks = s_k_list.empty() ? std::vector<std::size_t>{s.k} : parse_list(s_k_list, "k");
        for (auto k : ks) {
          if (k < 2 || k > kMaxK) fail(Errc::configuration, "k must be in [2, 128]");
          series.emplace_back(std::to_string(k), run_pipeline(s, reads, k, false, false).trace);
        }
      }
      emit(s.out, [&](std::ostream& out) {
        out << "k,pd,runtime_ns,avg_power_mw,energy_nj\n";
        for (const auto& [label, trace] : series) write_sweep_csv(out, sweep_pd(trace, costs, pds), label);
      });
      return kExitOk;
    }

    if (*tt_cmd) {
      SenseThresholds th;
      if (t_fault >= 0) th.maj = t_fault;
      const auto rows = truth_table(th);
      std::size_t bad = 0;
      for (const auto& r : rows) bad += oracle_matches(r) ? 0 : 1;
      emit(t.out, [&](std::ostream& out) {
        write_truth_table(out, rows);
        out << (bad == 0 ? "self-check: ok\n" : "self-check: " + std::to_string(bad) + " mismatching row(s)\n");
      });
      return bad == 0 ? kExitOk : kExitSelfCheck;
    }

    if (*cal_cmd) {
      cal.check();
      OpTrace trace;
      if (!cal_trace.empty()) {
        std::ifstream in(cal_trace);
        if (!in) fail(Errc::parse, "cannot open " + cal_trace);
        trace = OpTrace::read_csv(in);
      } else {
        if (cal_in.empty()) fail(Errc::configuration, "calibrate needs --in or --trace");
        trace = run_pipeline(cal, load_reads(cal_in), cal.k, false, false).trace;
      }
      const CostConfig fitted = calibrate(trace, cal.costs(), cal_time, cal_power, cal_target_pd);
      emit(cal.out, [&](std::ostream& out) { out << fitted.to_json().dump(2) << '\n'; });
      return kExitOk;
    }

    if (*plan_cmd) {
      pl.check();
      nlohmann::json j;
      j["hash_layout"] = to_json(layout_hash(pl.geometry(), pl.k));
      if (pl_genome) j["capacity"] = to_json(capacity_plan(*pl_genome, pl.k, pl.geometry()));
      emit(pl.out, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
      return kExitOk;
    }

    if (*price_cmd) {
      pr.check();
      std::ifstream in(pr_trace);
      if (!in) fail(Errc::parse, "cannot open " + pr_trace);
      const StageReport rep = account(OpTrace::read_csv(in), pr.costs(), pr.pd);
      emit(pr.out, [&](std::ostream& out) { out << to_json(rep).dump(2) << '\n'; });
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "panda: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "panda: " << e.what() << '\n';
    return kExitSelfCheck;
  }
  return kExitOk;
}
