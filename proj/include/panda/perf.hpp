#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "panda/error.hpp"
#include "panda/trace.hpp"

namespace panda {

struct ClassCost {
  double latency_ns = 0;
  double energy_nj = 0;
  friend bool operator==(const ClassCost&, const ClassCost&) = default;
};

/// Per-event prices plus the parallelism model. XFER is priced per byte.
struct CostConfig {
  ClassCost R{3.91, 0.78};
  ClassCost W{4.59, 0.69};
  ClassCost C_AND3{3.91, 0.85};
  ClassCost C_ADD{3.91, 1.93};
  ClassCost DPU{0.05, 0.01};
  ClassCost XFER{1.0 / 64, 0.1 / 64};  // one 64-byte burst: 1 ns, 0.1 nJ
  double leakage_base_mw = 586;
  double leakage_per_group_mw = 0;
  double parallel_fraction = 16.0 / 21.0;
  double area_mm2 = 9.3;
  double penalty_multiplier = 1.0;

  const ClassCost& cost(EventKind kind) const {
    switch (kind) {
      case EventKind::R: return R;
      case EventKind::W: return W;
      case EventKind::C_AND3: return C_AND3;
      case EventKind::C_ADD: return C_ADD;
      case EventKind::DPU: return DPU;
      case EventKind::XFER: return XFER;
    }
    fail(Errc::configuration, "unknown event class");
  }
  ClassCost& cost(EventKind kind) { return const_cast<ClassCost&>(std::as_const(*this).cost(kind)); }

  void validate() const {
    for (auto k : kAllEventKinds) {
      const auto& c = cost(k);
      if (!(c.latency_ns >= 0) || !(c.energy_nj >= 0)) {
        fail(Errc::configuration, "negative cost for " + std::string(to_string(k)));
      }
    }
    if (!(leakage_base_mw >= 0) || !(leakage_per_group_mw >= 0)) fail(Errc::configuration, "negative leakage");
    if (!(parallel_fraction >= 0 && parallel_fraction <= 1)) {
      fail(Errc::configuration, "parallel_fraction must be in [0, 1]");
    }
    if (!(area_mm2 >= 0) || !(penalty_multiplier > 0)) fail(Errc::configuration, "bad area or penalty multiplier");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    for (auto k : kAllEventKinds) {
      const std::string name(to_string(k));
      if (k == EventKind::XFER) {
        j["XFER.ns_per_byte"] = XFER.latency_ns;
        j["XFER.nj_per_byte"] = XFER.energy_nj;
      } else {
        j[name + ".latency_ns"] = cost(k).latency_ns;
        j[name + ".energy_nj"] = cost(k).energy_nj;
      }
    }
    j["leakage.base_mw"] = leakage_base_mw;
    j["leakage.per_group_mw"] = leakage_per_group_mw;
    j["parallel_fraction"] = parallel_fraction;
    j["area_mm2"] = area_mm2;
    j["penalty_multiplier"] = penalty_multiplier;
    return j;
  }

  /// Flat key-value object; missing keys keep their defaults.
  static CostConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(Errc::configuration, "cost config must be a JSON object");
    CostConfig c;
    for (const auto& [key, value] : j.items()) {
      if (!value.is_number()) fail(Errc::configuration, "cost config value for '" + key + "' is not a number");
      const double v = value.get<double>();
      if (key == "leakage.base_mw") c.leakage_base_mw = v;
      else if (key == "leakage.per_group_mw") c.leakage_per_group_mw = v;
      else if (key == "parallel_fraction") c.parallel_fraction = v;
      else if (key == "area_mm2") c.area_mm2 = v;
      else if (key == "penalty_multiplier") c.penalty_multiplier = v;
      else if (key == "XFER.ns_per_byte") c.XFER.latency_ns = v;
      else if (key == "XFER.nj_per_byte") c.XFER.energy_nj = v;
      else {
        const auto dot = key.find('.');
        const auto kind = dot == std::string::npos ? std::nullopt : parse_event_kind(key.substr(0, dot));
        const std::string field = dot == std::string::npos ? "" : key.substr(dot + 1);
        if (!kind || *kind == EventKind::XFER || (field != "latency_ns" && field != "energy_nj")) {
          fail(Errc::configuration, "unknown cost config key '" + key + "'");
        }
        (field == "latency_ns" ? c.cost(*kind).latency_ns : c.cost(*kind).energy_nj) = v;
      }
    }
    c.validate();
    return c;
  }

  static CostConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::configuration, "cannot open cost config " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::configuration, "cost config " + path + ": " + e.what());
    }
    return from_json(j);
  }

  friend bool operator==(const CostConfig&, const CostConfig&) = default;
};

/// Costs of one stage (or the total). Times in ns, energies in nJ, power in mW.
struct StageCost {
  KindTotals cycles{};
  double latency_ns = 0;
  double dynamic_nj = 0;
  double leakage_nj = 0;
  double energy_nj = 0;
  double avg_power_mw = 0;
  friend bool operator==(const StageCost&, const StageCost&) = default;
};

struct StageReport {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  std::array<StageCost, kStageCount> stages{};
  StageCost total;
  double mbr = 0;
  double rur = 0;
  std::size_t pd = 1;
  double pd_runtime_ns = 0;
  double pd_avg_power_mw = 0;
  double pd_energy_nj = 0;
  double area_mm2 = 0;

  const StageCost& stage(Stage s) const { return stages[static_cast<std::size_t>(s)]; }

  /// Fraction of total latency spent in `s`.
  double fraction(Stage s) const { return total.latency_ns > 0 ? stage(s).latency_ns / total.latency_ns : 0.0; }

  friend bool operator==(const StageReport&, const StageReport&) = default;
};

namespace detail {

inline double power_mw(double energy_nj, double latency_ns) {
  return latency_ns > 0 ? energy_nj / latency_ns * 1000.0 : 0.0;
}

inline nlohmann::json to_json(const StageCost& c) {
  nlohmann::json cycles = nlohmann::json::object();
  for (auto k : kAllEventKinds) cycles[std::string(to_string(k))] = c.cycles[static_cast<std::size_t>(k)];
  return {{"cycles", cycles},           {"latency_ns", c.latency_ns}, {"dynamic_nj", c.dynamic_nj},
          {"leakage_nj", c.leakage_nj}, {"energy_nj", c.energy_nj},   {"avg_power_mw", c.avg_power_mw}};
}

inline StageCost stage_cost_from_json(const nlohmann::json& j) {
  StageCost c;
  for (auto k : kAllEventKinds) c.cycles[static_cast<std::size_t>(k)] = j.at("cycles").at(std::string(to_string(k)));
  c.latency_ns = j.at("latency_ns");
  c.dynamic_nj = j.at("dynamic_nj");
  c.leakage_nj = j.at("leakage_nj");
  c.energy_nj = j.at("energy_nj");
  c.avg_power_mw = j.at("avg_power_mw");
  return c;
}

}  // namespace detail

struct SweepPoint {
  std::size_t pd = 1;
  double runtime_ns = 0;
  double avg_power_mw = 0;
  double energy_nj = 0;
};

/// runtime(P) = (1 - pf) T1 + pf T1 / P; power(P) = E_dyn / runtime + L0 + Lg P.
inline SweepPoint sweep_point(const StageReport& serial, const CostConfig& cfg, std::size_t pd) {
  if (pd < 1) fail(Errc::range, "parallelism degree must be at least 1");
  const double t1 = serial.total.latency_ns;
  const double pf = cfg.parallel_fraction;
  SweepPoint p;
  p.pd = pd;
  p.runtime_ns = pd == 1 ? t1 : (1.0 - pf) * t1 + pf * t1 / static_cast<double>(pd);
  p.avg_power_mw = detail::power_mw(serial.total.dynamic_nj, p.runtime_ns) + cfg.leakage_base_mw +
                   cfg.leakage_per_group_mw * static_cast<double>(pd);
  if (t1 == 0) p.avg_power_mw = 0;
  p.energy_nj = p.avg_power_mw * p.runtime_ns * 1e-3;
  return p;
}

/// Prices a trace with every event serialized (one active group). Leakage is
/// charged at base + one group so that P_d = 1 of the sweep reproduces it.
inline StageReport account(const OpTrace& trace, const CostConfig& cfg, std::size_t pd = 1) {
  cfg.validate();
  StageReport rep;
  rep.area_mm2 = cfg.area_mm2;
  const double leak_mw = cfg.leakage_base_mw + cfg.leakage_per_group_mw;
  const double m = cfg.penalty_multiplier;
  double xfer_ns = 0;
  double fabric_ns = 0;
  for (auto st : kAllStages) {
    StageCost& sc = rep.stages[static_cast<std::size_t>(st)];
    sc.cycles = trace.totals(st);
    for (auto k : kAllEventKinds) {
      const auto n = static_cast<double>(sc.cycles[static_cast<std::size_t>(k)]);
      const auto& c = cfg.cost(k);
      sc.latency_ns += n * c.latency_ns;
      sc.dynamic_nj += n * c.energy_nj;
      if (k == EventKind::XFER) xfer_ns += n * c.latency_ns;
      else if (k != EventKind::DPU) fabric_ns += n * c.latency_ns;
    }
    sc.latency_ns *= m;
    sc.dynamic_nj *= m;
    sc.leakage_nj = leak_mw * sc.latency_ns * 1e-3;
    sc.energy_nj = sc.dynamic_nj + sc.leakage_nj;
    sc.avg_power_mw = detail::power_mw(sc.energy_nj, sc.latency_ns);
    for (std::size_t i = 0; i < kEventKindCount; ++i) rep.total.cycles[i] += sc.cycles[i];
    rep.total.latency_ns += sc.latency_ns;
    rep.total.dynamic_nj += sc.dynamic_nj;
    rep.total.leakage_nj += sc.leakage_nj;
  }
  rep.total.energy_nj = rep.total.dynamic_nj + rep.total.leakage_nj;
  rep.total.avg_power_mw = detail::power_mw(rep.total.energy_nj, rep.total.latency_ns);
  const double unscaled = rep.total.latency_ns / m;
  if (unscaled > 0) {
    rep.mbr = xfer_ns / unscaled;
    rep.rur = fabric_ns / unscaled;
  }
  const SweepPoint p = sweep_point(rep, cfg, pd);
  rep.pd = pd;
  rep.pd_runtime_ns = p.runtime_ns;
  rep.pd_avg_power_mw = p.avg_power_mw;
  rep.pd_energy_nj = p.energy_nj;
  return rep;
}

struct MemoryWall {
  double mbr = 0;
  double rur = 0;
};

inline MemoryWall memory_wall_metrics(const OpTrace& trace, const CostConfig& cfg) {
  const auto rep = account(trace, cfg);
  return {rep.mbr, rep.rur};
}

inline std::vector<SweepPoint> sweep_pd(const OpTrace& trace, const CostConfig& cfg, std::span<const std::size_t> pds) {
  if (pds.empty()) fail(Errc::range, "empty parallelism-degree list");
  const StageReport serial = account(trace, cfg);
  std::vector<SweepPoint> out;
  out.reserve(pds.size());
  for (auto pd : pds) out.push_back(sweep_point(serial, cfg, pd));
  return out;
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points, std::string_view series = {}) {
  out << std::setprecision(17);
  for (const auto& p : points) {
    if (!series.empty()) out << series << ',';
    out << p.pd << ',' << p.runtime_ns << ',' << p.avg_power_mw << ',' << p.energy_nj << '\n';
  }
}

/// Fits parallel_fraction to a runtime ratio and leakage_per_group to a power
/// ratio between P_d = 1 and P_d = `pd` on the given trace.
inline CostConfig calibrate(const OpTrace& trace, CostConfig cfg, double time_ratio = 3.0, double power_ratio = 7.0,
                            std::size_t pd = 8) {
  if (pd < 2 || !(time_ratio >= 1) || time_ratio > static_cast<double>(pd)) {
    fail(Errc::range, "time ratio must be in [1, pd] with pd >= 2");
  }
  if (!(power_ratio < static_cast<double>(pd))) fail(Errc::range, "power ratio must be below pd");
  const double P = static_cast<double>(pd);
  cfg.parallel_fraction = (1.0 - 1.0 / time_ratio) / (1.0 - 1.0 / P);
  cfg.leakage_per_group_mw = 0;
  const StageReport serial = account(trace, cfg);
  if (serial.total.latency_ns <= 0) fail(Errc::range, "cannot calibrate on an empty trace");
  const double d = detail::power_mw(serial.total.dynamic_nj, serial.total.latency_ns);
  const double l0 = cfg.leakage_base_mw;
  const double lg = (power_ratio * d + power_ratio * l0 - time_ratio * d - l0) / (P - power_ratio);
  if (lg < 0) fail(Errc::range, "power ratio unreachable with nonnegative per-group leakage");
  cfg.leakage_per_group_mw = lg;
  return cfg;
}

inline nlohmann::json to_json(const StageReport& r) {
  nlohmann::json stages = nlohmann::json::object();
  for (auto st : kAllStages) stages[std::string(to_string(st))] = detail::to_json(r.stage(st));
  return {{"schema_version", r.schema_version},
          {"stages", stages},
          {"total", detail::to_json(r.total)},
          {"mbr", r.mbr},
          {"rur", r.rur},
          {"pd", r.pd},
          {"pd_runtime_ns", r.pd_runtime_ns},
          {"pd_avg_power_mw", r.pd_avg_power_mw},
          {"pd_energy_nj", r.pd_energy_nj},
          {"area_mm2", r.area_mm2}};
}

inline StageReport report_from_json(const nlohmann::json& j) {
  try {
    StageReport r;
    r.schema_version = j.at("schema_version");
    if (r.schema_version != StageReport::kSchemaVersion) fail(Errc::configuration, "unsupported report schema");
    for (auto st : kAllStages) {
      r.stages[static_cast<std::size_t>(st)] = detail::stage_cost_from_json(j.at("stages").at(std::string(to_string(st))));
    }
    r.total = detail::stage_cost_from_json(j.at("total"));
    r.mbr = j.at("mbr");
    r.rur = j.at("rur");
    r.pd = j.at("pd");
    r.pd_runtime_ns = j.at("pd_runtime_ns");
    r.pd_avg_power_mw = j.at("pd_avg_power_mw");
    r.pd_energy_nj = j.at("pd_energy_nj");
    r.area_mm2 = j.at("area_mm2");
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, std::string("report: ") + e.what());
  }
}

/// Per-stage breakdown rows: stage, cycles per class, latency, energy, share.
inline void write_report_csv(std::ostream& out, const StageReport& r) {
  out << std::setprecision(17) << "stage";
  for (auto k : kAllEventKinds) out << ',' << to_string(k);
  out << ",latency_ns,dynamic_nj,energy_nj,avg_power_mw,latency_share\n";
  auto row = [&](std::string_view name, const StageCost& c, double share) {
    out << name;
    for (auto n : c.cycles) out << ',' << n;
    out << ',' << c.latency_ns << ',' << c.dynamic_nj << ',' << c.energy_nj << ',' << c.avg_power_mw << ',' << share
        << '\n';
  };
  for (auto st : kAllStages) row(to_string(st), r.stage(st), r.fraction(st));
  row("total", r.total, r.total.latency_ns > 0 ? 1.0 : 0.0);
}

/// Side-by-side rows, one per report. Stage columns are percentages of the
/// report's own serial latency.
struct ComparisonTable {
  std::vector<std::string> labels;
  std::vector<StageReport> reports;

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      nlohmann::json share = nlohmann::json::object();
      for (auto st : kAllStages) share[std::string(to_string(st))] = 100.0 * r.fraction(st);
      rows.push_back({{"label", labels[i]},
                      {"runtime_ns", r.pd_runtime_ns},
                      {"energy_nj", r.pd_energy_nj},
                      {"avg_power_mw", r.pd_avg_power_mw},
                      {"pd", r.pd},
                      {"mbr", r.mbr},
                      {"rur", r.rur},
                      {"stage_percent", share}});
    }
    return rows;
  }

  void write_csv(std::ostream& out) const {
    out << std::setprecision(17) << "label,pd,runtime_ns,energy_nj,avg_power_mw,mbr,rur";
    for (auto st : kAllStages) out << ",pct_" << to_string(st);
    out << '\n';
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      out << labels[i] << ',' << r.pd << ',' << r.pd_runtime_ns << ',' << r.pd_energy_nj << ',' << r.pd_avg_power_mw << ','
          << r.mbr << ',' << r.rur;
      for (auto st : kAllStages) out << ',' << 100.0 * r.fraction(st);
      out << '\n';
    }
  }
};

inline ComparisonTable comparison_table(std::vector<StageReport> reports, std::vector<std::string> labels) {
  if (reports.size() != labels.size()) fail(Errc::shape, "one label per report required");
  return {std::move(labels), std::move(reports)};
}

}  // namespace panda
