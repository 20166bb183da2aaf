#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "panda/fabric.hpp"

namespace panda {

/// One input pattern under one sense configuration, as sensed by a
/// sub-array. For the Read config the outputs are the three cells read back
/// one row at a time (or3/maj/and3 slots carry a/b/c).
struct TruthRow {
  SenseConfig config;
  std::array<bool, 3> in{};
  bool or3 = false, maj = false, and3 = false, xor3 = false;
  bool nor3 = false, min = false, nand3 = false;
  /// The output the configuration is selected for (the read value of `a`
  /// for Read).
  bool primary = false;
};

/// All legal configurations x 8 patterns, evaluated on a scratch sub-array
/// with the given sense thresholds. Pattern p sets a = bit 2, b = bit 1,
/// c = bit 0 of p.
inline std::vector<TruthRow> truth_table(SenseThresholds thresholds = {}) {
  SubArray sub(16, 8);
  sub.set_thresholds(thresholds);
  std::vector<TruthRow> rows;
  for (const auto& cfg : sense::kLegal) {
    for (unsigned p = 0; p < 8; ++p) {
      TruthRow r;
      r.config = cfg;
      r.in = {bool(p & 4U), bool(p & 2U), bool(p & 1U)};
      for (RowIndex i = 0; i < 3; ++i) sub.write_cell(i, 0, r.in[i]);
      if (cfg == sense::kRead) {
        r.or3 = sub.read_row(0).get(0);
        r.maj = sub.read_row(1).get(0);
        r.and3 = sub.read_row(2).get(0);
        r.primary = r.or3;
      } else {
        const SenseOutput out = sub.activate({0, 1, 2}, cfg);
        r.or3 = out.or3.get(0);
        r.maj = out.maj.get(0);
        r.and3 = out.and3.get(0);
        r.xor3 = out.xor3.get(0);
        r.nor3 = out.nor3.get(0);
        r.min = out.min.get(0);
        r.nand3 = out.nand3.get(0);
        if (cfg == sense::kAnd3) r.primary = r.and3;
        else if (cfg == sense::kOr3) r.primary = r.or3;
        else if (cfg == sense::kMaj) r.primary = r.maj;
        else r.primary = r.xor3;
      }
      rows.push_back(r);
    }
  }
  return rows;
}

inline void write_truth_table(std::ostream& out, const std::vector<TruthRow>& rows) {
  out << "config  c_and3 c_maj c_or3 c_m  a b c | out or3 maj and3 xor3 nor3 min nand3\n";
  for (const auto& r : rows) {
    const auto& c = r.config;
    std::string name = sense::name(c);
    name.resize(6, ' ');
    out << name << "  " << c.c_and3 << "      " << c.c_maj << "     " << c.c_or3 << "     " << c.c_m << "    "
        << r.in[0] << ' ' << r.in[1] << ' ' << r.in[2] << " |  " << r.primary << "   " << r.or3 << "   " << r.maj
        << "    " << r.and3 << "    " << r.xor3 << "    " << r.nor3 << "   " << r.min << "    " << r.nand3 << '\n';
  }
}

}  // namespace panda
