#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panda/bitvector.hpp"
#include "panda/error.hpp"
#include "panda/trace.hpp"

namespace panda {

using RowIndex = std::size_t;
using ColIndex = std::size_t;
using SubArrayId = std::size_t;

struct RowRange {
  RowIndex begin = 0;
  RowIndex end = 0;  // exclusive

  std::size_t size() const noexcept { return end - begin; }
  bool contains(RowIndex r) const noexcept { return r >= begin && r < end; }
  friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// Rows with a fixed role inside a sub-array. Everything outside the special
/// rows and inside data_region is free for operands.
struct RowLayout {
  RowIndex init0_row = 0;
  RowIndex init1_row = 0;
  std::vector<RowIndex> carry_rows;
  std::vector<RowIndex> temp_rows;
  std::vector<RowIndex> resv_rows;
  RowRange data_region;

  /// Special rows packed at the top of the array: for rows >= 16 the order is
  /// temp x2, init0, init1, carry x2, resv x6 (12 rows); smaller arrays get a
  /// compact temp, init0, init1, carry x2 block.
  static RowLayout standard(std::size_t rows) {
    if (rows < 8) fail(Errc::configuration, "sub-array needs at least 8 rows");
    RowLayout l;
    if (rows >= 16) {
      const RowIndex base = rows - 12;
      l.temp_rows = {base, base + 1};
      l.init0_row = base + 2;
      l.init1_row = base + 3;
      l.carry_rows = {base + 4, base + 5};
      l.resv_rows = {base + 6, base + 7, base + 8, base + 9, base + 10, base + 11};
      l.data_region = {0, base};
    } else {
      const RowIndex base = rows - 5;
      l.temp_rows = {base};
      l.init0_row = base + 1;
      l.init1_row = base + 2;
      l.carry_rows = {base + 3, base + 4};
      l.data_region = {0, base};
    }
    return l;
  }

  std::vector<RowIndex> special_rows() const {
    std::vector<RowIndex> rows{init0_row, init1_row};
    rows.insert(rows.end(), carry_rows.begin(), carry_rows.end());
    rows.insert(rows.end(), temp_rows.begin(), temp_rows.end());
    rows.insert(rows.end(), resv_rows.begin(), resv_rows.end());
    return rows;
  }

  bool is_init(RowIndex r) const noexcept { return r == init0_row || r == init1_row; }
  bool is_carry(RowIndex r) const noexcept {
    return std::find(carry_rows.begin(), carry_rows.end(), r) != carry_rows.end();
  }

  void validate(std::size_t rows) const {
    auto special = special_rows();
    if (carry_rows.size() < 2) fail(Errc::configuration, "layout needs at least two carry rows");
    for (auto r : special) {
      if (r >= rows) fail(Errc::configuration, "special row out of bounds");
      if (data_region.contains(r)) fail(Errc::configuration, "data region overlaps a special row");
    }
    std::sort(special.begin(), special.end());
    if (std::adjacent_find(special.begin(), special.end()) != special.end()) {
      fail(Errc::configuration, "special rows must be distinct");
    }
    if (data_region.begin > data_region.end || data_region.end > rows) {
      fail(Errc::configuration, "data region out of bounds");
    }
  }
};

/// Enable bits of the reconfigurable sense amplifier.
struct SenseConfig {
  bool c_and3 = false;
  bool c_maj = false;
  bool c_or3 = false;
  bool c_m = false;

  friend bool operator==(const SenseConfig&, const SenseConfig&) = default;
};

namespace sense {
inline constexpr SenseConfig kRead{false, false, false, true};
inline constexpr SenseConfig kAnd3{true, false, false, false};
inline constexpr SenseConfig kOr3{false, false, true, false};
inline constexpr SenseConfig kMaj{false, true, false, false};
inline constexpr SenseConfig kXor3{true, true, true, false};

/// The legal rows of the control-bit table.
inline constexpr std::array<SenseConfig, 5> kLegal = {kRead, kAnd3, kOr3, kMaj, kXor3};
/// Multi-row compute configurations (everything but Read).
inline constexpr std::array<SenseConfig, 4> kCompute = {kAnd3, kOr3, kMaj, kXor3};

inline bool is_legal(const SenseConfig& cfg) {
  return std::find(kLegal.begin(), kLegal.end(), cfg) != kLegal.end();
}

inline std::string name(const SenseConfig& cfg) {
  if (cfg == kRead) return "READ";
  if (cfg == kAnd3) return "AND3";
  if (cfg == kOr3) return "OR3";
  if (cfg == kMaj) return "MAJ";
  if (cfg == kXor3) return "XOR3";
  return "ILLEGAL";
}
}  // namespace sense

/// Per-column readout of one activation. All thresholds are sensed at once;
/// complements are the differential outputs. `read` is only set by read_row.
struct SenseOutput {
  BitVector or3, maj, and3, xor3;
  BitVector nor3, min, nand3;
  std::optional<BitVector> read;
};

/// Reference ladder expressed as the number of 1-cells each sub-SA needs to
/// fire. Stock values are 1 (OR3), 2 (MAJ), 3 (AND3); the setter is a test
/// hook for fault injection.
struct SenseThresholds {
  int or3 = 1;
  int maj = 2;
  int and3 = 3;
};

struct FullAddOutput {
  BitVector sum;
  BitVector carry;
};

enum class Logic2 { And, Or, Nand, Nor, Xor, Xnor };

/// One computational sub-array: a rows x cols grid of binary cells (1 is the
/// anti-parallel / high-resistance state), its row layout, and its own cost
/// trace. Not thread-safe; distinct sub-arrays may be driven concurrently.
class SubArray {
 public:
  SubArray(std::size_t rows = 1024, std::size_t cols = 256)
      : SubArray(rows, cols, RowLayout::standard(rows)) {}

  SubArray(std::size_t rows, std::size_t cols, RowLayout layout)
      : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64), layout_(std::move(layout)) {
    if (rows < 8 || cols < 1) fail(Errc::configuration, "sub-array must have rows >= 8 and cols >= 1");
    layout_.validate(rows);
    cells_.assign(rows_ * words_per_row_, 0);
    auto init1 = row_words(layout_.init1_row);
    std::fill(init1.begin(), init1.end(), ~std::uint64_t{0});
    trim_row(layout_.init1_row);
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const RowLayout& layout() const noexcept { return layout_; }
  OpTrace& trace() noexcept { return trace_; }
  const OpTrace& trace() const noexcept { return trace_; }

  void set_thresholds(SenseThresholds t) noexcept { thresholds_ = t; }
  const SenseThresholds& thresholds() const noexcept { return thresholds_; }

  void write_cell(RowIndex row, ColIndex col, bool value) {
    check_writable(row);
    check_col(col);
    set_bit(row, col, value);
    trace_.record(EventKind::W);
  }

  /// Writes a whole row (one W cycle).
  void write_row(RowIndex row, const BitVector& bits) {
    check_writable(row);
    if (bits.size() != cols_) fail(Errc::shape, "row write width differs from column count");
    auto dst = row_words(row);
    std::copy(bits.words().begin(), bits.words().end(), dst.begin());
    trace_.record(EventKind::W);
  }

  /// Writes the columns selected by `mask` (one W cycle, row-granular).
  void write_row_masked(RowIndex row, const BitVector& bits, const BitVector& mask) {
    check_writable(row);
    if (bits.size() != cols_ || mask.size() != cols_) fail(Errc::shape, "row write width differs from column count");
    auto dst = row_words(row);
    const auto src = bits.words();
    const auto m = mask.words();
    for (std::size_t w = 0; w < words_per_row_; ++w) dst[w] = (dst[w] & ~m[w]) | (src[w] & m[w]);
    trace_.record(EventKind::W);
  }

  BitVector read_row(RowIndex row) {
    check_row(row);
    trace_.record(EventKind::R);
    return peek_row(row);
  }

  SenseOutput activate(const std::array<RowIndex, 3>& rows, const SenseConfig& cfg) {
    check_activation(rows, cfg);
    const Levels lv = sense_levels(rows);
    trace_.record(cost_class(cfg));
    SenseOutput out{lv.or3, lv.maj, lv.and3, lv.xor3, ~lv.or3, ~lv.maj, ~lv.and3, std::nullopt};
    return out;
  }

  /// Carry = MAJ, Sum = XOR3 from a single activation. Results are not written.
  FullAddOutput full_add_cycle(const std::array<RowIndex, 3>& rows) {
    check_activation(rows, sense::kXor3);
    Levels lv = sense_levels(rows);
    trace_.record(EventKind::C_ADD);
    return {std::move(lv.xor3), std::move(lv.maj)};
  }

  /// XOR3 output only; the cheap path used by comparisons.
  BitVector sense_xor3(const std::array<RowIndex, 3>& rows) {
    check_activation(rows, sense::kXor3);
    Levels lv = sense_levels(rows);
    trace_.record(EventKind::C_ADD);
    return std::move(lv.xor3);
  }

  bool peek(RowIndex row, ColIndex col) const {
    check_row(row);
    check_col(col);
    return (cells_[row * words_per_row_ + (col >> 6)] >> (col & 63)) & 1U;
  }

  BitVector peek_row(RowIndex row) const {
    check_row(row);
    BitVector out(cols_);
    auto src = row_words(row);
    std::copy(src.begin(), src.end(), out.words().begin());
    return out;
  }

  /// One line of '0'/'1' per row.
  std::string dump() const {
    std::string s;
    s.reserve(rows_ * (cols_ + 1));
    for (RowIndex r = 0; r < rows_; ++r) {
      s += peek_row(r).to_string();
      s += '\n';
    }
    return s;
  }

  friend bool operator==(const SubArray& a, const SubArray& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.cells_ == b.cells_;
  }

 private:
  struct Levels {
    BitVector or3, maj, and3, xor3;
  };

  static EventKind cost_class(const SenseConfig& cfg) {
    return cfg == sense::kXor3 ? EventKind::C_ADD : EventKind::C_AND3;
  }

  void check_row(RowIndex row) const {
    if (row >= rows_) fail(Errc::address, "row " + std::to_string(row) + " out of bounds");
  }
  void check_col(ColIndex col) const {
    if (col >= cols_) fail(Errc::address, "column " + std::to_string(col) + " out of bounds");
  }
  void check_writable(RowIndex row) const {
    check_row(row);
    if (layout_.is_init(row)) fail(Errc::protection, "row " + std::to_string(row) + " is a logic-init row");
  }

  void check_activation(const std::array<RowIndex, 3>& rows, const SenseConfig& cfg) const {
    if (!sense::is_legal(cfg)) fail(Errc::configuration, "sense configuration not in the control table");
    if (cfg == sense::kRead) fail(Errc::configuration, "read senses a single row; use read_row");
    for (auto r : rows) check_row(r);
    if (rows[0] == rows[1] || rows[0] == rows[2] || rows[1] == rows[2]) {
      fail(Errc::address, "activated rows must be distinct");
    }
  }

  static std::uint64_t threshold(int t, std::uint64_t one, std::uint64_t two, std::uint64_t three) {
    switch (t) {
      case 0: return ~std::uint64_t{0};
      case 1: return one;
      case 2: return two;
      case 3: return three;
      default: return 0;
    }
  }

  /// Bit-sliced column count: a column fires a sub-SA when its number of
  /// 1-cells reaches that sub-SA's threshold. XOR3 is the Add-box mux of the
  /// three sub-SA outputs: MAJ ? AND3 : OR3.
  Levels sense_levels(const std::array<RowIndex, 3>& rows) const {
    Levels lv{BitVector(cols_), BitVector(cols_), BitVector(cols_), BitVector(cols_)};
    const auto a = row_words(rows[0]);
    const auto b = row_words(rows[1]);
    const auto c = row_words(rows[2]);
    auto o = lv.or3.words();
    auto m = lv.maj.words();
    auto n = lv.and3.words();
    auto x = lv.xor3.words();
    for (std::size_t w = 0; w < words_per_row_; ++w) {
      const std::uint64_t ge1 = a[w] | b[w] | c[w];
      const std::uint64_t ge2 = (a[w] & b[w]) | (a[w] & c[w]) | (b[w] & c[w]);
      const std::uint64_t ge3 = a[w] & b[w] & c[w];
      o[w] = threshold(thresholds_.or3, ge1, ge2, ge3);
      m[w] = threshold(thresholds_.maj, ge1, ge2, ge3);
      n[w] = threshold(thresholds_.and3, ge1, ge2, ge3);
      x[w] = (~m[w] & o[w]) | (m[w] & n[w]);
    }
    if (cols_ % 64 != 0) {
      const std::uint64_t tail = (std::uint64_t{1} << (cols_ % 64)) - 1;
      o.back() &= tail;
      m.back() &= tail;
      n.back() &= tail;
      x.back() &= tail;
    }
    return lv;
  }

  std::span<std::uint64_t> row_words(RowIndex row) {
    return {cells_.data() + row * words_per_row_, words_per_row_};
  }
  std::span<const std::uint64_t> row_words(RowIndex row) const {
    return {cells_.data() + row * words_per_row_, words_per_row_};
  }

  void set_bit(RowIndex row, ColIndex col, bool v) {
    auto& w = cells_[row * words_per_row_ + (col >> 6)];
    const std::uint64_t bit = std::uint64_t{1} << (col & 63);
    w = v ? (w | bit) : (w & ~bit);
  }

  void trim_row(RowIndex row) {
    if (cols_ % 64 != 0) row_words(row).back() &= (std::uint64_t{1} << (cols_ % 64)) - 1;
  }

  std::size_t rows_;
  std::size_t cols_;
  std::size_t words_per_row_;
  RowLayout layout_;
  std::vector<std::uint64_t> cells_;
  SenseThresholds thresholds_;
  OpTrace trace_;
};

/// Two-input logic through the init rows: AND/NAND/XNOR pair the operands
/// with the all-1 row, OR/NOR/XOR with the all-0 row.
inline BitVector logic2(SubArray& sub, Logic2 op, RowIndex a, RowIndex b) {
  const auto& l = sub.layout();
  switch (op) {
    case Logic2::And: return sub.activate({a, b, l.init1_row}, sense::kAnd3).and3;
    case Logic2::Nand: return sub.activate({a, b, l.init1_row}, sense::kAnd3).nand3;
    case Logic2::Or: return sub.activate({a, b, l.init0_row}, sense::kOr3).or3;
    case Logic2::Nor: return sub.activate({a, b, l.init0_row}, sense::kOr3).nor3;
    case Logic2::Xor: return sub.activate({a, b, l.init0_row}, sense::kXor3).xor3;
    case Logic2::Xnor: return sub.activate({a, b, l.init1_row}, sense::kXor3).xor3;
  }
  fail(Errc::configuration, "unknown two-input function");
}

struct Geometry {
  std::size_t rows = 1024;
  std::size_t cols = 256;

  /// Vertices one sub-array can hold in the column-per-vertex mapping.
  std::size_t f() const noexcept { return std::min(rows, cols); }
  friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// A pool of identical sub-arrays plus the host-side trace (DPU and transfer
/// events that belong to no single sub-array). Sub-arrays are created on
/// demand and never move once allocated.
class Fabric {
 public:
  explicit Fabric(Geometry geometry = {}) : geometry_(geometry) {
    RowLayout::standard(geometry.rows).validate(geometry.rows);
    if (geometry.cols < 1) fail(Errc::configuration, "sub-array needs at least one column");
  }

  const Geometry& geometry() const noexcept { return geometry_; }
  std::size_t size() const noexcept { return subs_.size(); }

  SubArrayId allocate() {
    subs_.push_back(std::make_unique<SubArray>(geometry_.rows, geometry_.cols));
    subs_.back()->trace().set_stage(stage_);
    subs_.back()->set_thresholds(thresholds_);
    return subs_.size() - 1;
  }

  SubArray& subarray(SubArrayId id) {
    if (id >= subs_.size()) fail(Errc::address, "sub-array " + std::to_string(id) + " does not exist");
    return *subs_[id];
  }
  const SubArray& subarray(SubArrayId id) const {
    if (id >= subs_.size()) fail(Errc::address, "sub-array " + std::to_string(id) + " does not exist");
    return *subs_[id];
  }

  OpTrace& host_trace() noexcept { return host_; }
  const OpTrace& host_trace() const noexcept { return host_; }

  void set_stage(Stage stage) {
    stage_ = stage;
    host_.set_stage(stage);
    for (auto& s : subs_) s->trace().set_stage(stage);
  }
  Stage stage() const noexcept { return stage_; }

  void set_thresholds(SenseThresholds t) {
    thresholds_ = t;
    for (auto& s : subs_) s->set_thresholds(t);
  }

  /// Host events first, then each sub-array's events in id order.
  OpTrace merged_trace() const {
    OpTrace out;
    out.append(host_);
    for (const auto& s : subs_) out.append(s->trace());
    return out;
  }

 private:
  Geometry geometry_;
  std::vector<std::unique_ptr<SubArray>> subs_;
  OpTrace host_;
  Stage stage_ = Stage::other;
  SenseThresholds thresholds_;
};

}  // namespace panda
