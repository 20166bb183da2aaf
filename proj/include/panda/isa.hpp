#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "panda/bitvector.hpp"
#include "panda/error.hpp"
#include "panda/fabric.hpp"
#include "panda/trace.hpp"

namespace panda {

/// Row-major operand. A region wider than the remaining row continues on the
/// following rows, which requires col_start == 0.
struct MemAddress {
  SubArrayId subarray = 0;
  RowIndex row = 0;
  ColIndex col_start = 0;
  std::size_t bit_len = 0;
};

/// A word stored down one column, LSB at the lowest row.
struct VerticalWordRef {
  SubArrayId subarray = 0;
  ColIndex col = 0;
  RowIndex lsb_row = 0;
  std::size_t width = 0;
};

/// The same vertical word slot across every column of a sub-array; the unit
/// of column-parallel arithmetic.
struct VerticalField {
  SubArrayId subarray = 0;
  RowIndex lsb_row = 0;
  std::size_t width = 0;

  VerticalWordRef at(ColIndex col) const { return {subarray, col, lsb_row, width}; }
};

struct CmpResult {
  bool equal = false;
  BitVector mask;
};

enum class DpuOp { compare_eq, compare_gt, add_small };

// ---------------------------------------------------------------------------
// DPU: scalar and reduction work that does not parallelize across bit-lines.

inline bool dpu_and_reduce(OpTrace& trace, const BitVector& mask) {
  if (mask.empty()) fail(Errc::shape, "cannot reduce an empty mask");
  trace.record(EventKind::DPU);
  return mask.all();
}

/// Booleans come back as 0/1.
inline std::int64_t dpu_scalar(OpTrace& trace, DpuOp op, std::int64_t x, std::int64_t y) {
  constexpr std::int64_t lo = std::numeric_limits<std::int32_t>::min();
  constexpr std::int64_t hi = std::numeric_limits<std::uint32_t>::max();
  if (x < lo || x > hi || y < lo || y > hi) fail(Errc::range, "DPU operands must fit in 32 bits");
  trace.record(EventKind::DPU);
  switch (op) {
    case DpuOp::compare_eq: return x == y ? 1 : 0;
    case DpuOp::compare_gt: return x > y ? 1 : 0;
    case DpuOp::add_small: return x + y;
  }
  fail(Errc::configuration, "unknown DPU operation");
}

namespace detail {

inline std::size_t rows_spanned(const SubArray& sub, const MemAddress& a, std::size_t size) {
  if (size == 0) fail(Errc::size, "operand size must be positive");
  if (a.col_start >= sub.cols()) fail(Errc::address, "column start out of bounds");
  std::size_t rows = 1;
  if (a.col_start + size > sub.cols()) {
    if (a.col_start != 0) fail(Errc::address, "multi-row operands must start at column 0");
    rows = (size + sub.cols() - 1) / sub.cols();
  }
  if (a.row >= sub.rows() || a.row + rows > sub.rows()) fail(Errc::size, "operand runs past the last row");
  return rows;
}

inline std::pair<RowIndex, ColIndex> locate(const SubArray& sub, const MemAddress& a, std::size_t bit) {
  const std::size_t p = a.col_start + bit;
  return {a.row + p / sub.cols(), p % sub.cols()};
}

inline void check_dst_rows(const SubArray& sub, RowIndex first, std::size_t count) {
  for (RowIndex r = first; r < first + count; ++r) {
    if (sub.layout().is_init(r) || sub.layout().is_carry(r)) {
      fail(Errc::protection, "destination overlaps reserved row " + std::to_string(r));
    }
  }
}

/// Writes `bits` (region-relative) into dst, one W per destination row.
inline void write_region(SubArray& sub, const MemAddress& dst, const BitVector& bits) {
  const std::size_t nrows = rows_spanned(sub, dst, bits.size());
  check_dst_rows(sub, dst.row, nrows);
  std::size_t bit = 0;
  for (std::size_t r = 0; r < nrows; ++r) {
    BitVector row(sub.cols());
    BitVector mask(sub.cols());
    const RowIndex row_index = dst.row + r;
    for (; bit < bits.size(); ++bit) {
      const auto [rr, cc] = locate(sub, dst, bit);
      if (rr != row_index) break;
      row.set(cc, bits.get(bit));
      mask.set(cc, true);
    }
    sub.write_row_masked(row_index, row, mask);
  }
}

inline void check_vertical(const SubArray& sub, RowIndex lsb_row, std::size_t width) {
  if (width == 0 || width > 64) fail(Errc::shape, "vertical word width must be in [1, 64]");
  const auto& data = sub.layout().data_region;
  if (lsb_row < data.begin || lsb_row + width > data.end) fail(Errc::address, "vertical word leaves the data region");
}

inline void check_columns(const SubArray& sub, const BitVector& columns) {
  if (columns.size() != sub.cols()) fail(Errc::shape, "column mask width differs from column count");
}

/// Bit-serial ripple add over row lists, all selected columns in parallel.
/// One full_add_cycle per bit; sum and carry written back each cycle; the
/// last cycle clears the carry row instead of storing the final carry.
inline BitVector ripple_add(SubArray& sub, std::span<const RowIndex> a_rows, std::span<const RowIndex> b_rows,
                            std::span<const RowIndex> out_rows, const BitVector& columns) {
  const RowIndex carry = sub.layout().carry_rows.front();
  if ((sub.peek_row(carry) & columns).any()) fail(Errc::state, "carry row is not zeroed");
  const BitVector zero(sub.cols());
  BitVector overflow(sub.cols());
  TraceBatch batch(sub.trace());
  const std::size_t w = a_rows.size();
  for (std::size_t i = 0; i < w; ++i) {
    FullAddOutput fa = sub.full_add_cycle({a_rows[i], b_rows[i], carry});
    sub.write_row_masked(out_rows[i], fa.sum, columns);
    if (i + 1 < w) {
      sub.write_row_masked(carry, fa.carry, columns);
    } else {
      sub.write_row_masked(carry, zero, columns);
      overflow = fa.carry & columns;
    }
  }
  return overflow;
}

inline std::vector<RowIndex> field_rows(RowIndex lsb_row, std::size_t width) {
  std::vector<RowIndex> rows(width);
  for (std::size_t i = 0; i < width; ++i) rows[i] = lsb_row + i;
  return rows;
}

inline BitVector single_column(const SubArray& sub, ColIndex col) {
  if (col >= sub.cols()) fail(Errc::address, "column out of bounds");
  BitVector m(sub.cols());
  m.set(col, true);
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PANDA_Mem_insert

/// Copies `size` bits from src to dst: one R per source row, one W per
/// destination row.
inline void panda_mem_insert(Fabric& fabric, const MemAddress& dst, const MemAddress& src, std::size_t size) {
  if (size > dst.bit_len || size > src.bit_len) fail(Errc::size, "size exceeds operand length");
  SubArray& from = fabric.subarray(src.subarray);
  SubArray& to = fabric.subarray(dst.subarray);
  const std::size_t src_rows = detail::rows_spanned(from, src, size);
  detail::check_dst_rows(to, dst.row, detail::rows_spanned(to, dst, size));

  BitVector bits(size);
  {
    TraceBatch batch(from.trace());
    std::vector<BitVector> rows;
    rows.reserve(src_rows);
    for (std::size_t r = 0; r < src_rows; ++r) rows.push_back(from.read_row(src.row + r));
    for (std::size_t b = 0; b < size; ++b) {
      const auto [rr, cc] = detail::locate(from, src, b);
      bits.set(b, rows[rr - src.row].get(cc));
    }
  }
  TraceBatch batch(to.trace());
  detail::write_region(to, dst, bits);
}

/// Writes an immediate bit string (W only).
inline void panda_mem_insert(Fabric& fabric, const MemAddress& dst, const BitVector& value) {
  if (value.size() > dst.bit_len) fail(Errc::size, "immediate longer than destination");
  SubArray& to = fabric.subarray(dst.subarray);
  TraceBatch batch(to.trace());
  detail::write_region(to, dst, value);
}

/// Writes an immediate into one vertical word (one W per bit row).
inline void panda_mem_insert(Fabric& fabric, const VerticalWordRef& dst, std::uint64_t value) {
  SubArray& sub = fabric.subarray(dst.subarray);
  detail::check_vertical(sub, dst.lsb_row, dst.width);
  const BitVector mask = detail::single_column(sub, dst.col);
  TraceBatch batch(sub.trace());
  for (std::size_t i = 0; i < dst.width; ++i) {
    BitVector row(sub.cols());
    row.set(dst.col, (value >> i) & 1U);
    sub.write_row_masked(dst.lsb_row + i, row, mask);
  }
}

/// Writes one value per selected column into a vertical field; w W in total
/// regardless of how many columns are selected.
inline void panda_mem_insert(Fabric& fabric, const VerticalField& dst, std::span<const std::uint64_t> values,
                             const BitVector& columns) {
  SubArray& sub = fabric.subarray(dst.subarray);
  detail::check_vertical(sub, dst.lsb_row, dst.width);
  detail::check_columns(sub, columns);
  if (values.size() != sub.cols()) fail(Errc::shape, "one value per column required");
  TraceBatch batch(sub.trace());
  for (std::size_t i = 0; i < dst.width; ++i) {
    BitVector row(sub.cols());
    for (ColIndex c = 0; c < sub.cols(); ++c) {
      if (columns.get(c)) row.set(c, (values[c] >> i) & 1U);
    }
    sub.write_row_masked(dst.lsb_row + i, row, columns);
  }
}

/// Vertical copy between (possibly different) sub-arrays: w R + w W.
inline void panda_mem_insert(Fabric& fabric, const VerticalWordRef& dst, const VerticalWordRef& src) {
  if (dst.width != src.width) fail(Errc::shape, "vertical copy width mismatch");
  SubArray& from = fabric.subarray(src.subarray);
  detail::check_vertical(from, src.lsb_row, src.width);
  if (src.col >= from.cols()) fail(Errc::address, "column out of bounds");
  std::uint64_t value = 0;
  {
    TraceBatch batch(from.trace());
    for (std::size_t i = 0; i < src.width; ++i) {
      if (from.read_row(src.lsb_row + i).get(src.col)) value |= std::uint64_t{1} << i;
    }
  }
  panda_mem_insert(fabric, dst, value);
}

// ---------------------------------------------------------------------------
// PANDA_Cmp

/// Bulk XNOR of two row-aligned operands in one sub-array: one triple-row
/// activation (src1, src2, init-1 row) per row chunk, then a DPU AND-reduce.
inline CmpResult panda_cmp(Fabric& fabric, const MemAddress& src1, const MemAddress& src2, std::size_t size) {
  if (src1.subarray != src2.subarray) fail(Errc::placement, "comparison operands live in different sub-arrays");
  if (src1.col_start != src2.col_start) fail(Errc::placement, "comparison operands must share a column span");
  if (size > src1.bit_len || size > src2.bit_len) fail(Errc::size, "size exceeds operand length");
  SubArray& sub = fabric.subarray(src1.subarray);
  const std::size_t rows = detail::rows_spanned(sub, src1, size);
  detail::rows_spanned(sub, src2, size);
  const RowIndex init1 = sub.layout().init1_row;

  TraceBatch batch(sub.trace());
  CmpResult result{false, BitVector(size)};
  std::size_t bit = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const BitVector xnor = sub.sense_xor3({src1.row + r, src2.row + r, init1});
    for (; bit < size; ++bit) {
      const auto [rr, cc] = detail::locate(sub, src1, bit);
      if (rr != src1.row + r) break;
      result.mask.set(bit, xnor.get(cc));
    }
  }
  result.equal = dpu_and_reduce(sub.trace(), result.mask);
  return result;
}

/// Compares a single-row probe against `count` stored rows starting at
/// `first` (same column span), stopping at the first match. Each compared
/// row costs one C_ADD cycle and one DPU reduction.
inline std::optional<RowIndex> panda_cmp_scan(Fabric& fabric, const MemAddress& probe, RowIndex first,
                                              std::size_t count) {
  SubArray& sub = fabric.subarray(probe.subarray);
  if (detail::rows_spanned(sub, probe, probe.bit_len) != 1) fail(Errc::size, "scan probe must fit in one row");
  if (first + count > sub.rows()) fail(Errc::address, "scan range out of bounds");
  const RowIndex init1 = sub.layout().init1_row;
  BitVector span_mask(sub.cols());
  for (std::size_t c = 0; c < probe.bit_len; ++c) span_mask.set(probe.col_start + c, true);

  const BitVector outside = ~span_mask;
  TraceBatch batch(sub.trace());
  for (RowIndex r = first; r < first + count; ++r) {
    BitVector xnor = sub.sense_xor3({probe.row, r, init1});
    sub.trace().record(EventKind::DPU);
    xnor |= outside;
    if (xnor.all()) return r;
  }
  return std::nullopt;
}

/// Per-column equality of two vertical fields: w XNOR cycles, with the DPU's
/// AND unit folding the w masks. Unselected columns report 0.
inline BitVector panda_cmp_vertical(Fabric& fabric, const VerticalField& a, const VerticalField& b,
                                    const BitVector& columns) {
  if (a.subarray != b.subarray) fail(Errc::placement, "comparison operands live in different sub-arrays");
  if (a.width != b.width) fail(Errc::shape, "vertical comparison width mismatch");
  SubArray& sub = fabric.subarray(a.subarray);
  detail::check_vertical(sub, a.lsb_row, a.width);
  detail::check_vertical(sub, b.lsb_row, b.width);
  detail::check_columns(sub, columns);
  TraceBatch batch(sub.trace());
  BitVector eq = columns;
  for (std::size_t i = 0; i < a.width; ++i) {
    eq &= sub.sense_xor3({a.lsb_row + i, b.lsb_row + i, sub.layout().init1_row});
    sub.trace().record(EventKind::DPU);
  }
  return eq;
}

// ---------------------------------------------------------------------------
// PANDA_Add

/// out = (a + b) mod 2^w in every selected column; returns the per-column
/// final carry. Trace: w C_ADD + 2w W independent of the column count.
inline BitVector panda_add(Fabric& fabric, const VerticalField& a, const VerticalField& b, const VerticalField& out,
                           const BitVector& columns) {
  if (a.subarray != b.subarray || a.subarray != out.subarray) {
    fail(Errc::placement, "addition operands live in different sub-arrays");
  }
  if (a.width != b.width || a.width != out.width) fail(Errc::shape, "addition width mismatch");
  SubArray& sub = fabric.subarray(a.subarray);
  detail::check_vertical(sub, a.lsb_row, a.width);
  detail::check_vertical(sub, b.lsb_row, b.width);
  detail::check_vertical(sub, out.lsb_row, out.width);
  detail::check_columns(sub, columns);
  const auto ar = detail::field_rows(a.lsb_row, a.width);
  const auto br = detail::field_rows(b.lsb_row, b.width);
  const auto orow = detail::field_rows(out.lsb_row, out.width);
  return detail::ripple_add(sub, ar, br, orow, columns);
}

inline bool panda_add(Fabric& fabric, const VerticalWordRef& a, const VerticalWordRef& b, const VerticalWordRef& out) {
  if (a.col != b.col || a.col != out.col) fail(Errc::placement, "element-wise addition needs one shared column");
  SubArray& sub = fabric.subarray(a.subarray);
  const BitVector cols = detail::single_column(sub, a.col);
  return panda_add(fabric, VerticalField{a.subarray, a.lsb_row, a.width}, VerticalField{b.subarray, b.lsb_row, b.width},
                   VerticalField{out.subarray, out.lsb_row, out.width}, cols)
      .get(a.col);
}

/// out = (a + imm) mod 2^w with the constant operand taken from the init
/// rows (bit i of the two's-complement immediate selects init-1 or init-0).
inline BitVector panda_add_immediate(Fabric& fabric, const VerticalField& a, std::int64_t imm,
                                     const VerticalField& out, const BitVector& columns) {
  if (a.subarray != out.subarray) fail(Errc::placement, "addition operands live in different sub-arrays");
  if (a.width != out.width) fail(Errc::shape, "addition width mismatch");
  SubArray& sub = fabric.subarray(a.subarray);
  detail::check_vertical(sub, a.lsb_row, a.width);
  detail::check_vertical(sub, out.lsb_row, out.width);
  detail::check_columns(sub, columns);
  const auto bits = static_cast<std::uint64_t>(imm);
  std::vector<RowIndex> br(a.width);
  for (std::size_t i = 0; i < a.width; ++i) {
    br[i] = ((bits >> i) & 1U) ? sub.layout().init1_row : sub.layout().init0_row;
  }
  const auto ar = detail::field_rows(a.lsb_row, a.width);
  const auto orow = detail::field_rows(out.lsb_row, out.width);
  return detail::ripple_add(sub, ar, br, orow, columns);
}

inline bool panda_add_immediate(Fabric& fabric, const VerticalWordRef& word, std::int64_t imm) {
  const BitVector cols = detail::single_column(fabric.subarray(word.subarray), word.col);
  const VerticalField f{word.subarray, word.lsb_row, word.width};
  return panda_add_immediate(fabric, f, imm, f, cols).get(word.col);
}

/// In-place +1; returns the overflow bit (set when the word wrapped to 0).
inline bool panda_increment(Fabric& fabric, const VerticalWordRef& ctr) { return panda_add_immediate(fabric, ctr, 1); }

/// In-place -1 (two's complement). For a nonzero word the carry out is 1.
inline bool panda_decrement(Fabric& fabric, const VerticalWordRef& ctr) { return panda_add_immediate(fabric, ctr, -1); }

// ---------------------------------------------------------------------------
// Readback

inline std::uint64_t read_vertical(Fabric& fabric, const VerticalWordRef& word) {
  SubArray& sub = fabric.subarray(word.subarray);
  detail::check_vertical(sub, word.lsb_row, word.width);
  if (word.col >= sub.cols()) fail(Errc::address, "column out of bounds");
  TraceBatch batch(sub.trace());
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < word.width; ++i) {
    if (sub.read_row(word.lsb_row + i).get(word.col)) v |= std::uint64_t{1} << i;
  }
  return v;
}

/// Reads every column's word of a field at once (w R).
inline std::vector<std::uint64_t> read_vertical_field(Fabric& fabric, const VerticalField& field) {
  SubArray& sub = fabric.subarray(field.subarray);
  detail::check_vertical(sub, field.lsb_row, field.width);
  TraceBatch batch(sub.trace());
  std::vector<std::uint64_t> values(sub.cols(), 0);
  for (std::size_t i = 0; i < field.width; ++i) {
    const BitVector row = sub.read_row(field.lsb_row + i);
    for (ColIndex c = 0; c < sub.cols(); ++c) {
      if (row.get(c)) values[c] |= std::uint64_t{1} << i;
    }
  }
  return values;
}

/// Host-side view without cost, for tests and oracles.
inline std::uint64_t peek_vertical(const Fabric& fabric, const VerticalWordRef& word) {
  const SubArray& sub = fabric.subarray(word.subarray);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < word.width; ++i) {
    if (sub.peek(word.lsb_row + i, word.col)) v |= std::uint64_t{1} << i;
  }
  return v;
}

}  // namespace panda
