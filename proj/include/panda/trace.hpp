#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "panda/error.hpp"

namespace panda {

/// Cost class of a trace event. XFER counts bytes; everything else counts cycles.
enum class EventKind : std::uint8_t { R, W, C_AND3, C_ADD, DPU, XFER };
inline constexpr std::size_t kEventKindCount = 6;

enum class Stage : std::uint8_t { hashmap, graph, traverse, io, other };
inline constexpr std::size_t kStageCount = 5;

inline constexpr std::array<EventKind, kEventKindCount> kAllEventKinds = {
    EventKind::R, EventKind::W, EventKind::C_AND3, EventKind::C_ADD, EventKind::DPU, EventKind::XFER};
inline constexpr std::array<Stage, kStageCount> kAllStages = {Stage::hashmap, Stage::graph, Stage::traverse,
                                                              Stage::io, Stage::other};

constexpr std::string_view to_string(EventKind kind) noexcept {
  constexpr std::array<std::string_view, kEventKindCount> names = {"R", "W", "C_AND3", "C_ADD", "DPU", "XFER"};
  return names[static_cast<std::size_t>(kind)];
}

constexpr std::string_view to_string(Stage stage) noexcept {
  constexpr std::array<std::string_view, kStageCount> names = {"hashmap", "graph", "traverse", "io", "other"};
  return names[static_cast<std::size_t>(stage)];
}

inline std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (auto k : kAllEventKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

inline std::optional<Stage> parse_stage(std::string_view s) {
  for (auto st : kAllStages) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

struct TraceEvent {
  std::uint32_t count = 0;
  EventKind kind = EventKind::R;
  Stage stage = Stage::other;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using KindTotals = std::array<std::uint64_t, kEventKindCount>;

/// Append-only log of cost events. Consecutive events with the same stage and
/// kind are coalesced, so the log stays ordered but compact. Per-stage totals
/// are kept alongside so accounting never has to rescan the log.
class OpTrace {
 public:
  void set_stage(Stage stage) noexcept { stage_ = stage; }
  Stage stage() const noexcept { return stage_; }

  void record(EventKind kind, std::uint64_t count = 1) {
    if (count == 0) return;
    if (batch_depth_ > 0) {
      auto& slot = pending_[static_cast<std::size_t>(kind)];
      if (slot == 0) pending_order_.push_back(kind);
      slot += count;
      return;
    }
    push(kind, stage_, count);
  }

  /// Appends every event of `other` (keeping each event's own stage tag).
  void append(const OpTrace& other) {
    for (const auto& e : other.events_) push(e.kind, e.stage, e.count);
  }

  const std::vector<TraceEvent>& events() const noexcept { return events_; }
  bool empty() const noexcept { return events_.empty(); }

  std::uint64_t total(EventKind kind) const noexcept {
    std::uint64_t n = 0;
    for (const auto& row : totals_) n += row[static_cast<std::size_t>(kind)];
    return n;
  }
  std::uint64_t total(Stage stage, EventKind kind) const noexcept {
    return totals_[static_cast<std::size_t>(stage)][static_cast<std::size_t>(kind)];
  }
  const KindTotals& totals(Stage stage) const noexcept { return totals_[static_cast<std::size_t>(stage)]; }

  /// Line-delimited `stage,kind,count` records.
  void write_csv(std::ostream& out) const {
    for (const auto& e : events_) out << to_string(e.stage) << ',' << to_string(e.kind) << ',' << e.count << '\n';
  }

  std::string to_csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }

  static OpTrace read_csv(std::istream& in) {
    OpTrace trace;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto c1 = line.find(',');
      const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
      if (c2 == std::string::npos) fail(Errc::parse, "trace line " + std::to_string(lineno) + " is not stage,kind,count");
      const auto stage = parse_stage(std::string_view(line).substr(0, c1));
      const auto kind = parse_event_kind(std::string_view(line).substr(c1 + 1, c2 - c1 - 1));
      if (!stage) fail(Errc::configuration, "unknown stage tag on trace line " + std::to_string(lineno));
      if (!kind) fail(Errc::configuration, "unknown event class on trace line " + std::to_string(lineno));
      std::uint64_t count = 0;
      try {
        std::size_t used = 0;
        count = std::stoull(line.substr(c2 + 1), &used);
        if (used != line.size() - c2 - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        fail(Errc::parse, "bad count on trace line " + std::to_string(lineno));
      }
      trace.push(*kind, *stage, count);
    }
    return trace;
  }

  friend bool operator==(const OpTrace& a, const OpTrace& b) { return a.events_ == b.events_; }

 private:
  friend class TraceBatch;

  void push(EventKind kind, Stage stage, std::uint64_t count) {
    totals_[static_cast<std::size_t>(stage)][static_cast<std::size_t>(kind)] += count;
    constexpr std::uint64_t cap = std::numeric_limits<std::uint32_t>::max();
    while (count > 0) {
      if (!events_.empty() && events_.back().kind == kind && events_.back().stage == stage &&
          events_.back().count < cap) {
        const std::uint64_t room = cap - events_.back().count;
        const std::uint64_t take = count < room ? count : room;
        events_.back().count += static_cast<std::uint32_t>(take);
        count -= take;
        continue;
      }
      const std::uint64_t take = count < cap ? count : cap;
      events_.push_back({static_cast<std::uint32_t>(take), kind, stage});
      count -= take;
    }
  }

  void flush_pending() {
    for (auto kind : pending_order_) {
      auto& slot = pending_[static_cast<std::size_t>(kind)];
      push(kind, stage_, slot);
      slot = 0;
    }
    pending_order_.clear();
  }

  std::vector<TraceEvent> events_;
  std::array<KindTotals, kStageCount> totals_{};
  Stage stage_ = Stage::other;
  int batch_depth_ = 0;
  KindTotals pending_{};
  std::vector<EventKind> pending_order_;
};

/// Groups all events recorded while alive into one event per kind, in the
/// order the kinds first appeared. One guard per instruction.
class TraceBatch {
 public:
  explicit TraceBatch(OpTrace& trace) : trace_(trace) { ++trace_.batch_depth_; }
  ~TraceBatch() {
    if (--trace_.batch_depth_ == 0) trace_.flush_pending();
  }
  TraceBatch(const TraceBatch&) = delete;
  TraceBatch& operator=(const TraceBatch&) = delete;

 private:
  OpTrace& trace_;
};

}  // namespace panda
