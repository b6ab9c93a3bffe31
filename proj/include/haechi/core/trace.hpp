#pragma once

#include "haechi/core/types.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace haechi {

enum class EventKind : std::uint8_t {
  Submitted,
  Processed,
  CrossLinkSent,
  CrossLinkReceived,
  Ordered,
  Executed,
  Voted,
  Committed,
  Aborted,
  AdversaryObserved,
  AdversaryInjected,
};

const char* to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

/// What a trace event is about: a transaction ("tx:7"), a CrossLink
/// ("cl:2/5" = shard 2, height 5) or an ordering cycle ("cycle:3").
struct Subject {
  enum class Kind : std::uint8_t { None, Tx, CrossLink, Cycle };
  Kind kind = Kind::None;
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  static Subject tx(TxId id) { return {Kind::Tx, value(id), 0}; }
  static Subject crosslink(ShardId s, Height h) { return {Kind::CrossLink, value(s), h}; }
  static Subject cycle(std::uint64_t n) { return {Kind::Cycle, n, 0}; }

  bool is_tx() const { return kind == Kind::Tx; }
  TxId txid() const { return TxId{a}; }

  std::string to_string() const;
  static std::optional<Subject> parse(std::string_view s);

  friend bool operator==(const Subject&, const Subject&) = default;
};

struct TraceEvent {
  Time time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Submitted;
  Subject subject;
  ShardId location{};
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Append-only, totally ordered by (time, seq).
class Trace {
 public:
  const TraceEvent& append(Time time, EventKind kind, Subject subject, ShardId location,
                           nlohmann::json detail = nlohmann::json::object());

  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  void write_jsonl(std::ostream& os) const;
  std::string to_jsonl() const;
  static Trace read_jsonl(std::istream& is);
  static Trace from_jsonl(const std::string& text);

  /// Rebuilds a trace from raw events (test fixtures, corrupted copies).
  /// Sequence numbers are kept as given; ordering is still enforced.
  static Trace from_events(std::vector<TraceEvent> events);

 private:
  std::vector<TraceEvent> events_;
};

/// Sink the engines report into; the simulator stamps time and sequence.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void record(EventKind kind, Subject subject, ShardId location,
                      nlohmann::json detail = nlohmann::json::object()) = 0;
};

/// Sink backed by a Trace with an externally driven clock.
class TraceRecorder : public EventSink {
 public:
  void record(EventKind kind, Subject subject, ShardId location, nlohmann::json detail) override {
    trace_.append(now_, kind, subject, location, std::move(detail));
  }
  void set_time(Time t) { now_ = t; }
  Time now() const { return now_; }
  const Trace& trace() const { return trace_; }
  Trace& trace() { return trace_; }

 private:
  Time now_ = 0;
  Trace trace_;
};

}  // namespace haechi
