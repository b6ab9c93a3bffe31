#include "haechi/core/trace.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace haechi {

namespace {

constexpr std::array<const char*, 11> kKindNames = {
    "Submitted", "Processed", "CrossLinkSent", "CrossLinkReceived", "Ordered", "Executed",
    "Voted", "Committed", "Aborted", "AdversaryObserved", "AdversaryInjected"};

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

const char* to_string(EventKind k) { return kKindNames.at(static_cast<std::size_t>(k)); }

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (s == kKindNames[i]) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::string Subject::to_string() const {
  switch (kind) {
    case Kind::None: return "-";
    case Kind::Tx: return "tx:" + std::to_string(a);
    case Kind::CrossLink: return "cl:" + std::to_string(a) + "/" + std::to_string(b);
    case Kind::Cycle: return "cycle:" + std::to_string(a);
  }
  return "-";
}

std::optional<Subject> Subject::parse(std::string_view s) {
  if (s == "-") return Subject{};
  auto colon = s.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto tag = s.substr(0, colon);
  auto rest = s.substr(colon + 1);
  if (tag == "tx" || tag == "cycle") {
    auto v = parse_u64(rest);
    if (!v) return std::nullopt;
    return Subject{tag == "tx" ? Kind::Tx : Kind::Cycle, *v, 0};
  }
  if (tag == "cl") {
    auto slash = rest.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto sh = parse_u64(rest.substr(0, slash));
    auto h = parse_u64(rest.substr(slash + 1));
    if (!sh || !h) return std::nullopt;
    return Subject{Kind::CrossLink, *sh, *h};
  }
  return std::nullopt;
}

nlohmann::json TraceEvent::to_json() const {
  return nlohmann::json{{"time", time},
                        {"seq", seq},
                        {"kind", haechi::to_string(kind)},
                        {"subject", subject.to_string()},
                        {"location", value(location)},
                        {"detail", detail}};
}

const TraceEvent& Trace::append(Time time, EventKind kind, Subject subject, ShardId location,
                                nlohmann::json detail) {
  if (!events_.empty() && time < events_.back().time) {
    throw std::logic_error("trace time went backwards: " + std::to_string(time) + " < " +
                           std::to_string(events_.back().time));
  }
  TraceEvent ev;
  ev.time = time;
  ev.seq = events_.empty() ? 0 : events_.back().seq + 1;
  ev.kind = kind;
  ev.subject = subject;
  ev.location = location;
  ev.detail = std::move(detail);
  events_.push_back(std::move(ev));
  return events_.back();
}

void Trace::write_jsonl(std::ostream& os) const {
  for (const auto& ev : events_) os << ev.to_json().dump() << '\n';
}

std::string Trace::to_jsonl() const {
  std::ostringstream os;
  write_jsonl(os);
  return os.str();
}

Trace Trace::read_jsonl(std::istream& is) {
  std::vector<TraceEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw TraceParseError(lineno, std::string("malformed JSON: ") + e.what());
    }
    try {
      TraceEvent ev;
      ev.time = j.at("time").get<Time>();
      ev.seq = j.at("seq").get<std::uint64_t>();
      auto kind = event_kind_from_string(j.at("kind").get<std::string>());
      if (!kind) throw TraceParseError(lineno, "unknown event kind");
      ev.kind = *kind;
      auto subject = Subject::parse(j.at("subject").get<std::string>());
      if (!subject) throw TraceParseError(lineno, "bad subject");
      ev.subject = *subject;
      ev.location = ShardId{j.at("location").get<std::uint32_t>()};
      ev.detail = j.value("detail", nlohmann::json::object());
      events.push_back(std::move(ev));
    } catch (const nlohmann::json::exception& e) {
      throw TraceParseError(lineno, std::string("missing or mistyped field: ") + e.what());
    }
    const auto n = events.size();
    if (n >= 2) {
      const auto& prev = events[n - 2];
      const auto& cur = events[n - 1];
      if (cur.seq <= prev.seq || cur.time < prev.time) {
        throw TraceParseError(lineno, "events out of (time, seq) order");
      }
    }
  }
  Trace t;
  t.events_ = std::move(events);
  return t;
}

Trace Trace::from_jsonl(const std::string& text) {
  std::istringstream is(text);
  return read_jsonl(is);
}

Trace Trace::from_events(std::vector<TraceEvent> events) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].seq <= events[i - 1].seq || events[i].time < events[i - 1].time) {
      throw std::logic_error("from_events: events out of (time, seq) order");
    }
  }
  Trace t;
  t.events_ = std::move(events);
  return t;
}

}  // namespace haechi
