#include "haechi/metrics/metrics.hpp"

#include "haechi/beacon/gas.hpp"
#include "haechi/sim/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace haechi {

namespace {

using Json = nlohmann::json;

LatencyStats latency_stats(std::vector<Time> xs) {
  LatencyStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  std::sort(xs.begin(), xs.end());
  long double sum = 0;
  for (auto x : xs) sum += x;
  s.mean = static_cast<double>(sum / static_cast<long double>(xs.size()));
  s.p50 = percentile(xs, 0.50);
  s.p95 = percentile(xs, 0.95);
  return s;
}

Json latency_json(const LatencyStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"p50", s.p50}, {"p95", s.p95}};
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

const std::vector<ViolationKind> kKinds = {
    ViolationKind::FairnessInversion, ViolationKind::SafetyDivergence, ViolationKind::AtomicityBreak,
    ViolationKind::LivenessStall,     ViolationKind::Lemma1Breach,     ViolationKind::Lemma2Breach,
    ViolationKind::GapInOrderedHeights};

}  // namespace

Time percentile(const std::vector<Time>& sorted, double q) {
  if (sorted.empty()) return 0;
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

MetricsReport compute_metrics(const Trace& trace, const AuditReport* audit) {
  MetricsReport m;
  struct TxInfo {
    Time submitted = 0;
    bool cross = false;
    bool committed = false;
    bool aborted = false;
    Time last_commit = 0;
  };
  std::map<std::uint64_t, TxInfo> txs;
  std::vector<Time> cycle_times;
  std::uint64_t max_cls = 0;
  std::uint64_t cl_count = 0;
  std::uint64_t cl_txs = 0;

  for (const auto& ev : trace.events()) {
    m.end_time = ev.time;
    if (ev.kind == EventKind::Ordered && ev.subject.kind == Subject::Kind::Cycle) {
      cycle_times.push_back(ev.time);
      const auto cls = ev.detail.value("crosslinks", Json::array());
      max_cls = std::max<std::uint64_t>(max_cls, cls.size());
      for (const auto& c : cls) {
        ++cl_count;
        cl_txs += c.value("txs", std::uint64_t{0});
      }
      continue;
    }
    if (!ev.subject.is_tx()) continue;
    switch (ev.kind) {
      case EventKind::Submitted: {
        auto& t = txs[ev.subject.a];
        t.submitted = ev.time;
        t.cross = ev.detail.value("cross", false);
        break;
      }
      case EventKind::Committed: {
        auto& t = txs[ev.subject.a];
        t.committed = true;
        t.last_commit = std::max(t.last_commit, ev.time);
        break;
      }
      case EventKind::Aborted: txs[ev.subject.a].aborted = true; break;
      default: break;
    }
  }

  std::vector<Time> intra;
  std::vector<Time> cross;
  for (const auto& [id, t] : txs) {
    ++m.submitted;
    if (t.aborted) {
      ++m.aborted;
    } else if (t.committed) {
      ++m.committed;
      (t.cross ? cross : intra).push_back(t.last_commit - t.submitted);
    }
  }
  m.tps = m.end_time > 0 ? static_cast<double>(m.committed) / static_cast<double>(m.end_time) : 0.0;
  m.intra_latency = latency_stats(std::move(intra));
  m.cross_latency = latency_stats(std::move(cross));

  if (cycle_times.size() >= 2) {
    auto& c = m.ccls_interval;
    c.count = cycle_times.size() - 1;
    c.min = c.max = cycle_times[1] - cycle_times[0];
    for (std::size_t i = 1; i < cycle_times.size(); ++i) {
      const Time d = cycle_times[i] - cycle_times[i - 1];
      c.min = std::min(c.min, d);
      c.max = std::max(c.max, d);
    }
    c.avg = static_cast<double>(cycle_times.back() - cycle_times.front()) / static_cast<double>(c.count);
  }

  const auto records = attack_records(trace);
  m.attack_records = records.size();
  m.attack_front_ran = static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [](const AttackRecord& r) { return r.outcome == AttackOutcome::FrontRan; }));
  if (!records.empty()) m.attack_success_rate = attack_success_rate(records);

  if (max_cls > 0) {
    m.gas_crosslinks = max_cls;
    const auto avg = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(cl_txs) / static_cast<double>(cl_count)));
    m.gas_txs_per_cl = std::max<std::uint64_t>(1, avg);
    for (auto c : {GasCase::Max, GasCase::Avg, GasCase::Min}) {
      m.gas.push_back({to_string(c), estimate_ordering_gas(m.gas_crosslinks, m.gas_txs_per_cl, c)});
    }
  }

  if (audit) {
    for (auto k : kKinds) m.violations[to_string(k)] = audit->count(k);
    m.violation_total = audit->violations.size();
  }
  return m;
}

Json MetricsReport::to_json() const {
  auto gas_rows = Json::array();
  for (const auto& g : gas) gas_rows.push_back({{"case", g.label}, {"gas_per_tx", g.gas_per_tx}});
  Json j{{"time_unit", "simulated"},
         {"submitted", submitted},
         {"committed", committed},
         {"aborted", aborted},
         {"end_time", end_time},
         {"tps", tps},
         {"intra_latency", latency_json(intra_latency)},
         {"cross_latency", latency_json(cross_latency)},
         {"ccls_interval",
          {{"count", ccls_interval.count},
           {"min", ccls_interval.min},
           {"avg", ccls_interval.avg},
           {"max", ccls_interval.max}}},
         {"attack",
          {{"records", attack_records},
           {"front_ran", attack_front_ran},
           {"success_rate", attack_success_rate ? Json(*attack_success_rate) : Json(nullptr)}}},
         {"gas", {{"crosslinks", gas_crosslinks}, {"txs_per_crosslink", gas_txs_per_cl}, {"rows", gas_rows}}},
         {"violations", violations},
         {"violation_total", violation_total}};
  return j;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> kCols = {
      "scenario",          "protocol",         "seed",           "variant",
      "submitted",         "committed",        "aborted",        "end_time_tu",
      "tps_per_tu",        "intra_count",      "intra_mean_tu",  "intra_p50_tu",
      "intra_p95_tu",      "cross_count",      "cross_mean_tu",  "cross_p50_tu",
      "cross_p95_tu",      "ccls_count",       "ccls_min_tu",    "ccls_avg_tu",
      "ccls_max_tu",       "attack_records",   "attack_front_ran", "attack_success_rate",
      "gas_crosslinks",    "gas_txs_per_cl",   "gas_max",        "gas_avg",
      "gas_min",           "violations",       "fairness_inversions", "safety_divergences",
      "atomicity_breaks",  "liveness_stalls",  "lemma1_breaches", "lemma2_breaches",
      "height_gaps"};
  return kCols;
}

void write_csv_header(std::ostream& os) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

void write_csv_row(std::ostream& os, const RunLabels& l, const MetricsReport& m) {
  auto gas = [&](std::size_t i) { return i < m.gas.size() ? std::to_string(m.gas[i].gas_per_tx) : std::string{}; };
  auto viol = [&](ViolationKind k) {
    auto it = m.violations.find(to_string(k));
    return it == m.violations.end() ? std::string{} : std::to_string(it->second);
  };
  const std::vector<std::string> cells = {
      l.scenario,
      l.protocol,
      std::to_string(l.seed),
      l.variant,
      std::to_string(m.submitted),
      std::to_string(m.committed),
      std::to_string(m.aborted),
      std::to_string(m.end_time),
      fmt(m.tps),
      std::to_string(m.intra_latency.count),
      fmt(m.intra_latency.mean),
      std::to_string(m.intra_latency.p50),
      std::to_string(m.intra_latency.p95),
      std::to_string(m.cross_latency.count),
      fmt(m.cross_latency.mean),
      std::to_string(m.cross_latency.p50),
      std::to_string(m.cross_latency.p95),
      std::to_string(m.ccls_interval.count),
      std::to_string(m.ccls_interval.min),
      fmt(m.ccls_interval.avg),
      std::to_string(m.ccls_interval.max),
      std::to_string(m.attack_records),
      std::to_string(m.attack_front_ran),
      m.attack_success_rate ? fmt(*m.attack_success_rate) : std::string{},
      std::to_string(m.gas_crosslinks),
      std::to_string(m.gas_txs_per_cl),
      gas(0),
      gas(1),
      gas(2),
      std::to_string(m.violation_total),
      viol(ViolationKind::FairnessInversion),
      viol(ViolationKind::SafetyDivergence),
      viol(ViolationKind::AtomicityBreak),
      viol(ViolationKind::LivenessStall),
      viol(ViolationKind::Lemma1Breach),
      viol(ViolationKind::Lemma2Breach),
      viol(ViolationKind::GapInOrderedHeights),
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    os << (i ? "," : "");
    // Labels are user supplied; quote anything that would break the row.
    if (cells[i].find_first_of(",\"\n") != std::string::npos) {
      os << '"';
      for (char c : cells[i]) os << (c == '"' ? "\"\"" : std::string(1, c));
      os << '"';
    } else {
      os << cells[i];
    }
  }
  os << '\n';
}

}  // namespace haechi
