#pragma once

#include "haechi/audit/audit.hpp"
#include "haechi/core/trace.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace haechi {

struct LatencyStats {
  std::size_t count = 0;
  double mean = 0;
  Time p50 = 0;
  Time p95 = 0;
};

struct IntervalStats {
  std::size_t count = 0;  // number of intervals, one less than emissions
  Time min = 0;
  double avg = 0;
  Time max = 0;
};

struct GasRow {
  std::string label;  // MAX, AVG, MIN
  std::int64_t gas_per_tx = 0;
};

/// Everything here is a function of the trace (plus its audit), so a stored
/// trace reproduces the run's metrics exactly.
struct MetricsReport {
  std::size_t submitted = 0;
  std::size_t committed = 0;  // committed everywhere, aborted nowhere
  std::size_t aborted = 0;
  Time end_time = 0;
  double tps = 0;  // committed per simulated time unit
  LatencyStats intra_latency;
  LatencyStats cross_latency;
  IntervalStats ccls_interval;
  std::size_t attack_records = 0;
  std::size_t attack_front_ran = 0;
  std::optional<double> attack_success_rate;
  std::uint64_t gas_crosslinks = 0;     // largest cycle
  std::uint64_t gas_txs_per_cl = 0;     // mean transactions per CrossLink, rounded
  std::vector<GasRow> gas;              // empty without ordering cycles
  std::map<std::string, std::size_t> violations;
  std::size_t violation_total = 0;

  nlohmann::json to_json() const;
};

/// Nearest-rank percentile of a sorted sample; 0 for an empty one.
Time percentile(const std::vector<Time>& sorted, double q);

MetricsReport compute_metrics(const Trace& trace, const AuditReport* audit = nullptr);

/// Labels identifying a run in CSV output.
struct RunLabels {
  std::string scenario;
  std::string protocol;
  std::uint64_t seed = 0;
  std::string variant;
};

const std::vector<std::string>& csv_columns();
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const RunLabels& labels, const MetricsReport& m);

}  // namespace haechi
