#pragma once

#include "haechi/audit/audit.hpp"
#include "haechi/metrics/metrics.hpp"
#include "haechi/sim/scenario.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace haechi {

enum class SweepAxis : std::uint8_t { None, Workload, ByzantineAttackers, Shards, CrossShardRatio, Protocol };

const char* to_string(SweepAxis a);
/// Throws ConfigError on an unknown axis name.
SweepAxis sweep_axis_from_string(const std::string& s);

/// Applies one axis value to a scenario. Throws ConfigError on a value
/// that does not parse for the axis.
void apply_axis(Scenario& s, SweepAxis axis, const std::string& value);

struct RunOutput {
  Trace trace;
  AuditReport audit;
  MetricsReport metrics;
};

/// Simulates, audits and measures one scenario.
RunOutput run_once(const Scenario& s, const AuditOptions& audit = {});

struct SweepSpec {
  Scenario base;
  SweepAxis axis = SweepAxis::None;
  std::vector<std::string> values;  // ignored for SweepAxis::None
  std::vector<std::uint64_t> seeds;
  unsigned threads = 0;             // 0: hardware concurrency
};

struct SweepRow {
  RunLabels labels;
  MetricsReport metrics;
};

/// Rows come back ordered by (value, seed) regardless of thread timing.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace haechi
