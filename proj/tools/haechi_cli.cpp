#include "haechi/audit/audit.hpp"
#include "haechi/beacon/gas.hpp"
#include "haechi/metrics/metrics.hpp"
#include "haechi/metrics/sweep.hpp"
#include "haechi/sim/scenario_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace haechi;

namespace {

constexpr int kExitViolations = 1;
constexpr int kExitError = 2;

struct RunArgs {
  std::string scenario;
  std::string protocol;
  std::optional<std::uint64_t> seed;
  std::optional<Time> duration;
  std::optional<std::uint32_t> shards;
  std::optional<double> workload;
  std::optional<double> cross_ratio;
  std::string adversary;
  std::string out_dir = "out";
};

void add_override_flags(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--protocol", a.protocol,
                  "haechi, haechi_sync, two_phase_sender, two_phase_reference or optimistic");
  cmd->add_option("--seed", a.seed, "RNG seed");
  cmd->add_option("--duration", a.duration, "submission window in time units");
  cmd->add_option("--shards", a.shards, "number of shards");
  cmd->add_option("--workload", a.workload, "client transactions per time unit per shard");
  cmd->add_option("--cross-shard-ratio", a.cross_ratio, "share of cross-shard transactions");
  cmd->add_option("--adversary", a.adversary, "none, intra_shard or cross_shard");
}

Scenario load_with_overrides(const RunArgs& a) {
  Scenario s = load_scenario(a.scenario);
  Overrides o;
  if (!a.protocol.empty()) {
    o.protocol = protocol_from_string(a.protocol);
    if (!o.protocol) throw ConfigError("--protocol: unknown protocol '" + a.protocol + "'");
  }
  o.seed = a.seed;
  o.duration = a.duration;
  o.shards = a.shards;
  o.workload = a.workload;
  o.cross_shard_ratio = a.cross_ratio;
  if (!a.adversary.empty()) {
    o.adversary = adversary_from_string(a.adversary);
    if (!o.adversary) throw ConfigError("--adversary: unknown model '" + a.adversary + "'");
  }
  apply_overrides(s, o);
  validate(s);
  return s;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

int cmd_run(const RunArgs& a) {
  const Scenario s = load_with_overrides(a);
  auto out = run_once(s);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_file(dir / "trace.jsonl", out.trace.to_jsonl());
  write_file(dir / "metrics.json", out.metrics.to_json().dump(2) + "\n");
  write_file(dir / "audit.json", out.audit.to_json().dump(2) + "\n");
  std::ostringstream csv;
  write_csv_header(csv);
  write_csv_row(csv, {s.name, to_string(s.protocol), s.seed, ""}, out.metrics);
  write_file(dir / "metrics.csv", csv.str());

  const auto& m = out.metrics;
  std::cout << s.name << " [" << to_string(s.protocol) << ", seed " << s.seed << "]: " << m.submitted
            << " submitted, " << m.committed << " committed, " << m.aborted << " aborted, "
            << out.audit.violations.size() << " violations; wrote " << dir.string() << "\n";
  return 0;
}

int cmd_audit(const std::string& path, const std::string& contract, std::optional<Time> horizon) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  Trace trace;
  try {
    trace = Trace::read_jsonl(is);
  } catch (const TraceParseError& e) {
    std::cerr << path << ":" << e.what() << "\n";
    return kExitError;
  }
  AuditOptions opts;
  if (!contract.empty()) opts.contract = contract;
  opts.horizon = horizon;
  const auto report = run_audit(trace, opts);
  std::cout << report.to_json().dump(2) << "\n";
  return report.clean() ? 0 : kExitViolations;
}

int cmd_gas(std::uint64_t n, std::uint64_t txs) {
  std::cout << "crosslinks=" << n << " txs_per_crosslink=" << txs << "\n";
  std::cout << "case  gas_per_tx\n";
  for (auto c : {GasCase::Max, GasCase::Avg, GasCase::Min}) {
    std::cout << to_string(c) << std::string(6 - std::string(to_string(c)).size(), ' ')
              << estimate_ordering_gas(n, txs, c) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharded-ledger simulator with cross-shard ordering and trace audits"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "simulate one scenario and write trace, metrics and audit");
  run_cmd->add_option("scenario", run.scenario, "scenario TOML file")->required();
  add_override_flags(run_cmd, run);
  run_cmd->add_option("--out-dir", run.out_dir, "output directory")->capture_default_str();

  RunArgs sweep;
  std::vector<std::uint64_t> seeds;
  std::string vary;
  std::vector<std::string> values;
  std::string sweep_out;
  unsigned threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario across seeds and one varied parameter");
  sweep_cmd->add_option("scenario", sweep.scenario, "scenario TOML file")->required();
  add_override_flags(sweep_cmd, sweep);
  sweep_cmd->add_option("--seeds", seeds, "seeds, e.g. --seeds 1 2 3")->delimiter(',');
  sweep_cmd->add_option("--vary", vary, "workload, byzantine_attackers, shards, cross_shard_ratio or protocol");
  sweep_cmd->add_option("--values", values, "values for the varied parameter")->delimiter(',');
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: stdout)");
  sweep_cmd->add_option("--threads", threads, "worker threads (0: one per core)");

  std::string trace_path;
  std::string contract;
  std::optional<Time> horizon;
  auto* audit_cmd = app.add_subcommand("audit", "check a trace; exit 1 when violations are found");
  audit_cmd->add_option("trace", trace_path, "trace JSONL file")->required();
  audit_cmd->add_option("--contract", contract, "check fairness on this contract only");
  audit_cmd->add_option("--horizon", horizon, "only require transactions submitted up to this time to settle");

  std::uint64_t n = 0;
  std::uint64_t txs = 0;
  auto* gas_cmd = app.add_subcommand("gas", "estimate per-transaction ordering gas");
  gas_cmd->add_option("--n", n, "CrossLinks per ordering cycle")->required()->check(CLI::PositiveNumber);
  gas_cmd->add_option("--txs-per-cl", txs, "transactions per CrossLink")->required()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*sweep_cmd) {
      SweepSpec spec;
      spec.base = load_with_overrides(sweep);
      spec.axis = vary.empty() ? SweepAxis::None : sweep_axis_from_string(vary);
      if (spec.axis != SweepAxis::None && values.empty()) throw ConfigError("--vary needs --values");
      spec.values = values;
      spec.seeds = seeds;
      spec.threads = threads;
      const auto rows = run_sweep(spec);
      if (sweep_out.empty()) {
        write_sweep_csv(std::cout, rows);
      } else {
        std::ofstream os(sweep_out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + sweep_out);
        write_sweep_csv(os, rows);
      }
      return 0;
    }
    if (*audit_cmd) return cmd_audit(trace_path, contract, horizon);
    if (*gas_cmd) return cmd_gas(n, txs);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
