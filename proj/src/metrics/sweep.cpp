#include "haechi/metrics/sweep.hpp"

#include "haechi/sim/simulator.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace haechi {

namespace {

double parse_double(const std::string& axis, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("sweep " + axis + ": '" + v + "' is not a number");
}

std::uint32_t parse_count(const std::string& axis, const std::string& v) {
  const double d = parse_double(axis, v);
  if (d < 0 || d != static_cast<double>(static_cast<std::uint32_t>(d))) {
    throw ConfigError("sweep " + axis + ": '" + v + "' is not a non-negative integer");
  }
  return static_cast<std::uint32_t>(d);
}

}  // namespace

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::None: return "none";
    case SweepAxis::Workload: return "workload";
    case SweepAxis::ByzantineAttackers: return "byzantine_attackers";
    case SweepAxis::Shards: return "shards";
    case SweepAxis::CrossShardRatio: return "cross_shard_ratio";
    case SweepAxis::Protocol: return "protocol";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  for (auto a : {SweepAxis::None, SweepAxis::Workload, SweepAxis::ByzantineAttackers, SweepAxis::Shards,
                 SweepAxis::CrossShardRatio, SweepAxis::Protocol}) {
    if (s == to_string(a)) return a;
  }
  throw ConfigError("unknown sweep axis '" + s +
                    "' (expected workload, byzantine_attackers, shards, cross_shard_ratio or protocol)");
}

void apply_axis(Scenario& s, SweepAxis axis, const std::string& v) {
  Overrides o;
  const std::string name = to_string(axis);
  switch (axis) {
    case SweepAxis::None: return;
    case SweepAxis::Workload: o.workload = parse_double(name, v); break;
    case SweepAxis::ByzantineAttackers: o.byzantine_observers = parse_count(name, v); break;
    case SweepAxis::Shards: o.shards = parse_count(name, v); break;
    case SweepAxis::CrossShardRatio: o.cross_shard_ratio = parse_double(name, v); break;
    case SweepAxis::Protocol: {
      auto p = protocol_from_string(v);
      if (!p) throw ConfigError("sweep protocol: unknown protocol '" + v + "'");
      o.protocol = *p;
      break;
    }
  }
  apply_overrides(s, o);
}

RunOutput run_once(const Scenario& s, const AuditOptions& audit) {
  RunOutput out;
  {
    Simulator sim(s);
    out.trace = sim.run();
  }
  AuditOptions opts = audit;
  if (!opts.horizon) opts.horizon = s.duration;
  out.audit = run_audit(out.trace, opts);
  out.metrics = compute_metrics(out.trace, &out.audit);
  return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  std::vector<std::string> values = spec.values;
  if (spec.axis == SweepAxis::None || values.empty()) values = {""};
  std::vector<std::uint64_t> seeds = spec.seeds;
  if (seeds.empty()) seeds = {spec.base.seed};

  // Validate every variant up front so a bad value fails before any work.
  std::vector<Scenario> variants;
  for (const auto& v : values) {
    Scenario s = spec.base;
    apply_axis(s, spec.axis, v);
    validate(s);
    variants.push_back(std::move(s));
  }

  const std::size_t jobs = variants.size() * seeds.size();
  std::vector<SweepRow> rows(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        Scenario s = variants[i / seeds.size()];
        s.seed = seeds[i % seeds.size()];
        auto out = run_once(s);
        rows[i].labels = {s.name, to_string(s.protocol), s.seed, values[i / seeds.size()]};
        rows[i].metrics = std::move(out.metrics);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned n = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, jobs));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  write_csv_header(os);
  for (const auto& r : rows) write_csv_row(os, r.labels, r.metrics);
}

}  // namespace haechi
