#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include "haechi/audit/audit.hpp"
#include "haechi/protocols/driver.hpp"
#include "haechi/sim/scenario_io.hpp"
#include "haechi/sim/simulator.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#ifndef HAECHI_SOURCE_DIR
#error "HAECHI_SOURCE_DIR must point at the repository root"
#endif

namespace haechi::testing {

inline Scenario load(const std::string& name) {
  return load_scenario(std::string(HAECHI_SOURCE_DIR) + "/scenarios/" + name + ".toml");
}

inline Trace simulate(const Scenario& s) {
  Simulator sim(s);
  return sim.run();
}

inline std::size_t count_kind(const std::vector<Violation>& vs, ViolationKind k) {
  return static_cast<std::size_t>(
      std::count_if(vs.begin(), vs.end(), [k](const Violation& v) { return v.kind == k; }));
}

/// Random heterogeneous system: 2-8 shards, block intervals 1-8, mixed
/// workload with multi-contract calls.
inline Scenario random_scenario(std::uint64_t seed, ProtocolKind protocol) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 17);
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  Scenario s;
  s.name = "random-" + std::to_string(seed);
  s.protocol = protocol;
  s.seed = seed;
  s.duration = pick(20, 40);
  s.drain = 5000;
  s.block_capacity = static_cast<std::size_t>(pick(4, 32));
  s.beacon_interval = pick(1, 2);
  const auto m = static_cast<std::uint32_t>(pick(2, 8));
  for (std::uint32_t i = 1; i <= m; ++i) {
    ShardSpec sp;
    sp.id = shard_id(i);
    sp.block_interval = pick(1, 8);
    sp.start = pick(1, sp.block_interval);
    s.shards.push_back(sp);
  }
  s.network.default_delay = pick(1, 4);
  s.network.beacon_delay = pick(1, 3);
  s.network.intra_delay = 1;
  for (int k = 0, n = static_cast<int>(pick(0, 3)); k < n; ++k) {
    const auto a = static_cast<std::uint32_t>(pick(1, m));
    const auto b = static_cast<std::uint32_t>(pick(1, m));
    if (a != b) s.network.delays.push_back({shard_id(a), shard_id(b), pick(1, 9)});
  }
  s.workload.rate = real(0.1, 0.6);
  s.workload.cross_shard_ratio = real(0.2, 0.9);
  s.workload.contract_ratio = real(0.4, 0.9);
  s.workload.sub_call_ratio = real(0.0, 0.4);
  s.workload.accounts_per_shard = static_cast<std::uint32_t>(pick(2, 6));
  // Thin pools and poor accounts make some calls fail, exercising aborts.
  const Amount reserves[] = {2, 50, 1'000'000};
  s.workload.dex_reserve = reserves[pick(0, 2)];
  s.workload.account_coins = pick(0, 3) == 0 ? 60 : 1'000'000;
  return s;
}

// ---- naive ordering test double ----

/// Orders every CrossLink the moment it reaches the beacon, one cycle per
/// CrossLink, with no waiting on slower shards.
class NaiveOrderDriver final : public ProtocolDriver {
 public:
  explicit NaiveOrderDriver(SimContext& ctx) : ctx_(ctx) {}

  void on_block(ShardEngine& sh, std::vector<Message>& inbox, const std::vector<TxRef>& txs) override {
    for (auto& msg : inbox) {
      if (auto* c = std::get_if<CclMsg>(&msg)) {
        sh.enqueue_ccl(c->entries);
      } else if (auto* e = std::get_if<ExecMsg>(&msg)) {
        if (auto d = sh.on_execution_message(e->msg)) {
          for (auto s : sh.settle_decision(e->tx, *d)) ctx_.send(sh.id(), s, DecisionMsg{e->tx, d->decision});
        }
      } else if (auto* d = std::get_if<DecisionMsg>(&msg)) {
        sh.apply_contract_decision(d->tx->id, d->outcome);
      } else if (auto* cr = std::get_if<CreditMsg>(&msg)) {
        sh.apply_credit(cr->tx);
      }
    }
    for (auto& out : sh.run_exec_queue()) {
      ctx_.send(sh.id(), out.tx->sender_shard, ExecMsg{out.tx, std::move(out.message)});
    }
    for (const auto& tx : txs) sh.admit(tx);
  }

  void on_sealed(ShardEngine& sh, const BlockResult& r) override {
    auto ids = nlohmann::json::array();
    for (const auto& tx : r.crosslink.tx_list) ids.push_back(value(tx->id));
    ctx_.sink().record(EventKind::CrossLinkSent, Subject::crosslink(r.crosslink.shard, r.crosslink.height),
                       sh.id(), {{"block_ts", r.crosslink.block_ts}, {"height", r.crosslink.height}, {"txs", ids}});
    ctx_.send(sh.id(), kBeaconShard, CrossLinkMsg{r.crosslink}, 0, 0);
  }

  bool on_arrival(ShardId to, Message& msg) override {
    auto* clm = std::get_if<CrossLinkMsg>(&msg);
    if (!clm || to != kBeaconShard) return false;
    const auto& cl = clm->cl;
    ctx_.sink().record(EventKind::CrossLinkReceived, Subject::crosslink(cl.shard, cl.height), kBeaconShard,
                       {{"block_ts", cl.block_ts}, {"height", cl.height}, {"receipt", "appended"}});
    ++cycle_;
    auto order = nlohmann::json::array();
    std::map<ShardId, std::vector<CclEntry>> lists;
    for (std::uint32_t i = 0; i < cl.tx_list.size(); ++i) {
      CclEntry e{cl.tx_list[i], cl.shard, cl.height, i, cl.block_ts};
      order.push_back({{"tx", value(e.tx->id)}, {"shard", value(cl.shard)}, {"height", cl.height},
                       {"block_ts", cl.block_ts}, {"key_ts", cl.block_ts}, {"index", i}});
      for (auto s : e.tx->contract_shards()) lists[s].push_back(e);
    }
    ctx_.sink().record(EventKind::Ordered, Subject::cycle(cycle_), kBeaconShard,
                       {{"cycle", cycle_},
                        {"end_ts", cl.block_ts},
                        {"crosslinks", {{{"shard", value(cl.shard)}, {"height", cl.height},
                                         {"block_ts", cl.block_ts}, {"txs", cl.tx_list.size()}}}},
                        {"order", order}});
    for (auto& [s, list] : lists) ctx_.send(kBeaconShard, s, CclMsg{cycle_, list}, 0, 0);
    return true;
  }

 private:
  SimContext& ctx_;
  std::uint64_t cycle_ = 0;
};

inline Simulator::DriverFactory naive_order_factory() {
  return [](SimContext& ctx) { return std::make_unique<NaiveOrderDriver>(ctx); };
}

/// Two shards: a slow shard 2 whose CrossLinks take long to reach the
/// beacon, and a fast shard 1 whose later blocks overtake them.
inline Scenario overtaking_scenario(ProtocolKind protocol) {
  Scenario s;
  s.name = "overtaking";
  s.protocol = protocol;
  s.duration = 30;
  s.drain = 200;
  s.shards = {ShardSpec{shard_id(1), 1, {}, {}, {}}, ShardSpec{shard_id(2), 5, {}, {}, {}}};
  s.network.default_delay = 2;
  s.network.beacon_delay = 1;
  s.network.delays = {{shard_id(2), kBeaconShard, 6}};
  s.accounts = {{"p", shard_id(2), 100}, {"q", shard_id(1), 100}, {"r", shard_id(1), 100}};
  ExplicitTx slow;
  slow.label = "slow";
  slow.time = 5;
  slow.sender = "p";
  slow.call = CallSpec{"dex-1", CallPayload{CallKind::Swap, 10, {}, 0}};
  ExplicitTx fast;
  fast.label = "fast";
  fast.time = 6;
  fast.sender = "q";
  fast.call = CallSpec{"dex-1", CallPayload{CallKind::Swap, 10, {}, 0}};
  s.transactions = {slow, fast};
  return s;
}

// ---- brute-force recomputation of the ordering cycles ----

struct OracleCycle {
  std::vector<std::pair<std::uint32_t, Height>> crosslinks;  // sorted
  std::vector<std::uint64_t> order;                          // tx ids
};

/// Replays CrossLink arrivals from the trace and recomputes every cycle
/// from scratch: a cycle fires once each shard has an unordered CrossLink
/// directly after its last ordered height, and takes every such
/// consecutive CrossLink no newer than the smallest per-shard newest one.
inline std::vector<OracleCycle> recompute_cycles(const Trace& trace, std::uint32_t shards) {
  struct Cl {
    Time ts = 0;
    std::vector<std::uint64_t> txs;
  };
  std::map<std::pair<std::uint32_t, Height>, Cl> sent;
  std::map<std::uint32_t, std::set<Height>> received;
  std::map<std::uint32_t, Height> ordered;
  std::vector<OracleCycle> out;

  for (const auto& ev : trace.events()) {
    const std::pair<std::uint32_t, Height> key{static_cast<std::uint32_t>(ev.subject.a), ev.subject.b};
    if (ev.kind == EventKind::CrossLinkSent) {
      Cl c;
      c.ts = ev.detail.at("block_ts").get<Time>();
      for (const auto& t : ev.detail.at("txs")) c.txs.push_back(t.get<std::uint64_t>());
      sent[key] = c;
      continue;
    }
    if (ev.kind != EventKind::CrossLinkReceived) continue;
    received[key.first].insert(key.second);
    for (;;) {
      std::map<std::uint32_t, Height> rear;
      bool ready = true;
      for (std::uint32_t s = 1; s <= shards; ++s) {
        Height h = ordered[s];
        while (received[s].count(h + 1)) ++h;
        rear[s] = h;
        if (h == ordered[s]) ready = false;
      }
      if (!ready) break;
      Time end = sent.at({1, rear[1]}).ts;
      for (std::uint32_t s = 2; s <= shards; ++s) end = std::min(end, sent.at({s, rear[s]}).ts);
      std::vector<std::tuple<Time, std::uint32_t, Height>> picked;
      for (std::uint32_t s = 1; s <= shards; ++s) {
        for (Height h = ordered[s] + 1; h <= rear[s] && sent.at({s, h}).ts <= end; ++h) {
          picked.emplace_back(sent.at({s, h}).ts, s, h);
        }
      }
      std::sort(picked.begin(), picked.end());
      OracleCycle c;
      for (const auto& [ts, s, h] : picked) {
        c.crosslinks.emplace_back(s, h);
        ordered[s] = std::max(ordered[s], h);
        for (auto t : sent.at({s, h}).txs) c.order.push_back(t);
      }
      std::sort(c.crosslinks.begin(), c.crosslinks.end());
      out.push_back(std::move(c));
    }
  }
  return out;
}

inline std::vector<OracleCycle> recorded_cycles(const Trace& trace) {
  std::vector<OracleCycle> out;
  for (const auto& ev : trace.events()) {
    if (ev.kind != EventKind::Ordered || ev.subject.kind != Subject::Kind::Cycle) continue;
    OracleCycle c;
    for (const auto& cl : ev.detail.at("crosslinks")) {
      c.crosslinks.emplace_back(cl.at("shard").get<std::uint32_t>(), cl.at("height").get<Height>());
    }
    for (const auto& e : ev.detail.at("order")) c.order.push_back(e.at("tx").get<std::uint64_t>());
    std::sort(c.crosslinks.begin(), c.crosslinks.end());
    out.push_back(std::move(c));
  }
  return out;
}

inline bool same_cycles(const std::vector<OracleCycle>& a, const std::vector<OracleCycle>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].crosslinks != b[i].crosslinks || a[i].order != b[i].order) return false;
  }
  return true;
}

// ---- fault injection on stored traces ----

inline Trace rebuild(std::vector<TraceEvent> events) { return Trace::from_events(std::move(events)); }

/// Removes the first CrossLink of the first multi-CrossLink cycle (or of
/// cycle 1) from the cycle record.
inline Trace drop_ordered_crosslink(const Trace& t) {
  auto evs = t.events();
  for (auto& ev : evs) {
    if (ev.kind == EventKind::Ordered && ev.subject.kind == Subject::Kind::Cycle) {
      auto& cls = ev.detail["crosslinks"];
      if (cls.size() >= 1) {
        cls.erase(cls.begin());
        break;
      }
    }
  }
  return rebuild(std::move(evs));
}

/// Turns the first contract-side Committed event into Aborted.
inline Trace flip_one_decision(const Trace& t) {
  auto evs = t.events();
  for (auto& ev : evs) {
    if (ev.kind == EventKind::Committed && ev.detail.value("side", std::string{}) == "contract") {
      ev.kind = EventKind::Aborted;
      break;
    }
  }
  return rebuild(std::move(evs));
}

}  // namespace haechi::testing
