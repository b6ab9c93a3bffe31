#include "haechi/sim/scenario.hpp"

#include <set>
#include <sstream>

namespace haechi {

const char* to_string(AdversaryModel m) {
  switch (m) {
    case AdversaryModel::None: return "none";
    case AdversaryModel::IntraShardAttack: return "intra_shard";
    case AdversaryModel::CrossShardAttack: return "cross_shard";
  }
  return "?";
}

std::optional<AdversaryModel> adversary_from_string(const std::string& s) {
  if (s == "none" || s == "None") return AdversaryModel::None;
  if (s == "intra_shard" || s == "intra" || s == "IntraShardAttack") {
    return AdversaryModel::IntraShardAttack;
  }
  if (s == "cross_shard" || s == "cross" || s == "CrossShardAttack") {
    return AdversaryModel::CrossShardAttack;
  }
  return std::nullopt;
}

const ShardSpec& Scenario::shard(ShardId s) const {
  if (value(s) == 0 || value(s) > shards.size()) {
    throw ConfigError("unknown shard id " + std::to_string(value(s)));
  }
  return shards[value(s) - 1];
}

Time Scenario::delay(ShardId from, ShardId to) const {
  for (const auto& o : network.delays) {
    if (o.from == from && o.to == to) return o.delay;
  }
  if (from == to) return network.intra_delay;
  if (from == kBeaconShard || to == kBeaconShard) return network.beacon_delay;
  return network.default_delay;
}

Time Scenario::observation_lead(ShardId s) const {
  return adversary.observation_lead.value_or(delay(s, s));
}

std::size_t Scenario::capacity(ShardId s) const {
  return shard(s).capacity.value_or(block_capacity);
}

Time Scenario::start(ShardId s) const {
  const auto& sp = shard(s);
  return sp.start.value_or(sp.block_interval);
}

namespace {

class Errors {
 public:
  template <typename... Parts>
  void add(const std::string& path, Parts&&... parts) {
    std::ostringstream os;
    os << path << ": ";
    (os << ... << parts);
    out.push_back(os.str());
  }
  std::vector<std::string> out;
};

std::string at(const char* base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

}  // namespace

std::vector<std::string> validation_errors(const Scenario& s) {
  Errors e;
  const auto m = s.shard_count();
  auto shard_ok = [&](ShardId id) { return value(id) >= 1 && value(id) <= m; };

  if (s.duration < 0) e.add("duration", "must be >= 0");
  if (s.drain < 0) e.add("drain", "must be >= 0");
  if (s.block_capacity < 1) e.add("block_capacity", "must be >= 1");
  if (s.beacon_interval < 1) e.add("beacon.block_interval", "must be >= 1");

  if (s.shards.empty()) e.add("shards", "at least one shard is required");
  for (std::size_t i = 0; i < s.shards.size(); ++i) {
    const auto& sh = s.shards[i];
    const auto p = at("shards", i);
    if (value(sh.id) != i + 1) {
      e.add(p + ".id", "expected ", i + 1, " (shard ids run 1..N in order), got ", value(sh.id));
    }
    if (sh.block_interval < 1) e.add(p + ".block_interval", "must be >= 1");
    if (sh.capacity && *sh.capacity < 1) e.add(p + ".capacity", "must be >= 1");
    if (sh.start && *sh.start < 0) e.add(p + ".start", "must be >= 0");
    if (sh.halt_at && *sh.halt_at < 0) e.add(p + ".halt_at", "must be >= 0");
    if (sh.block_interval >= 1 && value(sh.id) == i + 1) {
      const Time lead = s.observation_lead(sh.id);
      if (lead < 0) e.add(p, "observation lead must be >= 0");
      if (lead > sh.block_interval) {
        e.add(p, "observation lead ", lead, " exceeds block_interval ", sh.block_interval);
      }
    }
  }

  if (s.network.default_delay < 1) e.add("network.default_delay", "must be >= 1");
  if (s.network.beacon_delay < 1) e.add("network.beacon_delay", "must be >= 1");
  if (s.network.intra_delay < 0) e.add("network.intra_delay", "must be >= 0");
  for (std::size_t i = 0; i < s.network.delays.size(); ++i) {
    const auto& d = s.network.delays[i];
    const auto p = at("network.delays", i);
    if (value(d.from) > m) e.add(p + ".from", "unknown shard id ", value(d.from));
    if (value(d.to) > m) e.add(p + ".to", "unknown shard id ", value(d.to));
    if (d.from != d.to && d.delay < 1) e.add(p + ".delay", "must be >= 1 between distinct shards");
    if (d.from == d.to && d.delay < 0) e.add(p + ".delay", "must be >= 0");
  }

  std::set<ContractId> contracts;
  for (std::size_t i = 0; i < s.contracts.size(); ++i) {
    const auto& c = s.contracts[i];
    const auto p = at("contracts", i);
    if (c.id.empty()) e.add(p + ".id", "must not be empty");
    if (!contracts.insert(c.id).second) e.add(p + ".id", "duplicate contract id '", c.id, "'");
    if (!shard_ok(c.shard)) e.add(p + ".shard", "unknown shard id ", value(c.shard));
    if (c.kind == ContractKind::TokenExchange) {
      if (c.coin_reserve < 0) e.add(p + ".genesis.coin_reserve", "must be >= 0");
      if (c.token_reserve < 1) e.add(p + ".genesis.token_reserve", "must be >= 1");
    }
    for (const auto& [acct, bal] : c.balances) {
      if (bal < 0) e.add(p + ".genesis.balances." + acct, "must be >= 0");
    }
  }
  if (s.workload.auto_contracts) {
    for (std::uint32_t sh = 1; sh <= m; ++sh) contracts.insert("dex-" + std::to_string(sh));
  }

  std::set<AccountId> accounts;
  for (std::size_t i = 0; i < s.accounts.size(); ++i) {
    const auto& a = s.accounts[i];
    const auto p = at("accounts", i);
    if (a.id.empty()) e.add(p + ".id", "must not be empty");
    if (!accounts.insert(a.id).second) e.add(p + ".id", "duplicate account id '", a.id, "'");
    if (!shard_ok(a.shard)) e.add(p + ".shard", "unknown shard id ", value(a.shard));
    if (a.coins < 0) e.add(p + ".coins", "must be >= 0");
  }

  const auto& w = s.workload;
  if (w.rate < 0) e.add("workload.rate", "must be >= 0");
  if (w.cross_shard_ratio < 0 || w.cross_shard_ratio > 1) {
    e.add("workload.cross_shard_ratio", "must be in [0, 1]");
  }
  if (w.contract_ratio < 0 || w.contract_ratio > 1) e.add("workload.contract_ratio", "must be in [0, 1]");
  if (w.sub_call_ratio < 0 || w.sub_call_ratio > 1) e.add("workload.sub_call_ratio", "must be in [0, 1]");
  if (w.min_coins < 1 || w.max_coins < w.min_coins) {
    e.add("workload.coins", "need 1 <= min_coins <= max_coins");
  }
  if (w.rate > 0 && w.accounts_per_shard < 1) e.add("workload.accounts_per_shard", "must be >= 1");
  for (std::size_t i = 0; i < w.shards.size(); ++i) {
    if (!shard_ok(w.shards[i])) e.add(at("workload.shards", i), "unknown shard id ", value(w.shards[i]));
  }

  std::set<std::string> labels;
  for (std::size_t i = 0; i < s.transactions.size(); ++i) {
    const auto& t = s.transactions[i];
    const auto p = at("transactions", i);
    if (!t.label.empty() && !labels.insert(t.label).second) {
      e.add(p + ".label", "duplicate label '", t.label, "'");
    }
    if (t.time < 0) e.add(p + ".time", "must be >= 0");
    if (!accounts.count(t.sender)) e.add(p + ".sender", "unknown account '", t.sender, "'");
    if (t.call && !contracts.count(t.call->contract)) {
      e.add(p + ".contract", "unknown contract '", t.call->contract, "'");
    }
    for (std::size_t k = 0; k < t.sub_calls.size(); ++k) {
      if (!contracts.count(t.sub_calls[k].contract)) {
        e.add(p + at(".sub_calls", k) + ".contract", "unknown contract '", t.sub_calls[k].contract, "'");
      }
    }
    if (!t.call && !t.sub_calls.empty()) e.add(p + ".sub_calls", "require a contract call");
    if (!t.call && !accounts.count(t.recipient)) {
      e.add(p + ".to", "unknown recipient account '", t.recipient, "'");
    }
  }
  for (const auto& [label, extra] : s.network.jitter) {
    if (!labels.count(label)) e.add("network.jitter." + label, "no transaction carries this label");
    if (extra < 0) e.add("network.jitter." + label, "must be >= 0");
  }

  for (std::size_t i = 0; i < s.victims.size(); ++i) {
    const auto& v = s.victims[i];
    const auto p = at("victims", i);
    if (!shard_ok(v.sender_shard)) e.add(p + ".sender_shard", "unknown shard id ", value(v.sender_shard));
    if (!contracts.count(v.contract)) e.add(p + ".contract", "unknown contract '", v.contract, "'");
    if (v.spacing < 1) e.add(p + ".spacing", "must be >= 1");
    if (v.start < 0) e.add(p + ".start", "must be >= 0");
    if (v.coins < 1) e.add(p + ".coins", "must be >= 1");
  }

  const auto& a = s.adversary;
  if (a.model != AdversaryModel::None) {
    if (a.reaction_delay < 1) e.add("adversary.reaction_delay", "must be >= 1");
    if (a.reaction_jitter < 0) e.add("adversary.reaction_jitter", "must be >= 0");
    if (a.byzantine_observers < 1) e.add("adversary.byzantine_observers", "must be >= 1");
    if (a.observe_prob < 0 || a.observe_prob > 1) e.add("adversary.observe_prob", "must be in [0, 1]");
    if (a.attacker_coins < 0) e.add("adversary.attacker_coins", "must be >= 0");
    for (std::size_t i = 0; i < a.observers.size(); ++i) {
      if (!shard_ok(a.observers[i])) {
        e.add(at("adversary.observers", i), "unknown shard id ", value(a.observers[i]));
      }
    }
    if (a.model == AdversaryModel::CrossShardAttack && !shard_ok(a.attacker_shard)) {
      e.add("adversary.attacker_shard", "unknown shard id ", value(a.attacker_shard));
    }
  }
  return e.out;
}

void validate(const Scenario& s) {
  auto errs = validation_errors(s);
  if (errs.empty()) return;
  std::string msg = "invalid scenario '" + s.name + "':";
  for (const auto& x : errs) msg += "\n  " + x;
  throw ConfigError(msg);
}

void apply_overrides(Scenario& s, const Overrides& o) {
  if (o.protocol) s.protocol = *o.protocol;
  if (o.seed) s.seed = *o.seed;
  if (o.duration) s.duration = *o.duration;
  if (o.workload) s.workload.rate = *o.workload;
  if (o.cross_shard_ratio) s.workload.cross_shard_ratio = *o.cross_shard_ratio;
  if (o.adversary) s.adversary.model = *o.adversary;
  if (o.byzantine_observers) s.adversary.byzantine_observers = *o.byzantine_observers;
  if (o.shards) {
    std::vector<ShardSpec> old = s.shards;
    if (old.empty()) old.push_back(ShardSpec{});
    s.shards.clear();
    for (std::uint32_t i = 0; i < *o.shards; ++i) {
      ShardSpec sp = old[i % old.size()];
      sp.id = shard_id(i + 1);
      s.shards.push_back(sp);
    }
  }
}

}  // namespace haechi
