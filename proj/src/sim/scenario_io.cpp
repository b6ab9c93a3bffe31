#include "haechi/sim/scenario_io.hpp"

#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace haechi {

namespace {

class SchemaError : public ConfigError {
  using ConfigError::ConfigError;
};

/// Typed access to one TOML table that remembers which keys were read, so
/// anything left over can be reported as unknown.
class Reader {
 public:
  Reader(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

  std::string key_path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const toml::node* node(std::string_view key) {
    seen_.insert(std::string(key));
    return t_.get(key);
  }

  bool has(std::string_view key) const { return t_.contains(key); }

  std::optional<std::int64_t> opt_int(std::string_view key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::int64_t>()) return *v;
    throw SchemaError(key_path(key) + ": expected an integer");
  }
  std::int64_t get_int(std::string_view key, std::int64_t fallback) {
    return opt_int(key).value_or(fallback);
  }
  std::int64_t req_int(std::string_view key) {
    auto v = opt_int(key);
    if (!v) throw SchemaError(key_path(key) + ": required");
    return *v;
  }

  std::optional<double> opt_num(std::string_view key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<double>()) return *v;
    throw SchemaError(key_path(key) + ": expected a number");
  }
  double get_num(std::string_view key, double fallback) { return opt_num(key).value_or(fallback); }

  std::optional<std::string> opt_str(std::string_view key) {
    const auto* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::string>()) return *v;
    throw SchemaError(key_path(key) + ": expected a string");
  }
  std::string get_str(std::string_view key, std::string fallback) {
    return opt_str(key).value_or(std::move(fallback));
  }
  std::string req_str(std::string_view key) {
    auto v = opt_str(key);
    if (!v) throw SchemaError(key_path(key) + ": required");
    return *v;
  }

  bool get_bool(std::string_view key, bool fallback) {
    const auto* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<bool>()) return *v;
    throw SchemaError(key_path(key) + ": expected a boolean");
  }

  const toml::table* opt_table(std::string_view key) {
    const auto* n = node(key);
    if (!n) return nullptr;
    if (const auto* t = n->as_table()) return t;
    throw SchemaError(key_path(key) + ": expected a table");
  }

  const toml::array* opt_array(std::string_view key) {
    const auto* n = node(key);
    if (!n) return nullptr;
    if (const auto* a = n->as_array()) return a;
    throw SchemaError(key_path(key) + ": expected an array");
  }

  void finish() const {
    for (const auto& [k, v] : t_) {
      (void)v;
      if (!seen_.count(std::string(k.str()))) {
        throw SchemaError(key_path(k.str()) + ": unknown key");
      }
    }
  }

 private:
  const toml::table& t_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string idx(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

template <typename Fn>
void each_table(Reader& r, std::string_view key, Fn&& fn) {
  const auto* arr = r.opt_array(key);
  if (!arr) return;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto path = idx(r.key_path(key), i);
    const auto* t = (*arr)[i].as_table();
    if (!t) throw SchemaError(path + ": expected a table");
    Reader sub(*t, path);
    fn(sub, path);
    sub.finish();
  }
}

ShardId read_shard(Reader& r, std::string_view key, std::int64_t fallback = -1) {
  auto v = r.opt_int(key);
  if (!v && fallback < 0) throw SchemaError(r.key_path(key) + ": required");
  const auto x = v.value_or(fallback);
  if (x < 0 || x > 0xFFFF) throw SchemaError(r.key_path(key) + ": shard id out of range");
  return shard_id(static_cast<std::uint32_t>(x));
}

std::vector<ShardId> read_shard_list(Reader& r, std::string_view key) {
  std::vector<ShardId> out;
  const auto* arr = r.opt_array(key);
  if (!arr) return out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    auto v = (*arr)[i].value_exact<std::int64_t>();
    if (!v || *v < 0) throw SchemaError(idx(r.key_path(key), i) + ": expected a shard id");
    out.push_back(shard_id(static_cast<std::uint32_t>(*v)));
  }
  return out;
}

CallPayload read_payload(Reader& r) {
  CallPayload p;
  const auto call = r.get_str("call", r.has("to") ? "transfer" : "swap");
  if (call == "swap") {
    p.kind = CallKind::Swap;
    p.coins = r.req_int("coins");
  } else if (call == "transfer") {
    p.kind = CallKind::Transfer;
    p.to = r.req_str("to");
    p.amount = r.req_int("amount");
  } else {
    throw SchemaError(r.key_path("call") + ": expected \"swap\" or \"transfer\"");
  }
  return p;
}

void read_top(Reader& r, Scenario& s) {
  s.name = r.get_str("name", s.name);
  if (auto p = r.opt_str("protocol")) {
    auto k = protocol_from_string(*p);
    if (!k) throw SchemaError("protocol: unknown protocol '" + *p + "'");
    s.protocol = *k;
  }
  s.duration = r.get_int("duration", s.duration);
  s.drain = r.get_int("drain", s.drain);
  const auto seed = r.get_int("seed", static_cast<std::int64_t>(s.seed));
  if (seed < 0) throw SchemaError("seed: must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  const auto cap = r.get_int("block_capacity", static_cast<std::int64_t>(s.block_capacity));
  if (cap < 0) throw SchemaError("block_capacity: must be >= 1");
  s.block_capacity = static_cast<std::size_t>(cap);

  if (const auto* b = r.opt_table("beacon")) {
    Reader br(*b, "beacon");
    s.beacon_interval = br.get_int("block_interval", s.beacon_interval);
    br.finish();
  }
}

void read_network(Reader& r, Scenario& s) {
  const auto* t = r.opt_table("network");
  if (!t) return;
  Reader n(*t, "network");
  s.network.default_delay = n.get_int("default_delay", s.network.default_delay);
  s.network.intra_delay = n.get_int("intra_delay", s.network.intra_delay);
  s.network.beacon_delay = n.get_int("beacon_delay", s.network.beacon_delay);
  each_table(n, "delays", [&](Reader& d, const std::string&) {
    DelayOverride o;
    o.from = read_shard(d, "from");
    o.to = read_shard(d, "to");
    o.delay = d.req_int("delay");
    s.network.delays.push_back(o);
  });
  if (const auto* j = n.opt_table("jitter")) {
    for (const auto& [label, v] : *j) {
      auto x = v.value_exact<std::int64_t>();
      if (!x) throw SchemaError("network.jitter." + std::string(label.str()) + ": expected an integer");
      s.network.jitter[std::string(label.str())] = *x;
    }
  }
  n.finish();
}

void read_workload(Reader& r, Scenario& s) {
  const auto* t = r.opt_table("workload");
  if (!t) return;
  Reader w(*t, "workload");
  auto& wl = s.workload;
  wl.rate = w.get_num("rate", wl.rate);
  wl.cross_shard_ratio = w.get_num("cross_shard_ratio", wl.cross_shard_ratio);
  wl.contract_ratio = w.get_num("contract_ratio", wl.contract_ratio);
  wl.sub_call_ratio = w.get_num("sub_call_ratio", wl.sub_call_ratio);
  if (const auto* coins = w.opt_array("coins")) {
    auto lo = coins->size() == 2 ? (*coins)[0].value_exact<std::int64_t>() : std::nullopt;
    auto hi = coins->size() == 2 ? (*coins)[1].value_exact<std::int64_t>() : std::nullopt;
    if (!lo || !hi) throw SchemaError("workload.coins: expected [min, max]");
    wl.min_coins = *lo;
    wl.max_coins = *hi;
  }
  const auto aps = w.get_int("accounts_per_shard", wl.accounts_per_shard);
  if (aps < 0) throw SchemaError("workload.accounts_per_shard: must be >= 0");
  wl.accounts_per_shard = static_cast<std::uint32_t>(aps);
  wl.account_coins = w.get_int("account_coins", wl.account_coins);
  wl.shards = read_shard_list(w, "shards");
  wl.auto_contracts = w.get_bool("auto_contracts", wl.auto_contracts);
  wl.dex_reserve = w.get_int("dex_reserve", wl.dex_reserve);
  w.finish();
}

void read_adversary(Reader& r, Scenario& s) {
  const auto* t = r.opt_table("adversary");
  if (!t) return;
  Reader a(*t, "adversary");
  auto& ad = s.adversary;
  if (auto m = a.opt_str("model")) {
    auto k = adversary_from_string(*m);
    if (!k) throw SchemaError("adversary.model: unknown model '" + *m + "'");
    ad.model = *k;
  }
  ad.observers = read_shard_list(a, "observers");
  if (a.has("attacker_shard")) ad.attacker_shard = read_shard(a, "attacker_shard");
  ad.reaction_delay = a.get_int("reaction_delay", ad.reaction_delay);
  ad.reaction_jitter = a.get_int("reaction_jitter", ad.reaction_jitter);
  const auto byz = a.get_int("byzantine_observers", ad.byzantine_observers);
  if (byz < 0) throw SchemaError("adversary.byzantine_observers: must be >= 0");
  ad.byzantine_observers = static_cast<std::uint32_t>(byz);
  ad.observe_prob = a.get_num("observe_prob", ad.observe_prob);
  if (auto lead = a.opt_int("observation_lead")) ad.observation_lead = *lead;
  ad.attacker_coins = a.get_int("attacker_coins", ad.attacker_coins);
  a.finish();
}

Scenario read_scenario(const toml::table& root) {
  Scenario s;
  Reader r(root, "");
  read_top(r, s);
  read_network(r, s);
  read_workload(r, s);
  read_adversary(r, s);

  each_table(r, "shards", [&](Reader& t, const std::string&) {
    ShardSpec sp;
    sp.id = read_shard(t, "id", static_cast<std::int64_t>(s.shards.size() + 1));
    sp.block_interval = t.get_int("block_interval", sp.block_interval);
    if (auto c = t.opt_int("capacity")) {
      if (*c < 0) throw SchemaError(t.key_path("capacity") + ": must be >= 1");
      sp.capacity = static_cast<std::size_t>(*c);
    }
    if (auto st = t.opt_int("start")) sp.start = *st;
    if (auto h = t.opt_int("halt_at")) sp.halt_at = *h;
    s.shards.push_back(sp);
  });

  each_table(r, "contracts", [&](Reader& t, const std::string& path) {
    ContractSpec c;
    c.id = t.req_str("id");
    try {
      c.kind = contract_kind_from_string(t.get_str("kind", "token_exchange"));
    } catch (const ConfigError& e) {
      throw SchemaError(path + ".kind: " + e.what());
    }
    c.shard = read_shard(t, "shard");
    if (const auto* g = t.opt_table("genesis")) {
      Reader gr(*g, path + ".genesis");
      if (c.kind == ContractKind::TokenExchange) {
        c.coin_reserve = gr.get_int("coin_reserve", 1'000'000);
        c.token_reserve = gr.get_int("token_reserve", 1'000'000);
      } else if (const auto* b = gr.opt_table("balances")) {
        for (const auto& [acct, v] : *b) {
          auto x = v.value_exact<std::int64_t>();
          if (!x) {
            throw SchemaError(path + ".genesis.balances." + std::string(acct.str()) +
                              ": expected an integer");
          }
          c.balances[std::string(acct.str())] = *x;
        }
      }
      gr.finish();
    } else if (c.kind == ContractKind::TokenExchange) {
      c.coin_reserve = 1'000'000;
      c.token_reserve = 1'000'000;
    }
    s.contracts.push_back(std::move(c));
  });

  each_table(r, "accounts", [&](Reader& t, const std::string&) {
    AccountSpec a;
    a.id = t.req_str("id");
    a.shard = read_shard(t, "shard");
    a.coins = t.get_int("coins", 0);
    s.accounts.push_back(std::move(a));
  });

  each_table(r, "transactions", [&](Reader& t, const std::string& path) {
    ExplicitTx x;
    x.label = t.get_str("label", "");
    x.time = t.get_int("time", 0);
    if (auto k = t.opt_str("kind")) {
      try {
        x.kind = tx_kind_from_string(*k);
      } catch (const ConfigError& e) {
        throw SchemaError(path + ".kind: " + e.what());
      }
    }
    x.sender = t.req_str("sender");
    if (auto c = t.opt_str("contract")) {
      x.call = CallSpec{*c, read_payload(t)};
      each_table(t, "sub_calls", [&](Reader& sc, const std::string&) {
        CallSpec cs;
        cs.contract = sc.req_str("contract");
        cs.payload = read_payload(sc);
        x.sub_calls.push_back(std::move(cs));
      });
    } else {
      x.recipient = t.req_str("to");
      x.amount = t.req_int("amount");
      (void)t.opt_str("call");
      (void)t.opt_array("sub_calls");
      if (t.has("sub_calls")) throw SchemaError(path + ".sub_calls: require a contract call");
    }
    s.transactions.push_back(std::move(x));
  });

  each_table(r, "victims", [&](Reader& t, const std::string&) {
    VictimStream v;
    const auto n = t.req_int("count");
    if (n < 0) throw SchemaError(t.key_path("count") + ": must be >= 0");
    v.count = static_cast<std::size_t>(n);
    v.sender_shard = read_shard(t, "sender_shard");
    v.contract = t.req_str("contract");
    v.start = t.get_int("start", v.start);
    v.spacing = t.get_int("spacing", v.spacing);
    v.coins = t.get_int("coins", v.coins);
    s.victims.push_back(std::move(v));
  });

  r.finish();
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw ConfigError(os.str());
  }
  try {
    return read_scenario(root);
  } catch (const SchemaError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace haechi
