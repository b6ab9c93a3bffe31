#include "haechi/sim/workload.hpp"

#include <algorithm>
#include <cmath>

namespace haechi {

std::string workload_account(ShardId s, std::uint32_t k) {
  return "u" + std::to_string(value(s)) + "-" + std::to_string(k);
}
std::string victim_account(ShardId s) { return "victim@" + std::to_string(value(s)); }
std::string attacker_account(ShardId s) { return "attacker@" + std::to_string(value(s)); }
std::string auto_contract(ShardId s) { return "dex-" + std::to_string(value(s)); }

ShardId World::account_shard(const AccountId& a) const {
  auto it = accounts.find(a);
  if (it == accounts.end()) throw ConfigError("unknown account '" + a + "'");
  return it->second.shard;
}

ShardId World::contract_shard(const ContractId& c) const {
  auto it = contracts.find(c);
  if (it == contracts.end()) throw ConfigError("unknown contract '" + c + "'");
  return it->second.shard;
}

std::vector<ContractId> World::exchanges_on(ShardId s) const {
  std::vector<ContractId> out;
  for (const auto& [id, c] : contracts) {
    if (c.shard == s && c.kind == ContractKind::TokenExchange) out.push_back(id);
  }
  return out;
}

namespace {

std::vector<ShardId> workload_shards(const Scenario& s) {
  if (!s.workload.shards.empty()) return s.workload.shards;
  std::vector<ShardId> all;
  for (std::uint32_t i = 1; i <= s.shard_count(); ++i) all.push_back(shard_id(i));
  return all;
}

void add_account(World& w, const AccountId& id, ShardId s, Amount coins) {
  w.accounts.emplace(id, AccountSpec{id, s, coins});
}

}  // namespace

World build_world(const Scenario& s) {
  World w;
  for (const auto& a : s.accounts) w.accounts.emplace(a.id, a);
  for (const auto& c : s.contracts) w.contracts.emplace(c.id, c);
  const auto m = s.shard_count();

  if (s.workload.auto_contracts) {
    for (std::uint32_t i = 1; i <= m; ++i) {
      ContractSpec c;
      c.id = auto_contract(shard_id(i));
      c.kind = ContractKind::TokenExchange;
      c.shard = shard_id(i);
      c.coin_reserve = s.workload.dex_reserve;
      // 1000 tokens per coin, so a 1-coin swap still buys something.
      c.token_reserve = s.workload.dex_reserve * 1000;
      w.contracts.emplace(c.id, c);
    }
  }
  if (s.workload.rate > 0) {
    for (auto sh : workload_shards(s)) {
      for (std::uint32_t k = 0; k < s.workload.accounts_per_shard; ++k) {
        add_account(w, workload_account(sh, k), sh, s.workload.account_coins);
      }
    }
  }
  for (const auto& v : s.victims) {
    add_account(w, victim_account(v.sender_shard), v.sender_shard,
                v.coins * static_cast<Amount>(v.count + 1));
  }
  switch (s.adversary.model) {
    case AdversaryModel::None: break;
    case AdversaryModel::IntraShardAttack:
      for (std::uint32_t i = 1; i <= m; ++i) {
        add_account(w, attacker_account(shard_id(i)), shard_id(i), s.adversary.attacker_coins);
      }
      break;
    case AdversaryModel::CrossShardAttack:
      add_account(w, attacker_account(s.adversary.attacker_shard), s.adversary.attacker_shard,
                  s.adversary.attacker_coins);
      break;
  }
  return w;
}

std::vector<TxSpec> explicit_transactions(const Scenario& s, const World& w) {
  std::vector<TxSpec> out;
  for (const auto& x : s.transactions) {
    TxSpec t;
    t.sender = x.sender;
    t.sender_shard = w.account_shard(x.sender);
    t.submit_time = x.time;
    t.label = x.label;
    if (x.call) {
      t.entry = ContractCall{x.call->contract, w.contract_shard(x.call->contract), x.call->payload};
      for (const auto& sc : x.sub_calls) {
        t.sub_calls.push_back({sc.contract, w.contract_shard(sc.contract), sc.payload});
      }
      t.kind = x.kind.value_or(t.entry->shard == t.sender_shard ? TxKind::IntraShard : TxKind::OSC);
    } else {
      t.recipient = x.recipient;
      t.recipient_shard = w.account_shard(x.recipient);
      t.amount = x.amount;
      t.kind = x.kind.value_or(t.recipient_shard == t.sender_shard ? TxKind::IntraShard
                                                                   : TxKind::CrossShardTransfer);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TxSpec> victim_transactions(const Scenario& s, const World& w) {
  std::vector<TxSpec> out;
  for (std::size_t vi = 0; vi < s.victims.size(); ++vi) {
    const auto& v = s.victims[vi];
    const ShardId cs = w.contract_shard(v.contract);
    for (std::size_t i = 0; i < v.count; ++i) {
      TxSpec t;
      t.kind = cs == v.sender_shard ? TxKind::IntraShard : TxKind::OSC;
      t.sender = victim_account(v.sender_shard);
      t.sender_shard = v.sender_shard;
      CallPayload p;
      p.kind = CallKind::Swap;
      p.coins = v.coins;
      t.entry = ContractCall{v.contract, cs, p};
      t.submit_time = v.start + static_cast<Time>(i) * v.spacing;
      t.label = "victim-" + std::to_string(vi) + "-" + std::to_string(i);
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<TxSpec> generate_workload(const Scenario& s, const World& w, std::mt19937_64& rng) {
  std::vector<TxSpec> out;
  const auto& wl = s.workload;
  if (wl.rate <= 0 || s.duration <= 0) return out;
  const auto m = s.shard_count();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> gap(wl.rate);
  std::uniform_int_distribution<Amount> coins(wl.min_coins, wl.max_coins);
  std::uniform_int_distribution<std::uint32_t> acct(0, wl.accounts_per_shard - 1);

  auto other_shard = [&](ShardId not_this) {
    std::uniform_int_distribution<std::uint32_t> pick(1, m - 1);
    auto v = pick(rng);
    if (v >= value(not_this)) ++v;
    return shard_id(v);
  };
  auto pick_contract = [&](ShardId sh) -> std::optional<ContractId> {
    auto list = w.exchanges_on(sh);
    if (list.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, list.size() - 1);
    return list[pick(rng)];
  };
  auto swap = [&](const ContractId& c, ShardId sh) {
    CallPayload p;
    p.kind = CallKind::Swap;
    p.coins = coins(rng);
    return ContractCall{c, sh, p};
  };

  for (auto sh : workload_shards(s)) {
    double t = 0;
    std::uint64_t n = 0;
    while (true) {
      t += gap(rng);
      if (t >= static_cast<double>(s.duration)) break;
      TxSpec tx;
      tx.sender = workload_account(sh, acct(rng));
      tx.sender_shard = sh;
      tx.submit_time = static_cast<Time>(std::floor(t));
      tx.label = "w" + std::to_string(value(sh)) + "-" + std::to_string(n++);
      const bool cross = m > 1 && unit(rng) < wl.cross_shard_ratio;
      const bool call = unit(rng) < wl.contract_ratio;
      const ShardId target = cross ? other_shard(sh) : sh;
      std::optional<ContractId> contract = call ? pick_contract(target) : std::nullopt;
      if (contract) {
        tx.kind = cross ? TxKind::OSC : TxKind::IntraShard;
        tx.entry = swap(*contract, target);
        if (m > 1 && unit(rng) < wl.sub_call_ratio) {
          const ShardId sub = other_shard(target);
          if (auto sc = pick_contract(sub)) tx.sub_calls.push_back(swap(*sc, sub));
        }
      } else {
        tx.kind = cross ? TxKind::CrossShardTransfer : TxKind::IntraShard;
        tx.recipient = workload_account(target, acct(rng));
        tx.recipient_shard = target;
        tx.amount = coins(rng);
      }
      out.push_back(std::move(tx));
    }
  }
  return out;
}

std::vector<TxSpec> client_transactions(const Scenario& s, const World& w) {
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                    std::uint32_t{0x5eed}};
  std::mt19937_64 rng(seq);
  auto all = explicit_transactions(s, w);
  for (auto& v : victim_transactions(s, w)) all.push_back(std::move(v));
  for (auto& g : generate_workload(s, w, rng)) all.push_back(std::move(g));
  std::stable_sort(all.begin(), all.end(),
                   [](const TxSpec& a, const TxSpec& b) { return a.submit_time < b.submit_time; });
  return all;
}

}  // namespace haechi
