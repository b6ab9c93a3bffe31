#pragma once

#include "haechi/sim/scenario.hpp"

#include <map>
#include <random>
#include <vector>

namespace haechi {

/// Every account and contract a run starts with: the explicit ones plus
/// those implied by the workload, victim and adversary settings.
struct World {
  std::map<AccountId, AccountSpec> accounts;
  std::map<ContractId, ContractSpec> contracts;

  ShardId account_shard(const AccountId& a) const;
  ShardId contract_shard(const ContractId& c) const;
  /// Exchange contracts hosted on `s`, in id order.
  std::vector<ContractId> exchanges_on(ShardId s) const;
};

World build_world(const Scenario& s);

std::string workload_account(ShardId s, std::uint32_t k);
std::string victim_account(ShardId s);
std::string attacker_account(ShardId s);
std::string auto_contract(ShardId s);

/// Client transactions from the [[transactions]] table.
std::vector<TxSpec> explicit_transactions(const Scenario& s, const World& w);
/// Victim swap trains.
std::vector<TxSpec> victim_transactions(const Scenario& s, const World& w);
/// Poisson arrivals per workload shard over [0, duration).
std::vector<TxSpec> generate_workload(const Scenario& s, const World& w, std::mt19937_64& rng);

/// All of the above, stably sorted by submit time.
std::vector<TxSpec> client_transactions(const Scenario& s, const World& w);

}  // namespace haechi
