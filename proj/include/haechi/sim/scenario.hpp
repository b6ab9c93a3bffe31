#pragma once

#include "haechi/core/types.hpp"
#include "haechi/protocols/protocol.hpp"
#include "haechi/vm/contract.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace haechi {

struct ShardSpec {
  ShardId id{};
  Time block_interval = 1;
  std::optional<std::size_t> capacity;  // falls back to Scenario::block_capacity
  std::optional<Time> start;            // first proposal; defaults to block_interval
  std::optional<Time> halt_at;          // no proposals at or after this time
};

struct ContractSpec {
  ContractId id;
  ContractKind kind = ContractKind::TokenExchange;
  ShardId shard{};
  Amount coin_reserve = 0;
  Amount token_reserve = 0;
  std::map<AccountId, Amount> balances;
};

struct AccountSpec {
  AccountId id;
  ShardId shard{};
  Amount coins = 0;
};

struct DelayOverride {
  ShardId from{};
  ShardId to{};
  Time delay = 1;
};

struct NetworkSpec {
  Time default_delay = 2;
  Time intra_delay = 1;
  Time beacon_delay = 2;
  std::vector<DelayOverride> delays;
  /// Extra delay on the messages carrying a labelled transaction.
  std::map<std::string, Time> jitter;
};

struct WorkloadSpec {
  double rate = 0;  // client transactions per time unit, per shard
  double cross_shard_ratio = 0.5;
  double contract_ratio = 0.5;  // share of transactions calling a contract
  double sub_call_ratio = 0;    // share of contract calls with a sub-call elsewhere
  Amount min_coins = 1;
  Amount max_coins = 10;
  std::uint32_t accounts_per_shard = 8;
  Amount account_coins = 1'000'000;
  std::vector<ShardId> shards;  // empty: every shard
  bool auto_contracts = true;   // one "dex-<s>" exchange per shard
  Amount dex_reserve = 1'000'000;
};

struct CallSpec {
  ContractId contract;
  CallPayload payload;
};

struct ExplicitTx {
  std::string label;
  Time time = 0;
  std::optional<TxKind> kind;  // inferred from account/contract placement when absent
  AccountId sender;
  std::optional<CallSpec> call;
  std::vector<CallSpec> sub_calls;
  AccountId recipient;  // plain transfers
  Amount amount = 0;
};

/// A train of identical cross-shard swaps used as attack targets.
struct VictimStream {
  std::size_t count = 0;
  ShardId sender_shard{};
  ContractId contract;
  Time start = 1;
  Time spacing = 10;
  Amount coins = 10;
};

enum class AdversaryModel : std::uint8_t { None, IntraShardAttack, CrossShardAttack };

const char* to_string(AdversaryModel m);
std::optional<AdversaryModel> adversary_from_string(const std::string& s);

struct AdversarySpec {
  AdversaryModel model = AdversaryModel::None;
  std::vector<ShardId> observers;  // empty: every shard
  ShardId attacker_shard{};        // CrossShardAttack only
  Time reaction_delay = 1;
  Time reaction_jitter = 0;
  std::uint32_t byzantine_observers = 1;
  double observe_prob = 1.0;
  std::optional<Time> observation_lead;  // default: the shard's intra-shard delay
  Amount attacker_coins = 1'000'000'000'000;
};

struct Scenario {
  std::string name = "scenario";
  ProtocolKind protocol = ProtocolKind::Haechi;
  Time duration = 100;
  Time drain = 10'000;  // extra time allowed for in-flight transactions
  std::uint64_t seed = 1;
  std::size_t block_capacity = 64;
  Time beacon_interval = 1;

  std::vector<ShardSpec> shards;
  std::vector<ContractSpec> contracts;
  std::vector<AccountSpec> accounts;
  NetworkSpec network;
  WorkloadSpec workload;
  std::vector<ExplicitTx> transactions;
  std::vector<VictimStream> victims;
  AdversarySpec adversary;

  std::uint32_t shard_count() const { return static_cast<std::uint32_t>(shards.size()); }
  const ShardSpec& shard(ShardId s) const;
  Time delay(ShardId from, ShardId to) const;
  Time observation_lead(ShardId s) const;
  std::size_t capacity(ShardId s) const;
  Time start(ShardId s) const;
};

/// Every problem found, each prefixed with its path ("shards[2].block_interval: ...").
std::vector<std::string> validation_errors(const Scenario& s);
/// Throws ConfigError joining validation_errors when any exist.
void validate(const Scenario& s);

struct Overrides {
  std::optional<ProtocolKind> protocol;
  std::optional<std::uint64_t> seed;
  std::optional<Time> duration;
  std::optional<std::uint32_t> shards;
  std::optional<double> workload;
  std::optional<double> cross_shard_ratio;
  std::optional<AdversaryModel> adversary;
  std::optional<std::uint32_t> byzantine_observers;
};

/// `shards = N` rebuilds shards 1..N, reusing the existing intervals in
/// order; anything placed on a dropped shard is left for validate() to flag.
void apply_overrides(Scenario& s, const Overrides& o);

}  // namespace haechi
