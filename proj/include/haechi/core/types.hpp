#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace haechi {

/// Simulated time units. Never wall clock.
using Time = std::int64_t;
using Amount = std::int64_t;
using Height = std::uint64_t;

using AccountId = std::string;
using ContractId = std::string;

/// Shard 0 is the beacon shard; it never hosts accounts or contracts.
enum class ShardId : std::uint32_t {};
inline constexpr ShardId kBeaconShard{0};

constexpr ShardId shard_id(std::uint32_t v) { return ShardId{v}; }
constexpr std::uint32_t value(ShardId s) { return static_cast<std::uint32_t>(s); }

enum class TxId : std::uint64_t {};
constexpr TxId tx_id(std::uint64_t v) { return TxId{v}; }
constexpr std::uint64_t value(TxId t) { return static_cast<std::uint64_t>(t); }

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ProtocolViolation : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CallKind : std::uint8_t { Swap, Transfer };

struct CallPayload {
  CallKind kind = CallKind::Swap;
  Amount coins = 0;   // swap: coins paid in, withheld from the sender account
  AccountId to;       // transfer: token recipient inside the contract ledger
  Amount amount = 0;  // transfer: token amount

  friend bool operator==(const CallPayload&, const CallPayload&) = default;
};

struct ContractCall {
  ContractId contract;
  ShardId shard{};
  CallPayload payload;

  friend bool operator==(const ContractCall&, const ContractCall&) = default;
};

enum class TxKind : std::uint8_t { IntraShard, CrossShardTransfer, OSC };

const char* to_string(TxKind k);
TxKind tx_kind_from_string(const std::string& s);

struct Transaction {
  TxId id{};
  TxKind kind = TxKind::IntraShard;
  AccountId sender;
  ShardId sender_shard{};

  // Contract call (OTX) or plain coin transfer; exactly one is used.
  std::optional<ContractCall> entry;
  std::vector<ContractCall> sub_calls;
  AccountId recipient;
  ShardId recipient_shard{};
  Amount amount = 0;

  Time submit_time = 0;
  std::string label;
  std::optional<TxId> victim;  // set on adversary-injected transactions

  bool is_otx() const { return entry.has_value(); }
  bool multi_contract() const { return !sub_calls.empty(); }
  bool cross_shard() const;
  /// Coins withheld from the sender while the transaction is in flight.
  Amount coin_cost() const;
  /// Shards hosting the entry contract and every sub-call, ascending.
  std::set<ShardId> contract_shards() const;
  /// All calls (entry first) that run on `shard`.
  std::vector<ContractCall> calls_on(ShardId shard) const;
};

using TxRef = std::shared_ptr<const Transaction>;

struct TxSpec {
  TxKind kind = TxKind::IntraShard;
  AccountId sender;
  ShardId sender_shard{};
  std::optional<ContractCall> entry;
  std::vector<ContractCall> sub_calls;
  AccountId recipient;
  ShardId recipient_shard{};
  Amount amount = 0;
  Time submit_time = 0;
  std::string label;
  std::optional<TxId> victim;
};

/// Hands out transactions with monotonically assigned ids and rejects
/// references to shards outside 1..shard_count.
class TxFactory {
 public:
  explicit TxFactory(std::uint32_t shard_count) : shard_count_(shard_count) {}

  TxRef make(TxSpec spec);
  TxRef make_with_id(TxId id, TxSpec spec);

  std::uint32_t shard_count() const { return shard_count_; }

 private:
  void validate(const TxSpec& spec) const;
  void check_shard(ShardId s, const char* what) const;

  std::uint32_t shard_count_;
  std::uint64_t next_id_ = 1;
  std::unordered_set<std::uint64_t> used_;
};

}  // namespace haechi
