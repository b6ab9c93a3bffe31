#pragma once

#include "haechi/core/types.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace haechi {

enum class ContractKind : std::uint8_t { TokenExchange, TokenLedger };

const char* to_string(ContractKind k);
ContractKind contract_kind_from_string(const std::string& s);

struct ContractState {
  ContractId id;
  ContractKind kind = ContractKind::TokenExchange;

  // TokenExchange
  Amount coin_reserve = 0;
  Amount token_reserve = 0;
  std::map<AccountId, Amount> holdings;  // tokens bought, per buyer

  // TokenLedger
  std::map<AccountId, Amount> balances;

  static ContractState exchange(ContractId id, Amount coins, Amount tokens);
  static ContractState ledger(ContractId id, std::map<AccountId, Amount> balances);

  nlohmann::json to_json() const;

  friend bool operator==(const ContractState&, const ContractState&) = default;
};

struct CallRequest {
  AccountId caller;
  CallPayload payload;
  std::vector<ContractCall> sub_calls;
};

struct ExecResult {
  bool success = false;
  Amount return_value = 0;
  std::vector<ContractCall> sub_calls;
  std::string error;
};

/// tokens_out = floor(token_reserve * coins / (coin_reserve + coins)).
Amount swap_output(Amount coin_reserve, Amount token_reserve, Amount coins);

/// Pure: the input state is never modified. On failure the returned state
/// equals the input.
std::pair<ContractState, ExecResult> execute_call(const ContractState& state,
                                                  const CallRequest& request);

class SnapshotError : public std::logic_error {
  using std::logic_error::logic_error;
};

/// Pre-execution copy of one contract, owned by one transaction. Either
/// discarded on commit or rolled back exactly once.
class StateSnapshot {
 public:
  static StateSnapshot take(const ContractState& state, TxId owner);

  const ContractId& contract() const { return saved_.id; }
  TxId owner() const { return owner_; }
  bool consumed() const { return consumed_; }

  ContractState rollback(TxId requester);
  void discard(TxId requester);

 private:
  StateSnapshot(ContractState saved, TxId owner) : saved_(std::move(saved)), owner_(owner) {}
  void consume(TxId requester, const char* what);

  ContractState saved_;
  TxId owner_;
  bool consumed_ = false;
};

}  // namespace haechi
