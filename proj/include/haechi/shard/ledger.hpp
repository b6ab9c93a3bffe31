#pragma once

#include "haechi/core/types.hpp"

#include <nlohmann/json.hpp>

#include <map>

namespace haechi {

/// Coin balances of the accounts homed on one shard, with per-transaction
/// withholdings. total = available + locked for every account.
class Ledger {
 public:
  struct Lock {
    AccountId account;
    Amount amount = 0;
  };

  void open(const AccountId& account, Amount coins);
  bool has(const AccountId& account) const { return total_.count(account) != 0; }

  Amount total(const AccountId& account) const;
  Amount locked(const AccountId& account) const;
  Amount available(const AccountId& account) const { return total(account) - locked(account); }

  /// Withholds `amount` from `account` for `tx`. False if the account is
  /// unknown or short on available coins; nothing changes in that case.
  bool lock(TxId tx, const AccountId& account, Amount amount);
  bool holds_lock(TxId tx) const { return locks_.count(value(tx)) != 0; }
  /// Commit: the withheld coins leave the account.
  void consume(TxId tx);
  /// Abort: the withheld coins become available again.
  void release(TxId tx);

  void credit(const AccountId& account, Amount amount);
  /// Immediate debit without a lock; false if short.
  bool debit(const AccountId& account, Amount amount);

  const std::map<AccountId, Amount>& balances() const { return total_; }
  std::size_t lock_count() const { return locks_.size(); }
  Amount sum_total() const;
  Amount sum_locked() const;

  nlohmann::json to_json() const;

 private:
  std::map<AccountId, Amount> total_;
  std::map<AccountId, Amount> locked_;
  std::map<std::uint64_t, Lock> locks_;
};

}  // namespace haechi
