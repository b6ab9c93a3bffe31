#include "haechi/shard/ledger.hpp"

namespace haechi {

void Ledger::open(const AccountId& account, Amount coins) {
  if (coins < 0) throw ConfigError("account '" + account + "' opened with negative balance");
  if (!total_.emplace(account, coins).second) {
    throw ConfigError("account '" + account + "' opened twice");
  }
}

Amount Ledger::total(const AccountId& account) const {
  auto it = total_.find(account);
  return it == total_.end() ? 0 : it->second;
}

Amount Ledger::locked(const AccountId& account) const {
  auto it = locked_.find(account);
  return it == locked_.end() ? 0 : it->second;
}

bool Ledger::lock(TxId tx, const AccountId& account, Amount amount) {
  if (amount < 0 || !has(account) || holds_lock(tx)) return false;
  if (available(account) < amount) return false;
  locks_.emplace(value(tx), Lock{account, amount});
  locked_[account] += amount;
  return true;
}

void Ledger::consume(TxId tx) {
  auto it = locks_.find(value(tx));
  if (it == locks_.end()) {
    throw ProtocolViolation("commit of tx " + std::to_string(value(tx)) + " without a coin lock");
  }
  const auto& [account, amount] = it->second;
  locked_[account] -= amount;
  total_[account] -= amount;
  locks_.erase(it);
}

void Ledger::release(TxId tx) {
  auto it = locks_.find(value(tx));
  if (it == locks_.end()) {
    throw ProtocolViolation("abort of tx " + std::to_string(value(tx)) + " without a coin lock");
  }
  locked_[it->second.account] -= it->second.amount;
  locks_.erase(it);
}

void Ledger::credit(const AccountId& account, Amount amount) { total_[account] += amount; }

bool Ledger::debit(const AccountId& account, Amount amount) {
  if (!has(account) || available(account) < amount) return false;
  total_[account] -= amount;
  return true;
}

Amount Ledger::sum_total() const {
  Amount s = 0;
  for (const auto& [a, v] : total_) s += v;
  return s;
}

Amount Ledger::sum_locked() const {
  Amount s = 0;
  for (const auto& [a, v] : locked_) s += v;
  return s;
}

nlohmann::json Ledger::to_json() const {
  nlohmann::json accounts = nlohmann::json::object();
  for (const auto& [a, v] : total_) {
    accounts[a] = {{"total", v}, {"locked", locked(a)}};
  }
  return {{"accounts", accounts}, {"open_locks", locks_.size()}};
}

}  // namespace haechi
