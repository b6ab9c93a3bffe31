#include "haechi/vm/contract.hpp"

namespace haechi {

const char* to_string(ContractKind k) {
  return k == ContractKind::TokenExchange ? "token_exchange" : "token_ledger";
}

ContractKind contract_kind_from_string(const std::string& s) {
  if (s == "token_exchange" || s == "exchange" || s == "amm") return ContractKind::TokenExchange;
  if (s == "token_ledger" || s == "ledger") return ContractKind::TokenLedger;
  throw ConfigError("unknown contract kind '" + s + "'");
}

ContractState ContractState::exchange(ContractId id, Amount coins, Amount tokens) {
  ContractState s;
  s.id = std::move(id);
  s.kind = ContractKind::TokenExchange;
  s.coin_reserve = coins;
  s.token_reserve = tokens;
  return s;
}

ContractState ContractState::ledger(ContractId id, std::map<AccountId, Amount> balances) {
  ContractState s;
  s.id = std::move(id);
  s.kind = ContractKind::TokenLedger;
  s.balances = std::move(balances);
  return s;
}

nlohmann::json ContractState::to_json() const {
  nlohmann::json j{{"id", id}, {"kind", to_string(kind)}};
  if (kind == ContractKind::TokenExchange) {
    j["coin_reserve"] = coin_reserve;
    j["token_reserve"] = token_reserve;
    j["holdings"] = holdings;
  } else {
    j["balances"] = balances;
  }
  return j;
}

Amount swap_output(Amount coin_reserve, Amount token_reserve, Amount coins) {
  if (coins <= 0 || coin_reserve < 0 || token_reserve <= 0) return 0;
  // 128-bit intermediate: reserves in scenarios can reach 1e12.
  __extension__ using Wide = __int128;
  const auto num = static_cast<Wide>(token_reserve) * coins;
  const auto den = static_cast<Wide>(coin_reserve) + coins;
  return static_cast<Amount>(num / den);
}

namespace {

std::pair<ContractState, ExecResult> fail(const ContractState& state, std::string why) {
  ExecResult r;
  r.success = false;
  r.error = std::move(why);
  return {state, std::move(r)};
}

}  // namespace

std::pair<ContractState, ExecResult> execute_call(const ContractState& state,
                                                  const CallRequest& request) {
  const auto& p = request.payload;
  if (state.kind == ContractKind::TokenExchange) {
    if (p.kind != CallKind::Swap) return fail(state, "payload does not match contract kind");
    if (p.coins <= 0) return fail(state, "non-positive swap amount");
    const Amount out = swap_output(state.coin_reserve, state.token_reserve, p.coins);
    if (out <= 0) return fail(state, "zero swap output");
    ContractState next = state;
    next.coin_reserve += p.coins;
    next.token_reserve -= out;
    next.holdings[request.caller] += out;
    ExecResult r;
    r.success = true;
    r.return_value = out;
    r.sub_calls = request.sub_calls;
    return {std::move(next), std::move(r)};
  }

  if (p.kind != CallKind::Transfer) return fail(state, "payload does not match contract kind");
  if (p.amount <= 0) return fail(state, "non-positive transfer amount");
  auto it = state.balances.find(request.caller);
  const Amount have = it == state.balances.end() ? 0 : it->second;
  if (have < p.amount) return fail(state, "insufficient token balance");
  ContractState next = state;
  next.balances[request.caller] -= p.amount;
  next.balances[p.to] += p.amount;
  ExecResult r;
  r.success = true;
  r.return_value = p.amount;
  r.sub_calls = request.sub_calls;
  return {std::move(next), std::move(r)};
}

StateSnapshot StateSnapshot::take(const ContractState& state, TxId owner) {
  return StateSnapshot(state, owner);
}

void StateSnapshot::consume(TxId requester, const char* what) {
  if (requester != owner_) {
    throw SnapshotError(std::string(what) + " of snapshot of '" + saved_.id + "' by tx " +
                        std::to_string(value(requester)) + ", owned by tx " +
                        std::to_string(value(owner_)));
  }
  if (consumed_) {
    throw SnapshotError(std::string(what) + " of already consumed snapshot of '" + saved_.id +
                        "'");
  }
  consumed_ = true;
}

ContractState StateSnapshot::rollback(TxId requester) {
  consume(requester, "rollback");
  return saved_;
}

void StateSnapshot::discard(TxId requester) { consume(requester, "discard"); }

}  // namespace haechi
