#include "relay_driver.hpp"

#include <algorithm>

namespace haechi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

nlohmann::json shard_list(const std::set<ShardId>& shards) {
  auto out = nlohmann::json::array();
  for (auto s : shards) out.push_back(value(s));
  return out;
}

}  // namespace

RelayDriver::RelayDriver(SimContext& ctx, Mode mode) : ctx_(ctx), mode_(mode) {}

void RelayDriver::on_block(ShardEngine& sh, std::vector<Message>& inbox,
                           const std::vector<TxRef>& txs) {
  for (auto& msg : inbox) {
    std::visit(overloaded{
                   [&](RelayMsg& m) { on_relay(sh, m.tx, m.coordinator); },
                   [&](PrepareMsg& m) {
                     for (auto s : m.tx->contract_shards()) {
                       ctx_.send(sh.id(), s, RelayMsg{m.tx, sh.id()});
                     }
                   },
                   [&](ExecMsg& m) { on_vote(sh, m); },
                   [&](DecisionMsg& m) { settle(sh, m.tx, m.outcome); },
                   [&](CreditMsg& m) { sh.apply_credit(m.tx); },
                   [&](auto&) { throw std::logic_error("unexpected message in a relay-protocol block"); },
               },
               msg);
  }
  for (const auto& tx : txs) {
    if (sh.admit(tx) && tx->is_otx()) start(sh, tx);
  }
}

void RelayDriver::start(ShardEngine& sh, const TxRef& tx) {
  const auto shards = tx->contract_shards();
  if (shards.size() == 1 && *shards.begin() == sh.id()) {
    on_local(sh, tx);
    return;
  }
  const Time extra = ctx_.jitter(*tx);
  if (mode_ == Mode::TwoPhaseReference) {
    ctx_.send(sh.id(), kBeaconShard, PrepareMsg{tx}, extra);
    return;
  }
  for (auto s : shards) ctx_.send(sh.id(), s, RelayMsg{tx, sh.id()}, extra);
}

bool RelayDriver::busy(ShardEngine& sh, const TxRef& tx) {
  const auto& locks = local(sh.id()).locks;
  for (const auto& c : tx->calls_on(sh.id())) {
    auto it = locks.find(c.contract);
    if (it != locks.end() && it->second != tx->id) return true;
  }
  return false;
}

RelayDriver::Run RelayDriver::run_calls(ShardEngine& sh, const TxRef& tx) {
  Run run;
  run.ok = true;
  auto& contracts = sh.contracts();
  for (const auto& call : tx->calls_on(sh.id())) {
    nlohmann::json detail{{"height", sh.building_height()},
                          {"block_ts", sh.building_ts()},
                          {"contract", call.contract}};
    auto it = contracts.find(call.contract);
    if (it == contracts.end()) {
      detail["success"] = false;
      detail["note"] = "unknown contract";
      ctx_.sink().record(EventKind::Executed, Subject::tx(tx->id), sh.id(), std::move(detail));
      run.ok = false;
      break;
    }
    if (!run.snaps.count(call.contract)) {
      run.snaps.emplace(call.contract, StateSnapshot::take(it->second, tx->id));
    }
    CallRequest req{tx->sender, call.payload, {}};
    if (tx->entry && call == *tx->entry) req.sub_calls = tx->sub_calls;
    auto [next, res] = execute_call(it->second, req);
    detail["success"] = res.success;
    detail["return_value"] = res.return_value;
    if (!res.success) detail["note"] = res.error;
    ctx_.sink().record(EventKind::Executed, Subject::tx(tx->id), sh.id(), std::move(detail));
    if (!res.success) {
      run.ok = false;
      break;
    }
    it->second = std::move(next);
    run.ret += res.return_value;
  }
  if (!run.ok) {
    for (auto& [c, s] : run.snaps) contracts.at(c) = s.rollback(tx->id);
    run.snaps.clear();
  }
  return run;
}

void RelayDriver::hold(ShardEngine& sh, const TxRef& tx, Run& run) {
  auto& loc = local(sh.id());
  auto& held = loc.held[value(tx->id)];
  for (auto& [c, s] : run.snaps) {
    loc.locks[c] = tx->id;
    held.push_back(std::move(s));
  }
  run.snaps.clear();
}

void RelayDriver::vote(ShardEngine& sh, const TxRef& tx, ShardId coordinator, bool ok, Amount ret,
                       const char* note) {
  ExecutionMessage m;
  m.txid = tx->id;
  m.from = sh.id();
  m.return_value = ret;
  if (tx->multi_contract()) {
    m.tag = ok ? ExecTag::ProgressAndCommit : ExecTag::ProgressButAbort;
    m.contract_dependency = tx->contract_shards();
  } else {
    m.tag = ok ? ExecTag::FinalAndCommit : ExecTag::FinalButAbort;
    m.contract_dependency = {sh.id()};
  }
  m.attestation = "qc:" + std::to_string(value(sh.id())) + "/" + std::to_string(sh.building_height());
  nlohmann::json detail{{"height", sh.building_height()},
                        {"block_ts", sh.building_ts()},
                        {"tag", to_string(m.tag)},
                        {"dependency", shard_list(m.contract_dependency)},
                        {"to", value(coordinator)}};
  if (note) detail["note"] = note;
  ctx_.sink().record(EventKind::Voted, Subject::tx(tx->id), sh.id(), std::move(detail));
  ctx_.send(sh.id(), coordinator, ExecMsg{tx, std::move(m)});
}

// An abort can be decided on another shard's vote before this shard's relay
// arrives. The late relay must not execute or take locks.
bool RelayDriver::settled_before_arrival(ShardEngine& sh, const TxRef& tx) {
  auto& early = local(sh.id()).decided_before_arrival;
  auto it = early.find(value(tx->id));
  if (it == early.end()) return false;
  if (!it->second) sh.record_outcome(tx, CommitOutcome::Abort, {{"side", "contract"}, {"reason", "decided before arrival"}});
  early.erase(it);
  return true;
}

void RelayDriver::on_relay(ShardEngine& sh, const TxRef& tx, ShardId coordinator) {
  if (settled_before_arrival(sh, tx)) return;
  if (mode_ == Mode::Optimistic) {
    optimistic_relay(sh, tx, coordinator);
    return;
  }
  auto& loc = local(sh.id());
  if (busy(sh, tx)) {
    if (!tx->multi_contract()) {
      loc.waiters.push_back({tx, coordinator, false});
      return;
    }
    // No-wait for multi-contract transactions: waiting while holding locks
    // elsewhere could deadlock.
    loc.participated.insert(value(tx->id));
    vote(sh, tx, coordinator, false, 0, "contract locked");
    return;
  }
  auto run = run_calls(sh, tx);
  loc.participated.insert(value(tx->id));
  if (run.ok) hold(sh, tx, run);
  vote(sh, tx, coordinator, run.ok, run.ret);
}

void RelayDriver::on_local(ShardEngine& sh, const TxRef& tx) {
  if (mode_ == Mode::Optimistic) {
    optimistic_local(sh, tx);
    return;
  }
  if (busy(sh, tx)) {
    if (!tx->multi_contract()) {
      local(sh.id()).waiters.push_back({tx, sh.id(), true});
    } else {
      sh.commit_sender_side(tx, CommitOutcome::Abort);
    }
    return;
  }
  auto run = run_calls(sh, tx);
  for (auto& [c, s] : run.snaps) s.discard(tx->id);
  sh.commit_sender_side(tx, run.ok ? CommitOutcome::Commit : CommitOutcome::Abort,
                        "sender+contract");
}

void RelayDriver::on_vote(ShardEngine& sh, const ExecMsg& m) {
  auto d = sh.on_execution_message(m.msg);
  if (!d) return;
  const auto& tx = m.tx;
  // Optimistic single-contract calls are already settled at the contract.
  const bool notify = !(mode_ == Mode::Optimistic && !tx->multi_contract());
  if (mode_ == Mode::TwoPhaseReference) {
    for (auto s : d->notified_shards) ctx_.send(sh.id(), s, DecisionMsg{tx, d->decision});
    if (!d->notified_shards.count(tx->sender_shard)) {
      ctx_.send(sh.id(), tx->sender_shard, DecisionMsg{tx, d->decision});
    }
    return;
  }
  bool here = false;
  for (auto s : d->notified_shards) {
    if (s == sh.id()) {
      here = true;
    } else if (notify) {
      ctx_.send(sh.id(), s, DecisionMsg{tx, d->decision});
    }
  }
  if (here && notify) {
    settle(sh, tx, d->decision);
  } else {
    sh.commit_sender_side(tx, d->decision);
  }
}

void RelayDriver::settle(ShardEngine& sh, const TxRef& tx, CommitOutcome outcome) {
  auto& loc = local(sh.id());
  const bool part = loc.participated.erase(value(tx->id)) != 0;
  if (auto it = loc.held.find(value(tx->id)); it != loc.held.end()) {
    for (auto& snap : it->second) {
      if (outcome == CommitOutcome::Commit) {
        snap.discard(tx->id);
      } else {
        sh.contracts().at(snap.contract()) = snap.rollback(tx->id);
      }
      loc.locks.erase(snap.contract());
    }
    loc.held.erase(it);
  }
  if (tx->sender_shard == sh.id()) {
    sh.commit_sender_side(tx, outcome, part ? "sender+contract" : "sender");
  } else if (part) {
    sh.record_outcome(tx, outcome, {{"side", "contract"}});
  }
  if (!part && !tx->calls_on(sh.id()).empty()) {
    loc.decided_before_arrival[value(tx->id)] = tx->sender_shard == sh.id();
  }
  retry_waiters(sh);
}

void RelayDriver::retry_waiters(ShardEngine& sh) {
  auto& loc = local(sh.id());
  std::deque<Waiter> still;
  while (!loc.waiters.empty()) {
    Waiter w = std::move(loc.waiters.front());
    loc.waiters.pop_front();
    if (busy(sh, w.tx)) {
      still.push_back(std::move(w));
      continue;
    }
    if (w.local) {
      on_local(sh, w.tx);
    } else {
      on_relay(sh, w.tx, w.coordinator);
    }
  }
  loc.waiters = std::move(still);
}

std::unique_ptr<ProtocolDriver> make_two_phase_driver(SimContext& ctx, bool reference_shard) {
  return std::make_unique<RelayDriver>(
      ctx, reference_shard ? RelayDriver::Mode::TwoPhaseReference : RelayDriver::Mode::TwoPhaseSender);
}

}  // namespace haechi
