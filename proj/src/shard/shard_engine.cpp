#include "haechi/shard/shard_engine.hpp"

#include <algorithm>

namespace haechi {

namespace {

nlohmann::json shard_list(const std::set<ShardId>& shards) {
  auto out = nlohmann::json::array();
  for (auto s : shards) out.push_back(value(s));
  return out;
}

std::string txs(TxId id) { return std::to_string(value(id)); }

}  // namespace

const char* to_string(ExecTag t) {
  switch (t) {
    case ExecTag::FinalAndCommit: return "FinalAndCommit";
    case ExecTag::FinalButAbort: return "FinalButAbort";
    case ExecTag::ProgressAndCommit: return "ProgressAndCommit";
    case ExecTag::ProgressButAbort: return "ProgressButAbort";
  }
  return "?";
}

nlohmann::json ExecutionMessage::to_json() const {
  return {{"tx", value(txid)},
          {"from", value(from)},
          {"tag", to_string(tag)},
          {"return_value", return_value},
          {"dependency", shard_list(contract_dependency)}};
}

std::optional<CommitmentDecision> decide_commit(std::span<const ExecutionMessage> messages) {
  if (messages.empty()) return std::nullopt;
  const TxId id = messages.front().txid;
  const bool final_kind = is_final(messages.front().tag);
  std::map<ShardId, ExecTag> by_shard;
  std::set<ShardId> deps;
  bool abort = false;

  for (const auto& m : messages) {
    if (m.txid != id) {
      throw ProtocolViolation("execution messages for tx " + txs(m.txid) + " mixed into tx " +
                              txs(id));
    }
    if (is_final(m.tag) != final_kind) {
      throw ProtocolViolation("tx " + txs(id) + " received both Final and Progress tags");
    }
    auto [it, fresh] = by_shard.emplace(m.from, m.tag);
    if (!fresh && it->second != m.tag) {
      throw ProtocolViolation("shard " + std::to_string(value(m.from)) + " sent " +
                              to_string(it->second) + " and " + to_string(m.tag) + " for tx " +
                              txs(id));
    }
    if (!final_kind && (m.contract_dependency.empty() || !m.contract_dependency.count(m.from))) {
      throw ProtocolViolation("Progress message for tx " + txs(id) +
                              " without a dependency set naming its sender");
    }
    deps.insert(m.contract_dependency.begin(), m.contract_dependency.end());
    deps.insert(m.from);
    abort = abort || !is_commit_vote(m.tag);
  }

  if (final_kind && by_shard.size() > 1) {
    throw ProtocolViolation("tx " + txs(id) + " received Final tags from several shards");
  }

  CommitmentDecision d;
  d.txid = id;
  d.notified_shards = deps;
  if (abort) {
    d.decision = CommitOutcome::Abort;
    return d;
  }
  if (!final_kind) {
    for (auto s : deps) {
      if (!by_shard.count(s)) return std::nullopt;
    }
  }
  d.decision = CommitOutcome::Commit;
  return d;
}

std::optional<CommitmentDecision> Coordinator::on_execution_message(const ExecutionMessage& m) {
  auto& box = inbox_[value(m.txid)];
  box.push_back(m);
  if (decided_.count(value(m.txid))) {
    // Late votes after an early abort: still checked for contradictions.
    (void)decide_commit(box);
    return std::nullopt;
  }
  auto d = decide_commit(box);
  if (d) decided_.emplace(value(m.txid), *d);
  return d;
}

ShardEngine::ShardEngine(ShardConfig config, EventSink& sink)
    : config_(config), sink_(sink), chain_(config.shard) {
  if (config_.block_interval < 1) throw ConfigError("block_interval must be >= 1");
}

void ShardEngine::add_contract(ContractState state) {
  if (config_.is_beacon) throw ConfigError("the beacon shard cannot host contracts");
  auto id = state.id;
  if (!contracts_.emplace(id, std::move(state)).second) {
    throw ConfigError("contract '" + id + "' defined twice");
  }
}

void ShardEngine::require_open(const char* what) const {
  if (!open_) {
    throw std::logic_error(std::string(what) + " outside an open block on shard " +
                           std::to_string(value(id())));
  }
}

nlohmann::json ShardEngine::where() const {
  return {{"height", building_.height}, {"block_ts", building_.block_ts}};
}

void ShardEngine::begin_block(Time ts) {
  if (open_) throw std::logic_error("begin_block while a block is open");
  if (auto last = chain_.last_ts(); last && ts < *last + config_.block_interval) {
    throw ProtocolViolation("block at " + std::to_string(ts) + " on shard " +
                            std::to_string(value(id())) + " comes less than one interval after " +
                            std::to_string(*last));
  }
  building_ = Block{};
  building_.shard = id();
  building_.height = chain_.height() + 1;
  building_.block_ts = ts;
  credits_.clear();
  open_ = true;
}

bool ShardEngine::admit(const TxRef& tx) {
  require_open("admit");
  if (tx->sender_shard != id()) {
    throw std::logic_error("tx " + txs(tx->id) + " admitted on a shard other than its sender's");
  }
  const Amount need = tx->coin_cost();
  if (!ledger_.lock(tx->id, tx->sender, need)) {
    auto detail = where();
    detail["reason"] = ledger_.has(tx->sender) ? "insufficient balance" : "unknown sender account";
    detail["side"] = "sender";
    sink_.record(EventKind::Aborted, Subject::tx(tx->id), id(), std::move(detail));
    return false;
  }

  const auto index = building_.pending_list.size();
  building_.pending_list.push_back(tx);
  auto detail = where();
  detail["index"] = index;
  detail["otx"] = tx->is_otx();
  sink_.record(EventKind::Processed, Subject::tx(tx->id), id(), std::move(detail));

  if (!tx->is_otx()) {
    ledger_.consume(tx->id);
    if (tx->kind == TxKind::CrossShardTransfer) {
      credits_.push_back(tx);
    } else {
      ledger_.credit(tx->recipient, tx->amount);
    }
    record_outcome(tx, CommitOutcome::Commit, {{"side", "sender"}});
  }
  return true;
}

void ShardEngine::commit_sender_side(const TxRef& tx, CommitOutcome outcome, const char* side) {
  require_open("commit_sender_side");
  if (outcome == CommitOutcome::Commit) {
    ledger_.consume(tx->id);
  } else {
    ledger_.release(tx->id);
  }
  record_outcome(tx, outcome, {{"side", side}});
}

void ShardEngine::record_outcome(const TxRef& tx, CommitOutcome outcome, nlohmann::json detail) {
  require_open("record_outcome");
  building_.committing_list.emplace_back(tx->id, outcome);
  auto d = where();
  for (auto& [k, v] : detail.items()) d[k] = v;
  sink_.record(outcome == CommitOutcome::Commit ? EventKind::Committed : EventKind::Aborted,
               Subject::tx(tx->id), id(), std::move(d));
}

void ShardEngine::apply_credit(const TxRef& tx) {
  require_open("apply_credit");
  ledger_.credit(tx->recipient, tx->amount);
  record_outcome(tx, CommitOutcome::Commit, {{"side", "recipient"}});
}

BlockResult ShardEngine::seal_block() {
  require_open("seal_block");
  BlockResult r;
  r.crosslink = crosslink_of(building_);
  r.outgoing_credits = std::move(credits_);
  credits_.clear();
  r.block = building_;
  chain_.append(std::move(building_));
  building_ = Block{};
  open_ = false;
  return r;
}

BlockResult ShardEngine::process_block(const BlockInput& input, Time now) {
  begin_block(now);
  for (const auto& rc : input.ready) commit_sender_side(rc.tx, rc.outcome);
  for (const auto& tx : input.txs) admit(tx);
  return seal_block();
}

void ShardEngine::enqueue_ccl(const std::vector<CclEntry>& slice) {
  for (const auto& e : slice) exec_queue_.push_back(e);
}

std::vector<OutgoingExec> ShardEngine::execute_ccl(const std::vector<CclEntry>& slice) {
  enqueue_ccl(slice);
  return run_exec_queue();
}

std::vector<OutgoingExec> ShardEngine::run_exec_queue() {
  require_open("run_exec_queue");
  std::vector<OutgoingExec> out;
  while (!exec_queue_.empty()) {
    const TxRef tx = exec_queue_.front().tx;
    const auto calls = tx->calls_on(id());
    const bool blocked = std::any_of(calls.begin(), calls.end(), [&](const ContractCall& c) {
      auto it = held_.find(c.contract);
      return it != held_.end() && it->second != tx->id;
    });
    if (blocked) break;
    exec_queue_.pop_front();

    std::map<ContractId, StateSnapshot> snaps;
    bool ok = true;
    Amount ret = 0;
    for (const auto& call : calls) {
      auto detail = where();
      detail["contract"] = call.contract;
      auto it = contracts_.find(call.contract);
      if (it == contracts_.end()) {
        detail["success"] = false;
        detail["note"] = "unknown contract";
        sink_.record(EventKind::Executed, Subject::tx(tx->id), id(), std::move(detail));
        ok = false;
        break;
      }
      if (!snaps.count(call.contract)) {
        snaps.emplace(call.contract, StateSnapshot::take(it->second, tx->id));
      }
      CallRequest req{tx->sender, call.payload, {}};
      if (tx->entry && call == *tx->entry) req.sub_calls = tx->sub_calls;
      auto [next, res] = execute_call(it->second, req);
      detail["success"] = res.success;
      detail["return_value"] = res.return_value;
      if (!res.success) detail["note"] = res.error;
      sink_.record(EventKind::Executed, Subject::tx(tx->id), id(), std::move(detail));
      if (!res.success) {
        ok = false;
        break;
      }
      it->second = std::move(next);
      ret += res.return_value;
    }

    const bool progress = tx->multi_contract();
    Executed rec;
    rec.tx = tx;
    rec.success = ok;
    if (!ok) {
      for (auto& [c, s] : snaps) contracts_.at(c) = s.rollback(tx->id);
    } else if (progress) {
      for (auto& [c, s] : snaps) {
        held_[c] = tx->id;
        rec.held.push_back(std::move(s));
      }
    } else {
      for (auto& [c, s] : snaps) s.discard(tx->id);
    }

    ExecutionMessage m;
    m.txid = tx->id;
    m.from = id();
    m.return_value = ret;
    if (progress) {
      m.tag = ok ? ExecTag::ProgressAndCommit : ExecTag::ProgressButAbort;
      m.contract_dependency = tx->contract_shards();
    } else {
      m.tag = ok ? ExecTag::FinalAndCommit : ExecTag::FinalButAbort;
      m.contract_dependency = {id()};
    }
    m.attestation = "qc:" + std::to_string(value(id())) + "/" + std::to_string(building_.height);
    auto vdetail = where();
    vdetail["tag"] = to_string(m.tag);
    vdetail["dependency"] = shard_list(m.contract_dependency);
    vdetail["to"] = value(tx->sender_shard);
    sink_.record(EventKind::Voted, Subject::tx(tx->id), id(), std::move(vdetail));

    if (auto early = early_decisions_.find(value(tx->id)); early != early_decisions_.end()) {
      rec.decision = early->second;
      early_decisions_.erase(early);
    }
    executed_.emplace(value(tx->id), std::move(rec));
    commit_order_.push_back(value(tx->id));
    out.push_back({tx, std::move(m)});
  }
  drain_commits();
  return out;
}

void ShardEngine::apply_contract_decision(TxId tx, CommitOutcome outcome) {
  auto it = executed_.find(value(tx));
  if (it == executed_.end()) {
    early_decisions_[value(tx)] = outcome;
    return;
  }
  if (it->second.decision && *it->second.decision != outcome) {
    throw ProtocolViolation("conflicting decisions for tx " + txs(tx));
  }
  it->second.decision = outcome;
  drain_commits();
}

void ShardEngine::drain_commits() {
  while (!commit_order_.empty()) {
    auto it = executed_.find(commit_order_.front());
    auto& rec = it->second;
    if (!rec.decision) break;
    require_open("commit");
    const auto& tx = rec.tx;
    if (*rec.decision == CommitOutcome::Commit && !rec.success) {
      throw ProtocolViolation("commit decided for tx " + txs(tx->id) +
                              " whose execution failed on shard " + std::to_string(value(id())));
    }
    for (auto& snap : rec.held) {
      if (*rec.decision == CommitOutcome::Commit) {
        snap.discard(tx->id);
      } else {
        contracts_.at(snap.contract()) = snap.rollback(tx->id);
      }
      held_.erase(snap.contract());
    }
    if (tx->sender_shard == id()) {
      commit_sender_side(tx, *rec.decision, "sender+contract");
    } else {
      record_outcome(tx, *rec.decision, {{"side", "contract"}});
    }
    executed_.erase(it);
    commit_order_.pop_front();
  }
}

std::vector<ShardId> ShardEngine::settle_decision(const TxRef& tx, const CommitmentDecision& d) {
  std::vector<ShardId> notify;
  for (auto s : d.notified_shards) {
    if (s != id()) notify.push_back(s);
  }
  if (d.notified_shards.count(id())) {
    apply_contract_decision(tx->id, d.decision);
  } else {
    commit_sender_side(tx, d.decision);
  }
  return notify;
}

}  // namespace haechi
