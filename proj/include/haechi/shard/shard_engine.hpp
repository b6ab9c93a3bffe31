#pragma once

#include "haechi/core/block.hpp"
#include "haechi/core/trace.hpp"
#include "haechi/core/types.hpp"
#include "haechi/shard/ledger.hpp"
#include "haechi/vm/contract.hpp"

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace haechi {

struct ShardConfig {
  ShardId shard{};
  Time block_interval = 1;
  bool is_beacon = false;
  std::size_t capacity = 64;  // client transactions per block
};

enum class ExecTag : std::uint8_t { FinalAndCommit, FinalButAbort, ProgressAndCommit, ProgressButAbort };

const char* to_string(ExecTag t);
constexpr bool is_final(ExecTag t) {
  return t == ExecTag::FinalAndCommit || t == ExecTag::FinalButAbort;
}
constexpr bool is_commit_vote(ExecTag t) {
  return t == ExecTag::FinalAndCommit || t == ExecTag::ProgressAndCommit;
}

struct ExecutionMessage {
  TxId txid{};
  ShardId from{};
  ExecTag tag = ExecTag::FinalAndCommit;
  Amount return_value = 0;
  std::set<ShardId> contract_dependency;
  std::string attestation;

  nlohmann::json to_json() const;
};

struct CommitmentDecision {
  TxId txid{};
  CommitOutcome decision = CommitOutcome::Commit;
  std::set<ShardId> notified_shards;
};

/// Sender-side commit rule over every execution message received for one
/// transaction. nullopt while Progress votes are still missing. Throws
/// ProtocolViolation on mixed txids, mixed Final/Progress tags, or one
/// shard reporting two different tags.
std::optional<CommitmentDecision> decide_commit(std::span<const ExecutionMessage> messages);

/// Collects execution messages per transaction and fires decide_commit
/// once per txid.
class Coordinator {
 public:
  std::optional<CommitmentDecision> on_execution_message(const ExecutionMessage& m);
  bool decided(TxId tx) const { return decided_.count(value(tx)) != 0; }
  std::size_t undecided() const { return inbox_.size() - decided_.size(); }

 private:
  std::map<std::uint64_t, std::vector<ExecutionMessage>> inbox_;
  std::map<std::uint64_t, CommitmentDecision> decided_;
};

struct ReadyCommit {
  TxRef tx;
  CommitOutcome outcome = CommitOutcome::Commit;
};

struct BlockInput {
  std::vector<TxRef> txs;
  std::vector<ReadyCommit> ready;
};

struct BlockResult {
  Block block;
  CrossLink crosslink;
  std::vector<TxRef> outgoing_credits;  // cross-shard transfers debited here
};

struct OutgoingExec {
  TxRef tx;
  ExecutionMessage message;
};

/// One shard: accounts, contracts, chain and the block under construction,
/// plus the execute and commit phases driven by ordered call lists.
class ShardEngine {
 public:
  ShardEngine(ShardConfig config, EventSink& sink);

  const ShardConfig& config() const { return config_; }
  ShardId id() const { return config_.shard; }

  Ledger& ledger() { return ledger_; }
  const Ledger& ledger() const { return ledger_; }
  void add_contract(ContractState state);
  bool hosts(const ContractId& c) const { return contracts_.count(c) != 0; }
  const ContractState& contract(const ContractId& c) const { return contracts_.at(c); }
  std::map<ContractId, ContractState>& contracts() { return contracts_; }
  const std::map<ContractId, ContractState>& contracts() const { return contracts_; }
  const Chain& chain() const { return chain_; }

  // ---- block building, shared by every protocol ----
  void begin_block(Time ts);
  bool block_open() const { return open_; }
  Height building_height() const { return building_.height; }
  Time building_ts() const { return building_.block_ts; }

  /// Validates the sender's funds and withholds them. Plain transfers are
  /// settled on the spot (cross-shard ones leave a pending credit). Returns
  /// false and records Aborted when the transaction is invalid.
  bool admit(const TxRef& tx);
  /// Consumes or releases the sender's coin lock and lists the outcome.
  void commit_sender_side(const TxRef& tx, CommitOutcome outcome, const char* side = "sender");
  /// Lists an outcome in the committing list without touching the ledger.
  void record_outcome(const TxRef& tx, CommitOutcome outcome, nlohmann::json detail);
  void apply_credit(const TxRef& tx);
  BlockResult seal_block();

  /// Single-call form: admits `input.txs`, settles `input.ready`, seals.
  BlockResult process_block(const BlockInput& input, Time now);

  // ---- ordered execution (ordering-phase protocols) ----
  void enqueue_ccl(const std::vector<CclEntry>& slice);
  /// Executes queued entries in order until the head needs a contract held
  /// by an undecided multi-contract transaction.
  std::vector<OutgoingExec> run_exec_queue();
  std::vector<OutgoingExec> execute_ccl(const std::vector<CclEntry>& slice);
  std::size_t exec_backlog() const { return exec_queue_.size(); }
  bool contract_held(const ContractId& c) const { return held_.count(c) != 0; }

  /// Contract-side effect of a coordinator decision. Outcomes are listed in
  /// execution order; a decision that arrives before execution is kept.
  void apply_contract_decision(TxId tx, CommitOutcome outcome);

  // ---- coordination (this shard as the sender shard) ----
  std::optional<CommitmentDecision> on_execution_message(const ExecutionMessage& m) {
    return coordinator_.on_execution_message(m);
  }
  /// Settles the sender side of a decision. Returns the other shards that
  /// must be told.
  std::vector<ShardId> settle_decision(const TxRef& tx, const CommitmentDecision& d);

 private:
  struct Executed {
    TxRef tx;
    bool success = false;
    std::vector<StateSnapshot> held;  // non-empty only while a Progress commit vote is undecided
    std::optional<CommitOutcome> decision;
  };

  void require_open(const char* what) const;
  void drain_commits();
  nlohmann::json where() const;

  ShardConfig config_;
  EventSink& sink_;
  Ledger ledger_;
  std::map<ContractId, ContractState> contracts_;
  Chain chain_;

  bool open_ = false;
  Block building_;
  std::vector<TxRef> credits_;

  std::deque<CclEntry> exec_queue_;
  std::map<ContractId, TxId> held_;
  std::deque<std::uint64_t> commit_order_;
  std::map<std::uint64_t, Executed> executed_;
  std::map<std::uint64_t, CommitOutcome> early_decisions_;
  Coordinator coordinator_;
};

}  // namespace haechi
