#pragma once

#include "haechi/beacon/beacon.hpp"
#include "haechi/protocols/protocol.hpp"
#include "haechi/shard/shard_engine.hpp"
#include "haechi/sim/scenario.hpp"

#include <memory>
#include <variant>
#include <vector>

namespace haechi {

struct CrossLinkMsg {
  CrossLink cl;
};
struct CclMsg {
  std::uint64_t cycle = 0;
  std::vector<CclEntry> entries;
};
struct ExecMsg {
  TxRef tx;
  ExecutionMessage msg;
};
struct DecisionMsg {
  TxRef tx;
  CommitOutcome outcome = CommitOutcome::Commit;
};
/// Sender (or reference shard) to contract shard: execute and vote.
struct RelayMsg {
  TxRef tx;
  ShardId coordinator{};
};
/// Sender to reference shard.
struct PrepareMsg {
  TxRef tx;
};
struct CreditMsg {
  TxRef tx;
};
struct SyncReleaseMsg {
  Height height = 0;
};

using Message = std::variant<CrossLinkMsg, CclMsg, ExecMsg, DecisionMsg, RelayMsg, PrepareMsg,
                             CreditMsg, SyncReleaseMsg>;

/// What a protocol driver may ask of the simulator.
class SimContext {
 public:
  virtual ~SimContext() = default;
  virtual Time now() const = 0;
  virtual const Scenario& scenario() const = 0;
  virtual ShardEngine& shard(ShardId s) = 0;
  virtual EventSink& sink() = 0;
  /// Delivery after `hold` plus the link delay plus `extra`.
  virtual void send(ShardId from, ShardId to, Message m, Time extra = 0, Time hold = 0) = 0;
  /// Extra delay configured for messages carrying this transaction.
  virtual Time jitter(const Transaction& tx) const = 0;
  /// Lock-step protocols: allow the shard's next proposal.
  virtual void schedule_proposal(ShardId s) = 0;
};

class ProtocolDriver {
 public:
  virtual ~ProtocolDriver() = default;

  /// Runs inside an open block on `shard`: handles the messages cut into the
  /// block, then admits the client transactions.
  virtual void on_block(ShardEngine& shard, std::vector<Message>& inbox,
                        const std::vector<TxRef>& txs) = 0;
  virtual void on_sealed(ShardEngine& shard, const BlockResult& result) {
    (void)shard;
    (void)result;
  }
  /// Messages handled on arrival instead of waiting for a block. Returns
  /// true when consumed.
  virtual bool on_arrival(ShardId to, Message& m) {
    (void)to;
    (void)m;
    return false;
  }
  /// Whether the beacon shard runs blocks (reference-shard coordination).
  virtual bool beacon_blocks() const { return false; }
  /// Whether shards schedule their own next block; lock-step protocols
  /// call SimContext::schedule_proposal instead.
  virtual bool self_paced() const { return true; }
};

std::unique_ptr<ProtocolDriver> make_driver(ProtocolKind kind, SimContext& ctx);

std::unique_ptr<ProtocolDriver> make_haechi_driver(SimContext& ctx, bool lock_step);
std::unique_ptr<ProtocolDriver> make_two_phase_driver(SimContext& ctx, bool reference_shard);
std::unique_ptr<ProtocolDriver> make_optimistic_driver(SimContext& ctx);

/// Detail payload describing a transaction (Submitted events).
nlohmann::json tx_detail(const Transaction& tx);

}  // namespace haechi
