#pragma once

#include "haechi/protocols/driver.hpp"

#include <deque>
#include <map>
#include <set>

namespace haechi {

/// Protocols without an ordering phase: the sender relays each call to its
/// contract shard, which executes on arrival and votes back.
class RelayDriver final : public ProtocolDriver {
 public:
  enum class Mode : std::uint8_t { TwoPhaseSender, TwoPhaseReference, Optimistic };

  RelayDriver(SimContext& ctx, Mode mode);

  void on_block(ShardEngine& sh, std::vector<Message>& inbox,
                const std::vector<TxRef>& txs) override;
  bool beacon_blocks() const override { return mode_ == Mode::TwoPhaseReference; }

 private:
  struct Waiter {
    TxRef tx;
    ShardId coordinator{};
    bool local = false;
  };
  struct Local {
    std::map<ContractId, TxId> locks;
    std::map<std::uint64_t, std::vector<StateSnapshot>> held;
    std::set<std::uint64_t> participated;
    std::deque<Waiter> waiters;
    // Decisions that overtook the relay; value: outcome already listed here.
    std::map<std::uint64_t, bool> decided_before_arrival;
  };
  struct Run {
    bool ok = false;
    Amount ret = 0;
    std::map<ContractId, StateSnapshot> snaps;
  };

  Local& local(ShardId s) { return locals_[value(s)]; }
  bool busy(ShardEngine& sh, const TxRef& tx) ;
  Run run_calls(ShardEngine& sh, const TxRef& tx);
  void hold(ShardEngine& sh, const TxRef& tx, Run& run);
  void vote(ShardEngine& sh, const TxRef& tx, ShardId coordinator, bool ok, Amount ret,
            const char* note = nullptr);

  void start(ShardEngine& sh, const TxRef& tx);
  void on_relay(ShardEngine& sh, const TxRef& tx, ShardId coordinator);
  void on_local(ShardEngine& sh, const TxRef& tx);
  void on_vote(ShardEngine& sh, const ExecMsg& m);
  void settle(ShardEngine& sh, const TxRef& tx, CommitOutcome outcome);
  void retry_waiters(ShardEngine& sh);
  bool settled_before_arrival(ShardEngine& sh, const TxRef& tx);

  // Optimistic contract-side handling (optimistic.cpp).
  void optimistic_relay(ShardEngine& sh, const TxRef& tx, ShardId coordinator);
  void optimistic_local(ShardEngine& sh, const TxRef& tx);

  SimContext& ctx_;
  Mode mode_;
  std::map<std::uint32_t, Local> locals_;
};

}  // namespace haechi
