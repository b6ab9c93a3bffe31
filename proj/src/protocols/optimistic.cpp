#include "relay_driver.hpp"

namespace haechi {

// Single-contract calls run and commit at the contract shard the moment
// they arrive; a held contract means abort, never wait. Multi-contract
// calls still vote and hold, since their outcome depends on other shards.

void RelayDriver::optimistic_relay(ShardEngine& sh, const TxRef& tx, ShardId coordinator) {
  auto& loc = local(sh.id());
  if (tx->multi_contract()) {
    loc.participated.insert(value(tx->id));
    if (busy(sh, tx)) {
      vote(sh, tx, coordinator, false, 0, "contract locked");
      return;
    }
    auto run = run_calls(sh, tx);
    if (run.ok) hold(sh, tx, run);
    vote(sh, tx, coordinator, run.ok, run.ret);
    return;
  }
  if (busy(sh, tx)) {
    sh.record_outcome(tx, CommitOutcome::Abort, {{"side", "contract"}, {"reason", "contract locked"}});
    vote(sh, tx, coordinator, false, 0, "contract locked");
    return;
  }
  auto run = run_calls(sh, tx);
  for (auto& [c, s] : run.snaps) s.discard(tx->id);
  sh.record_outcome(tx, run.ok ? CommitOutcome::Commit : CommitOutcome::Abort,
                    {{"side", "contract"}});
  vote(sh, tx, coordinator, run.ok, run.ret);
}

void RelayDriver::optimistic_local(ShardEngine& sh, const TxRef& tx) {
  if (busy(sh, tx)) {
    sh.commit_sender_side(tx, CommitOutcome::Abort);
    return;
  }
  auto run = run_calls(sh, tx);
  for (auto& [c, s] : run.snaps) s.discard(tx->id);
  sh.commit_sender_side(tx, run.ok ? CommitOutcome::Commit : CommitOutcome::Abort,
                        "sender+contract");
}

std::unique_ptr<ProtocolDriver> make_optimistic_driver(SimContext& ctx) {
  return std::make_unique<RelayDriver>(ctx, RelayDriver::Mode::Optimistic);
}

}  // namespace haechi
