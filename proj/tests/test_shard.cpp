#include <doctest.h>

#include "haechi/shard/ledger.hpp"
#include "haechi/shard/shard_engine.hpp"

using namespace haechi;

namespace {

ExecutionMessage vote(std::uint64_t tx, std::uint32_t from, ExecTag tag, std::set<ShardId> deps = {}) {
  ExecutionMessage m;
  m.txid = tx_id(tx);
  m.from = shard_id(from);
  m.tag = tag;
  m.contract_dependency = deps.empty() ? std::set<ShardId>{shard_id(from)} : deps;
  return m;
}

std::size_t count(const Trace& t, EventKind k, std::uint64_t tx) {
  std::size_t n = 0;
  for (const auto& ev : t.events()) n += ev.kind == k && ev.subject.is_tx() && ev.subject.a == tx;
  return n;
}

}  // namespace

TEST_CASE("ledger withholds, consumes and releases") {
  Ledger l;
  l.open("a", 10);
  CHECK(l.lock(tx_id(1), "a", 7));
  CHECK(l.available("a") == 3);
  CHECK_FALSE(l.lock(tx_id(2), "a", 4));
  CHECK_FALSE(l.lock(tx_id(3), "nobody", 1));
  CHECK(l.lock_count() == 1);
  l.release(tx_id(1));
  CHECK(l.available("a") == 10);
  CHECK(l.lock(tx_id(4), "a", 6));
  l.consume(tx_id(4));
  CHECK(l.total("a") == 4);
  CHECK(l.sum_locked() == 0);
  CHECK_THROWS_AS(l.consume(tx_id(4)), ProtocolViolation);
  CHECK_THROWS_AS(l.release(tx_id(9)), ProtocolViolation);
  CHECK_FALSE(l.debit("a", 5));
  CHECK(l.debit("a", 4));
  l.credit("b", 2);
  CHECK(l.total("b") == 2);
}

TEST_CASE("commit rule over execution messages") {
  const std::set<ShardId> both{shard_id(2), shard_id(3)};

  SUBCASE("single final vote decides") {
    std::vector<ExecutionMessage> ms{vote(1, 2, ExecTag::FinalAndCommit)};
    auto d = decide_commit(ms);
    REQUIRE(d);
    CHECK(d->decision == CommitOutcome::Commit);
    CHECK(d->notified_shards == std::set<ShardId>{shard_id(2)});
    ms = {vote(1, 2, ExecTag::FinalButAbort)};
    CHECK(decide_commit(ms)->decision == CommitOutcome::Abort);
  }
  SUBCASE("progress waits for every dependency") {
    std::vector<ExecutionMessage> ms{vote(1, 2, ExecTag::ProgressAndCommit, both)};
    CHECK_FALSE(decide_commit(ms));
    ms.push_back(vote(1, 3, ExecTag::ProgressAndCommit, both));
    auto d = decide_commit(ms);
    REQUIRE(d);
    CHECK(d->decision == CommitOutcome::Commit);
    CHECK(d->notified_shards == both);
  }
  SUBCASE("one progress abort decides at once") {
    std::vector<ExecutionMessage> ms{vote(1, 3, ExecTag::ProgressButAbort, both)};
    auto d = decide_commit(ms);
    REQUIRE(d);
    CHECK(d->decision == CommitOutcome::Abort);
    CHECK(d->notified_shards == both);
  }
  SUBCASE("malformed sets are rejected") {
    std::vector<ExecutionMessage> mixed_tx{vote(1, 2, ExecTag::FinalAndCommit), vote(2, 2, ExecTag::FinalAndCommit)};
    CHECK_THROWS_AS(decide_commit(mixed_tx), ProtocolViolation);
    std::vector<ExecutionMessage> mixed_kind{vote(1, 2, ExecTag::FinalAndCommit),
                                             vote(1, 3, ExecTag::ProgressAndCommit, both)};
    CHECK_THROWS_AS(decide_commit(mixed_kind), ProtocolViolation);
    std::vector<ExecutionMessage> flip{vote(1, 2, ExecTag::ProgressAndCommit, both),
                                       vote(1, 2, ExecTag::ProgressButAbort, both)};
    CHECK_THROWS_AS(decide_commit(flip), ProtocolViolation);
    std::vector<ExecutionMessage> no_self{vote(1, 2, ExecTag::ProgressAndCommit, {shard_id(3)})};
    CHECK_THROWS_AS(decide_commit(no_self), ProtocolViolation);
    std::vector<ExecutionMessage> two_final{vote(1, 2, ExecTag::FinalAndCommit), vote(1, 3, ExecTag::FinalAndCommit)};
    CHECK_THROWS_AS(decide_commit(two_final), ProtocolViolation);
  }
  SUBCASE("coordinator decides once and still checks late votes") {
    Coordinator c;
    CHECK(c.on_execution_message(vote(1, 2, ExecTag::ProgressButAbort, both)));
    CHECK_FALSE(c.on_execution_message(vote(1, 3, ExecTag::ProgressAndCommit, both)));
    CHECK(c.decided(tx_id(1)));
    CHECK_THROWS_AS(c.on_execution_message(vote(1, 3, ExecTag::ProgressButAbort, both)), ProtocolViolation);
  }
}

TEST_CASE("shard engine block building") {
  TraceRecorder rec;
  ShardEngine sh({shard_id(1), 2, false, 8}, rec);
  sh.ledger().open("a", 20);
  sh.ledger().open("b", 0);
  TxFactory f(2);

  TxSpec pay;
  pay.sender = "a";
  pay.sender_shard = shard_id(1);
  pay.recipient = "b";
  pay.recipient_shard = shard_id(1);
  pay.amount = 5;
  auto t1 = f.make(pay);
  TxSpec big = pay;
  big.amount = 100;
  auto t2 = f.make(big);
  TxSpec call;
  call.kind = TxKind::OSC;
  call.sender = "a";
  call.sender_shard = shard_id(1);
  call.entry = ContractCall{"dex", shard_id(2), {CallKind::Swap, 10, {}, 0}};
  auto t3 = f.make(call);
  TxSpec xfer = pay;
  xfer.kind = TxKind::CrossShardTransfer;
  xfer.recipient_shard = shard_id(2);
  xfer.amount = 1;
  auto t4 = f.make(xfer);

  sh.begin_block(2);
  CHECK(sh.admit(t1));
  CHECK_FALSE(sh.admit(t2));
  CHECK(sh.admit(t3));
  CHECK(sh.admit(t4));
  CHECK(sh.ledger().total("b") == 5);
  CHECK(sh.ledger().locked("a") == 10);
  auto r = sh.seal_block();
  CHECK(r.block.pending_list.size() == 3);
  CHECK(r.crosslink.tx_list.size() == 1);
  CHECK(r.outgoing_credits.size() == 1);
  CHECK(count(rec.trace(), EventKind::Aborted, 2) == 1);
  CHECK(count(rec.trace(), EventKind::Committed, 1) == 1);

  CHECK_THROWS_AS(sh.begin_block(3), ProtocolViolation);
  sh.begin_block(4);
  sh.commit_sender_side(t3, CommitOutcome::Abort);
  sh.seal_block();
  CHECK(sh.ledger().total("a") == 14);
  CHECK(sh.ledger().locked("a") == 0);
  CHECK(sh.chain().height() == 2);
}

TEST_CASE("ordered execution stalls behind a held contract and commits in execution order") {
  TraceRecorder rec;
  ShardEngine sh({shard_id(2), 1, false, 8}, rec);
  sh.add_contract(ContractState::exchange("x", 1000, 1000));
  sh.add_contract(ContractState::exchange("y", 1000, 1000));
  TxFactory f(3);

  TxSpec multi;
  multi.kind = TxKind::OSC;
  multi.sender = "a";
  multi.sender_shard = shard_id(1);
  multi.entry = ContractCall{"x", shard_id(2), {CallKind::Swap, 10, {}, 0}};
  multi.sub_calls = {ContractCall{"z", shard_id(3), {CallKind::Swap, 1, {}, 0}}};
  auto m = f.make(multi);
  TxSpec single = multi;
  single.sub_calls.clear();
  auto s1 = f.make(single);  // also touches x: must wait
  single.entry = ContractCall{"y", shard_id(2), {CallKind::Swap, 10, {}, 0}};
  auto s2 = f.make(single);  // y is free, but stays behind s1 in the queue

  sh.begin_block(1);
  auto out = sh.execute_ccl({{m, shard_id(1), 1, 0, 1}, {s1, shard_id(1), 1, 1, 1}, {s2, shard_id(1), 1, 2, 1}});
  REQUIRE(out.size() == 1);
  CHECK(out[0].message.tag == ExecTag::ProgressAndCommit);
  CHECK(sh.contract_held("x"));
  CHECK(sh.exec_backlog() == 2);
  sh.apply_contract_decision(s1->id, CommitOutcome::Commit);  // early, kept until s1 runs
  sh.seal_block();

  sh.begin_block(2);
  sh.apply_contract_decision(m->id, CommitOutcome::Abort);
  CHECK_FALSE(sh.contract_held("x"));
  CHECK(sh.contract("x") == ContractState::exchange("x", 1000, 1000));
  out = sh.run_exec_queue();
  CHECK(out.size() == 2);
  sh.apply_contract_decision(s2->id, CommitOutcome::Commit);
  auto r = sh.seal_block();
  REQUIRE(r.block.committing_list.size() == 3);
  CHECK(r.block.committing_list[0] == std::pair{m->id, CommitOutcome::Abort});
  CHECK(r.block.committing_list[1].first == s1->id);
  CHECK(r.block.committing_list[2].first == s2->id);
  CHECK(sh.exec_backlog() == 0);
}

TEST_CASE("settling at the sender shard") {
  TraceRecorder rec;
  ShardEngine sh({shard_id(1), 1, false, 8}, rec);
  sh.ledger().open("a", 50);
  TxFactory f(2);
  TxSpec call;
  call.kind = TxKind::OSC;
  call.sender = "a";
  call.sender_shard = shard_id(1);
  call.entry = ContractCall{"dex", shard_id(2), {CallKind::Swap, 10, {}, 0}};
  auto t = f.make(call);
  sh.begin_block(1);
  sh.admit(t);
  auto d = sh.on_execution_message(vote(value(t->id), 2, ExecTag::FinalAndCommit));
  REQUIRE(d);
  auto notify = sh.settle_decision(t, *d);
  CHECK(notify == std::vector<ShardId>{shard_id(2)});
  CHECK(sh.ledger().total("a") == 40);
}
