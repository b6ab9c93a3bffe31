#include <doctest.h>

#include "haechi/beacon/beacon.hpp"
#include "haechi/beacon/gas.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>

using namespace haechi;

namespace {

TxRef osc(TxFactory& f, std::uint32_t from, std::uint32_t to) {
  TxSpec s;
  s.kind = TxKind::OSC;
  s.sender = "u";
  s.sender_shard = shard_id(from);
  s.entry = ContractCall{"c" + std::to_string(to), shard_id(to), {CallKind::Swap, 1, {}, 0}};
  return f.make(s);
}

CrossLink cl(std::uint32_t shard, Height h, Time ts, std::vector<TxRef> txs = {}) {
  CrossLink c;
  c.shard = shard_id(shard);
  c.height = h;
  c.block_ts = ts;
  c.tx_list = std::move(txs);
  return c;
}

}  // namespace

TEST_CASE("ordering gas") {
  // Hand-computed: comparisons * 780 / (n * txs).
  CHECK(estimate_ordering_gas(4, 2, GasCase::Max) == 4 * 4 * 780 / 8);
  CHECK(estimate_ordering_gas(4, 2, GasCase::Avg) == 780);
  CHECK(estimate_ordering_gas(4, 2, GasCase::Min) == 390);
  CHECK(estimate_ordering_gas(3, 7, GasCase::Min) == 111);  // 780/7 = 111.4
  CHECK(estimate_ordering_gas(1, 1, GasCase::Max) == 780);
  CHECK(estimate_ordering_gas(1, 1, GasCase::Avg) == 780);  // n log n floored at one comparison
  CHECK(estimate_ordering_gas(1, 1, GasCase::Min) == 780);
  CHECK(ordering_comparisons(8, GasCase::Avg) == doctest::Approx(24.0));
  CHECK_THROWS_AS(estimate_ordering_gas(0, 1, GasCase::Max), std::invalid_argument);
  CHECK_THROWS_AS(estimate_ordering_gas(1, 0, GasCase::Avg), std::invalid_argument);
  CHECK(std::string(to_string(GasCase::Avg)) == "AVG");
}

TEST_CASE("beacon pools out-of-order CrossLinks and drops duplicates") {
  BeaconState b(2);
  CHECK(b.on_crosslink(cl(1, 2, 5)) == BeaconState::Receipt::Pooled);
  CHECK(b.pool_size(shard_id(1)) == 1);
  CHECK(b.on_crosslink(cl(1, 2, 5)) == BeaconState::Receipt::Duplicate);
  CHECK(b.on_crosslink(cl(1, 1, 2)) == BeaconState::Receipt::Appended);
  CHECK(b.pool_size() == 0);
  CHECK(b.shard_cls(shard_id(1)).size() == 2);
  CHECK(b.shard_last_ts(shard_id(1)) == 5);
  CHECK(b.on_crosslink(cl(1, 1, 2)) == BeaconState::Receipt::Duplicate);
  CHECK_THROWS_AS(b.on_crosslink(cl(3, 1, 1)), ProtocolViolation);
  CHECK_THROWS_AS(b.on_crosslink(cl(2, 0, 1)), ProtocolViolation);
  CHECK_THROWS_AS(BeaconState(0), ConfigError);
}

TEST_CASE("cycle fires only with at least one CrossLink per shard") {
  TxFactory f(3);
  BeaconState b(2);
  auto a = osc(f, 1, 3);
  auto c = osc(f, 2, 3);
  auto d = osc(f, 1, 3);
  b.on_crosslink(cl(1, 1, 3, {a}));
  b.on_crosslink(cl(1, 2, 9, {d}));
  CHECK_FALSE(b.try_order_cycle());
  b.on_crosslink(cl(2, 1, 4, {c}));
  auto cyc = b.try_order_cycle();
  REQUIRE(cyc);
  CHECK(cyc->cycle == 1);
  CHECK(cyc->end_ts == 4);  // min of latest timestamps 9 and 4
  REQUIRE(cyc->merged.size() == 2);
  CHECK(cyc->merged[0].tx == a);
  CHECK(cyc->merged[1].tx == c);
  CHECK(cyc->lists.at(shard_id(3)).size() == 2);
  CHECK(b.last_ordered_height(shard_id(1)) == 1);
  CHECK(b.shard_cls(shard_id(1)).size() == 1);
  // Shard 2 has nothing new, so the leftover height 2 waits.
  CHECK_FALSE(b.try_order_cycle());
}

TEST_CASE("equal timestamps break ties by shard, height and index") {
  TxFactory f(4);
  BeaconState b(3);
  auto x = osc(f, 3, 4), y = osc(f, 1, 4), z = osc(f, 1, 4), w = osc(f, 2, 4);
  b.on_crosslink(cl(3, 1, 6, {x}));
  b.on_crosslink(cl(1, 1, 6, {y, z}));
  b.on_crosslink(cl(2, 1, 6, {w}));
  auto cyc = b.try_order_cycle();
  REQUIRE(cyc);
  std::vector<TxRef> got;
  for (const auto& e : cyc->merged) got.push_back(e.tx);
  CHECK(got == std::vector<TxRef>{y, z, w, x});
}

TEST_CASE("a transaction carried twice is ordered by its first-seen timestamp") {
  TxFactory f(3);
  BeaconState b(2);
  auto t = osc(f, 1, 3);
  auto u = osc(f, 2, 3);
  b.on_crosslink(cl(1, 1, 2, {t}));
  CHECK(b.first_ts(t->id) == 2);
  b.on_crosslink(cl(2, 1, 1, {u}));
  auto cyc = b.try_order_cycle();
  REQUIRE(cyc);
  CHECK(cyc->end_ts == 1);
  CHECK(cyc->merged.size() == 1);
  CHECK_FALSE(b.first_ts(tx_id(99)));
}

TEST_CASE("merged order matches a lexicographic oracle") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    const std::uint32_t m = 2 + rng() % 4;
    TxFactory f(m + 1);
    BeaconState b(m);
    std::vector<Height> h(m + 1, 0);
    for (int k = 0; k < 30; ++k) {
      const std::uint32_t s = 1 + rng() % m;
      std::vector<TxRef> txs;
      for (std::uint64_t i = rng() % 4; i > 0; --i) txs.push_back(osc(f, s, m + 1));
      ++h[s];
      b.on_crosslink(cl(s, h[s], static_cast<Time>(h[s] * (1 + s % 3)), std::move(txs)));
    }
    for (auto c = b.try_order_cycle(); c; c = b.try_order_cycle()) {
      for (std::size_t i = 1; i < c->merged.size(); ++i) {
        const auto& p = c->merged[i - 1];
        const auto& q = c->merged[i];
        CHECK(std::tuple(p.key_ts, value(p.cl_shard), p.cl_height, p.index) <
              std::tuple(q.key_ts, value(q.cl_shard), q.cl_height, q.index));
        CHECK(q.key_ts <= c->end_ts);
      }
    }
  }
}

TEST_CASE("lock-step cycle takes exactly one CrossLink per shard") {
  BeaconState b(2);
  b.on_crosslink(cl(1, 1, 1));
  b.on_crosslink(cl(1, 2, 2));
  CHECK_FALSE(b.try_sync_cycle());
  b.on_crosslink(cl(2, 1, 5));
  auto c = b.try_sync_cycle();
  REQUIRE(c);
  CHECK(c->crosslinks.size() == 2);
  CHECK(c->end_ts == 5);
  CHECK_FALSE(b.try_sync_cycle());
  b.on_crosslink(cl(2, 2, 10));
  c = b.try_sync_cycle();
  REQUIRE(c);
  CHECK(b.last_ordered_height(shard_id(1)) == 2);
  CHECK(b.last_ordered_height(shard_id(2)) == 2);
}
