#include <doctest.h>

#include "support.hpp"
#include "haechi/sim/adversary.hpp"
#include "haechi/sim/workload.hpp"

#include <algorithm>

using namespace haechi;
using haechi::testing::load;
using haechi::testing::simulate;

namespace {

constexpr const char* kTwoShards = R"(
name = "two"
duration = 40
[[shards]]
id = 1
block_interval = 1
[[shards]]
id = 2
block_interval = 3
[workload]
rate = 0.5
)";

bool has_error(const std::vector<std::string>& errs, const std::string& prefix) {
  return std::any_of(errs.begin(), errs.end(),
                     [&](const std::string& e) { return e.rfind(prefix, 0) == 0; });
}

std::string error_of(const std::string& toml) {
  try {
    parse_scenario(toml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("scenario parsing") {
  auto s = parse_scenario(kTwoShards);
  CHECK(s.name == "two");
  CHECK(s.shard_count() == 2);
  CHECK(s.shard(shard_id(2)).block_interval == 3);
  CHECK(s.delay(shard_id(1), shard_id(2)) == s.network.default_delay);
  CHECK(s.delay(shard_id(1), shard_id(1)) == s.network.intra_delay);
  CHECK(validation_errors(s).empty());

  CHECK(error_of("duration = 10\nbogus = 1\n").find("bogus") != std::string::npos);
  CHECK(error_of("[[shards]]\nid = 1\nblock_intervall = 2\n").find("shards[0].block_intervall") !=
        std::string::npos);
  CHECK(error_of("protocol = \"three_phase\"\n").find("protocol") != std::string::npos);
  auto syntax = error_of("duration = \n");
  CHECK_FALSE(syntax.empty());
  CHECK(syntax.rfind("<string>:1:", 0) == 0);
  CHECK_THROWS_AS(load_scenario("/nonexistent/x.toml"), ConfigError);
}

TEST_CASE("validation collects every problem with its path") {
  auto s = parse_scenario(kTwoShards);
  s.shards[1].block_interval = 0;
  s.network.delays.push_back({shard_id(1), shard_id(7), 3});
  s.workload.cross_shard_ratio = 1.5;
  s.accounts.push_back({"x", shard_id(9), 1});
  auto errs = validation_errors(s);
  CHECK(errs.size() >= 4);
  CHECK(has_error(errs, "shards[1].block_interval"));
  CHECK(has_error(errs, "network.delays[0].to"));
  CHECK(has_error(errs, "workload.cross_shard_ratio"));
  CHECK(has_error(errs, "accounts[0].shard"));
  CHECK_THROWS_AS(validate(s), ConfigError);
}

TEST_CASE("overrides") {
  auto s = parse_scenario(kTwoShards);
  Overrides o;
  o.shards = 4;
  o.protocol = ProtocolKind::Optimistic;
  o.seed = 9;
  o.workload = 2.0;
  apply_overrides(s, o);
  CHECK(s.shard_count() == 4);
  CHECK(s.shards[1].block_interval == 3);
  CHECK(value(s.shards[3].id) == 4);
  CHECK(s.protocol == ProtocolKind::Optimistic);
  CHECK(s.seed == 9);
  CHECK(s.workload.rate == 2.0);
  CHECK(validation_errors(s).empty());

  Overrides zero;
  zero.shards = 0;
  apply_overrides(s, zero);
  CHECK_FALSE(validation_errors(s).empty());
}

TEST_CASE("workload is a function of the seed") {
  auto s = parse_scenario(kTwoShards);
  const auto w = build_world(s);
  auto a = client_transactions(s, w);
  auto b = client_transactions(s, w);
  REQUIRE(a.size() == b.size());
  CHECK(a.size() > 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].submit_time == b[i].submit_time);
    CHECK(a[i].sender == b[i].sender);
    CHECK(a[i].entry == b[i].entry);
  }
  CHECK(std::is_sorted(a.begin(), a.end(),
                       [](const TxSpec& x, const TxSpec& y) { return x.submit_time < y.submit_time; }));
  s.seed = 2;
  auto c = client_transactions(s, w);
  bool differs = c.size() != a.size();
  for (std::size_t i = 0; !differs && i < a.size(); ++i) differs = a[i].submit_time != c[i].submit_time;
  CHECK(differs);

  CHECK(w.contract_shard(auto_contract(shard_id(2))) == shard_id(2));
  CHECK(w.account_shard(workload_account(shard_id(1), 0)) == shard_id(1));
  CHECK_THROWS(w.contract_shard("nope"));
}

TEST_CASE("adversary picks eligible victims once") {
  auto s = load("attack_intra");
  const auto w = build_world(s);
  Adversary adv(s, w);
  REQUIRE(adv.active());
  TxFactory f(2);
  TxSpec v;
  v.kind = TxKind::OSC;
  v.sender = victim_account(shard_id(1));
  v.sender_shard = shard_id(1);
  v.entry = ContractCall{"dex-2", shard_id(2), {CallKind::Swap, 10, {}, 0}};
  auto victim = f.make(v);

  CHECK_FALSE(adv.observe_and_inject(shard_id(2), victim, 5));  // shard 2 is not watched
  auto plan = adv.observe_and_inject(shard_id(1), victim, 5);
  REQUIRE(plan);
  CHECK(plan->inject_at == 5 + s.adversary.reaction_delay);
  CHECK(plan->submit_to == shard_id(2));
  CHECK(plan->attack.kind == TxKind::IntraShard);
  CHECK(plan->attack.entry == v.entry);
  CHECK(plan->attack.victim == victim->id);
  CHECK_FALSE(adv.observe_and_inject(shard_id(1), victim, 6));

  TxSpec pay;
  pay.sender = v.sender;
  pay.sender_shard = shard_id(1);
  pay.recipient = v.sender;
  pay.recipient_shard = shard_id(1);
  pay.amount = 1;
  CHECK_FALSE(adv.observe_and_inject(shard_id(1), f.make(pay), 7));
}

TEST_CASE("attack success rate") {
  CHECK_THROWS_AS(attack_success_rate({}), std::invalid_argument);
  std::vector<AttackRecord> rs(4);
  rs[1].outcome = AttackOutcome::FrontRan;
  CHECK(attack_success_rate(rs) == doctest::Approx(0.25));
}

TEST_CASE("simulation is deterministic and well formed") {
  auto s = parse_scenario(kTwoShards);
  for (auto p : all_protocols()) {
    CAPTURE(to_string(p));
    s.protocol = p;
    Simulator a(s);
    Simulator b(s);
    const auto ta = a.run().to_jsonl();
    CHECK(ta == b.run().to_jsonl());
    CHECK(a.outstanding() == 0);
    for (std::uint32_t k = 1; k <= 2; ++k) {
      const auto& blocks = a.engine(shard_id(k)).chain().blocks();
      for (std::size_t i = 1; i < blocks.size(); ++i) {
        CHECK(blocks[i].block_ts - blocks[i - 1].block_ts >= s.shard(shard_id(k)).block_interval);
      }
    }
  }
}

TEST_CASE("a halted shard proposes nothing after its halt time") {
  auto s = load("halted");
  Simulator sim(s);
  sim.run();
  const auto& blocks = sim.engine(shard_id(2)).chain().blocks();
  REQUIRE_FALSE(blocks.empty());
  CHECK(blocks.back().block_ts < 20);
  CHECK(sim.engine(shard_id(1)).chain().blocks().back().block_ts > 20);
}

TEST_CASE("lock-step ordering keeps shard heights together") {
  auto s = parse_scenario(kTwoShards);
  s.protocol = ProtocolKind::HaechiSync;
  Simulator sim(s);
  sim.run();
  const auto h1 = sim.engine(shard_id(1)).chain().height();
  const auto h2 = sim.engine(shard_id(2)).chain().height();
  CHECK(h1 >= h2);
  CHECK(h1 - h2 <= 1);

  s.protocol = ProtocolKind::Haechi;
  Simulator free(s);
  free.run();
  CHECK(free.engine(shard_id(1)).chain().height() > 2 * free.engine(shard_id(2)).chain().height());
}
