#include "haechi/sim/adversary.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace haechi {

Adversary::Adversary(const Scenario& s, const World& w) : spec_(s.adversary), world_(w) {
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                    std::uint32_t{0xadd}};
  rng_.seed(seq);
}

bool Adversary::watches(ShardId s) const {
  return spec_.observers.empty() ||
         std::find(spec_.observers.begin(), spec_.observers.end(), s) != spec_.observers.end();
}

std::vector<AttackPlan> Adversary::observe(ShardId shard, Time now,
                                           const std::vector<TxRef>& block) {
  std::vector<AttackPlan> out;
  for (const auto& tx : block) {
    if (auto p = observe_and_inject(shard, tx, now)) out.push_back(std::move(*p));
  }
  return out;
}

std::optional<AttackPlan> Adversary::observe_and_inject(ShardId shard, const TxRef& tx, Time now) {
  if (!active() || !watches(shard)) return std::nullopt;
  if (tx->victim || tx->kind != TxKind::OSC || !tx->entry) return std::nullopt;
  if (tx->entry->payload.kind != CallKind::Swap) return std::nullopt;
  if (attacked_.count(value(tx->id))) return std::nullopt;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Time> jitter(0, spec_.reaction_jitter);
  std::optional<std::pair<Time, std::uint32_t>> best;
  for (std::uint32_t k = 0; k < spec_.byzantine_observers; ++k) {
    const bool noticed = unit(rng_) < spec_.observe_prob;
    const Time reaction = spec_.reaction_delay + jitter(rng_);
    if (noticed && (!best || reaction < best->first)) best = {reaction, k};
  }
  if (!best) return std::nullopt;

  const ShardId cs = tx->entry->shard;
  ShardId home = cs;
  if (spec_.model == AdversaryModel::CrossShardAttack) home = spec_.attacker_shard;
  const AccountId acct = attacker_account(home);
  if (!world_.accounts.count(acct)) return std::nullopt;

  attacked_.insert(value(tx->id));
  AttackPlan p;
  p.victim = tx;
  p.observed_on = shard;
  p.observed_at = now;
  p.inject_at = now + best->first;
  p.observer = best->second;
  p.submit_to = home;
  p.attack.kind = home == cs ? TxKind::IntraShard : TxKind::OSC;
  p.attack.sender = acct;
  p.attack.sender_shard = home;
  p.attack.entry = *tx->entry;
  p.attack.submit_time = p.inject_at;
  p.attack.label = "attack-" + std::to_string(value(tx->id));
  p.attack.victim = tx->id;
  return p;
}

std::vector<AttackRecord> attack_records(const Trace& trace) {
  std::vector<AttackRecord> records;
  // first Executed seq per (tx, contract)
  std::map<std::pair<std::uint64_t, std::string>, std::uint64_t> executed;
  for (const auto& ev : trace.events()) {
    if (ev.kind == EventKind::AdversaryInjected && ev.subject.is_tx()) {
      AttackRecord r;
      r.attack = ev.subject.txid();
      r.victim = TxId{ev.detail.at("victim").get<std::uint64_t>()};
      r.contract = ev.detail.at("contract").get<std::string>();
      r.observed_at = ev.detail.at("observed_at").get<Time>();
      r.injected_at = ev.time;
      records.push_back(std::move(r));
    } else if (ev.kind == EventKind::Executed && ev.subject.is_tx()) {
      executed.emplace(std::make_pair(ev.subject.a, ev.detail.value("contract", std::string{})),
                       ev.seq);
    }
  }
  for (auto& r : records) {
    auto a = executed.find({value(r.attack), r.contract});
    auto v = executed.find({value(r.victim), r.contract});
    const bool front = a != executed.end() && v != executed.end() && a->second < v->second;
    r.outcome = front ? AttackOutcome::FrontRan : AttackOutcome::Failed;
  }
  return records;
}

double attack_success_rate(const std::vector<AttackRecord>& records) {
  if (records.empty()) throw std::invalid_argument("attack success rate of an empty record set");
  const auto wins = std::count_if(records.begin(), records.end(), [](const AttackRecord& r) {
    return r.outcome == AttackOutcome::FrontRan;
  });
  return static_cast<double>(wins) / static_cast<double>(records.size());
}

}  // namespace haechi
