#include "haechi/sim/simulator.hpp"

#include <algorithm>

namespace haechi {

namespace {

ContractState initial_state(const ContractSpec& c) {
  if (c.kind == ContractKind::TokenLedger) return ContractState::ledger(c.id, c.balances);
  return ContractState::exchange(c.id, c.coin_reserve, c.token_reserve);
}

}  // namespace

Simulator::Simulator(Scenario scenario)
    : scenario_((validate(scenario), std::move(scenario))),
      world_(build_world(scenario_)),
      factory_(scenario_.shard_count()),
      adversary_(scenario_, world_) {
  init({});
}

Simulator::Simulator(Scenario scenario, DriverFactory factory)
    : scenario_((validate(scenario), std::move(scenario))),
      world_(build_world(scenario_)),
      factory_(scenario_.shard_count()),
      adversary_(scenario_, world_) {
  init(std::move(factory));
}

Simulator::~Simulator() = default;

void Simulator::init(DriverFactory factory) {
  driver_ = factory ? factory(*this) : make_driver(scenario_.protocol, *this);

  engines_[0] = std::make_unique<ShardEngine>(
      ShardConfig{kBeaconShard, scenario_.beacon_interval, true, 0}, sink());
  for (const auto& sp : scenario_.shards) {
    engines_[value(sp.id)] = std::make_unique<ShardEngine>(
        ShardConfig{sp.id, sp.block_interval, false, scenario_.capacity(sp.id)}, sink());
  }
  for (const auto& [id, a] : world_.accounts) engines_.at(value(a.shard))->ledger().open(id, a.coins);
  for (const auto& [id, c] : world_.contracts) engines_.at(value(c.shard))->add_contract(initial_state(c));

  for (auto& spec : client_transactions(scenario_, world_)) {
    const Time t = spec.submit_time;
    push(t, SubmitEv{factory_.make(std::move(spec))});
  }
  for (const auto& sp : scenario_.shards) push(scenario_.start(sp.id), ProposeEv{sp.id});
  if (driver_->beacon_blocks()) push(scenario_.beacon_interval, ProposeEv{kBeaconShard});
}

void Simulator::push(Time t, Body body) {
  heap_.push_back(Event{t, next_seq_++, std::move(body)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
}

bool Simulator::keep_going(Time t) const {
  return t < scenario_.duration || (outstanding() > 0 && t < scenario_.duration + scenario_.drain);
}

const Trace& Simulator::run() {
  if (ran_) return trace();
  ran_ = true;
  const Time horizon = scenario_.duration + scenario_.drain;
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    if (ev.time > horizon) break;
    now_ = ev.time;
    recorder_.set_time(now_);
    std::visit([this](auto& body) { on(body); }, ev.body);
  }
  return trace();
}

void Simulator::send(ShardId from, ShardId to, Message m, Time extra, Time hold) {
  push(now_ + hold + scenario_.delay(from, to) + extra, DeliverEv{to, std::move(m)});
}

Time Simulator::jitter(const Transaction& tx) const {
  if (tx.label.empty()) return 0;
  auto it = scenario_.network.jitter.find(tx.label);
  return it == scenario_.network.jitter.end() ? 0 : it->second;
}

void Simulator::schedule_proposal(ShardId s) {
  if (!proposal_pending_.insert(value(s)).second) return;
  Time t = now_;
  if (auto it = last_proposal_.find(value(s)); it != last_proposal_.end()) {
    t = std::max(t, it->second + scenario_.shard(s).block_interval);
  }
  push(t, ProposeEv{s});
}

void Simulator::record(EventKind kind, Subject subject, ShardId location, nlohmann::json detail) {
  observe(kind, subject, location, detail);
  recorder_.record(kind, subject, location, std::move(detail));
}

void Simulator::track(const TxRef& tx) {
  tracking_.emplace(value(tx->id), Tracking{tx, false, {}, {}});
  ++outstanding_;
}

// Termination bookkeeping: a transaction is settled once the sender shard
// has decided it and every shard that executed part of it (or received its
// coins) has listed an outcome.
void Simulator::observe(EventKind kind, Subject subject, ShardId location,
                        const nlohmann::json& detail) {
  if (!subject.is_tx()) return;
  auto it = tracking_.find(subject.a);
  if (it == tracking_.end()) return;
  auto& t = it->second;
  switch (kind) {
    case EventKind::Processed:
      // Every contract shard eventually lists an outcome, even one whose
      // call arrives after the decision.
      for (auto s : t.tx->contract_shards()) t.expected.insert(s);
      return;
    case EventKind::Executed:
      t.expected.insert(location);
      return;
    case EventKind::Committed:
      if (location == t.tx->sender_shard && t.tx->kind == TxKind::CrossShardTransfer &&
          detail.value("side", std::string{}) != "recipient") {
        t.expected.insert(t.tx->recipient_shard);
      }
      [[fallthrough]];
    case EventKind::Aborted:
      t.resolved.insert(location);
      if (location == t.tx->sender_shard) t.sender_done = true;
      break;
    default:
      return;
  }
  if (!t.sender_done) return;
  if (!std::includes(t.resolved.begin(), t.resolved.end(), t.expected.begin(), t.expected.end())) {
    return;
  }
  tracking_.erase(it);
  --outstanding_;
}

void Simulator::on(SubmitEv& e) {
  record(EventKind::Submitted, Subject::tx(e.tx->id), e.tx->sender_shard, tx_detail(*e.tx));
  track(e.tx);
  mempool_[value(e.tx->sender_shard)].push_back(e.tx);
}

void Simulator::on(ProposeEv& e) {
  const ShardId s = e.shard;
  proposal_pending_.erase(value(s));
  const bool beacon = s == kBeaconShard;
  const Time interval = beacon ? scenario_.beacon_interval : scenario_.shard(s).block_interval;
  if (!beacon) {
    const auto& halt = scenario_.shard(s).halt_at;
    if (halt && now_ >= *halt) return;
  }
  if (!keep_going(now_)) return;
  last_proposal_[value(s)] = now_;

  FinalizeEv fin;
  fin.shard = s;
  fin.ts = now_;
  fin.inbox = std::move(inbox_[value(s)]);
  inbox_[value(s)].clear();
  if (!beacon) {
    auto& pool = mempool_[value(s)];
    const std::size_t n = std::min(pool.size(), scenario_.capacity(s));
    fin.txs.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
    pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
  }

  if (!beacon && adversary_.active()) {
    for (const auto& tx : fin.txs) {
      auto plan = adversary_.observe_and_inject(s, tx, now_);
      if (!plan) continue;
      record(EventKind::AdversaryObserved, Subject::tx(tx->id), s,
             {{"observer", plan->observer},
              {"contract", tx->entry->contract},
              {"inject_at", plan->inject_at}});
      ++pending_injections_;
      const Time at = plan->inject_at;
      push(at, InjectEv{std::move(*plan)});
    }
  }

  const Time lead = beacon ? 0 : scenario_.observation_lead(s);
  push(now_ + lead, std::move(fin));
  if (driver_->self_paced() || beacon) push(now_ + interval, ProposeEv{s});
}

void Simulator::on(FinalizeEv& e) {
  auto& sh = *engines_.at(value(e.shard));
  sh.begin_block(e.ts);
  driver_->on_block(sh, e.inbox, e.txs);
  auto result = sh.seal_block();
  for (const auto& tx : result.outgoing_credits) {
    send(e.shard, tx->recipient_shard, CreditMsg{tx}, jitter(*tx), 0);
  }
  driver_->on_sealed(sh, result);
}

void Simulator::on(DeliverEv& e) {
  if (driver_->on_arrival(e.to, e.msg)) return;
  inbox_[value(e.to)].push_back(std::move(e.msg));
}

void Simulator::on(InjectEv& e) {
  --pending_injections_;
  auto& plan = e.plan;
  TxSpec spec = plan.attack;
  spec.submit_time = now_;
  spec.victim = plan.victim->id;
  auto tx = factory_.make(std::move(spec));
  record(EventKind::AdversaryInjected, Subject::tx(tx->id), plan.submit_to,
         {{"victim", value(plan.victim->id)},
          {"observed_at", plan.observed_at},
          {"observed_on", value(plan.observed_on)},
          {"contract", plan.victim->entry->contract},
          {"model", to_string(scenario_.adversary.model)},
          {"observer", plan.observer}});
  record(EventKind::Submitted, Subject::tx(tx->id), tx->sender_shard, tx_detail(*tx));
  track(tx);
  mempool_[value(plan.submit_to)].push_back(tx);
}

Trace run_simulation(const Scenario& scenario) {
  Simulator sim(scenario);
  return sim.run();
}

}  // namespace haechi
