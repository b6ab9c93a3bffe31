#include "haechi/protocols/driver.hpp"

#include <algorithm>

namespace haechi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const char* receipt_name(BeaconState::Receipt r) {
  switch (r) {
    case BeaconState::Receipt::Appended: return "appended";
    case BeaconState::Receipt::Pooled: return "pooled";
    case BeaconState::Receipt::Duplicate: return "duplicate";
  }
  return "?";
}

class HaechiDriver final : public ProtocolDriver {
 public:
  HaechiDriver(SimContext& ctx, bool lock_step)
      : ctx_(ctx), lock_step_(lock_step), beacon_(ctx.scenario().shard_count()) {}

  bool self_paced() const override { return !lock_step_; }

  void on_block(ShardEngine& sh, std::vector<Message>& inbox,
                const std::vector<TxRef>& txs) override {
    for (auto& msg : inbox) {
      std::visit(overloaded{
                     [&](CclMsg& m) { sh.enqueue_ccl(m.entries); },
                     [&](ExecMsg& m) {
                       if (auto d = sh.on_execution_message(m.msg)) {
                         for (auto s : sh.settle_decision(m.tx, *d)) {
                           ctx_.send(sh.id(), s, DecisionMsg{m.tx, d->decision});
                         }
                       }
                     },
                     [&](DecisionMsg& m) { sh.apply_contract_decision(m.tx->id, m.outcome); },
                     [&](CreditMsg& m) { sh.apply_credit(m.tx); },
                     [&](auto&) {
                       throw std::logic_error("unexpected message in an ordering-protocol block");
                     },
                 },
                 msg);
    }
    for (auto& out : sh.run_exec_queue()) {
      ctx_.send(sh.id(), out.tx->sender_shard, ExecMsg{out.tx, std::move(out.message)});
    }
    for (const auto& tx : txs) sh.admit(tx);
  }

  void on_sealed(ShardEngine& sh, const BlockResult& r) override {
    const auto& cl = r.crosslink;
    auto ids = nlohmann::json::array();
    Time extra = 0;
    for (const auto& tx : cl.tx_list) {
      ids.push_back(value(tx->id));
      extra = std::max(extra, ctx_.jitter(*tx));
    }
    ctx_.sink().record(EventKind::CrossLinkSent, Subject::crosslink(cl.shard, cl.height), sh.id(),
                       {{"block_ts", cl.block_ts}, {"height", cl.height}, {"txs", ids}, {"to", 0}});
    ctx_.send(sh.id(), kBeaconShard, CrossLinkMsg{cl}, extra);
  }

  bool on_arrival(ShardId to, Message& msg) override {
    if (auto* rel = std::get_if<SyncReleaseMsg>(&msg)) {
      (void)rel;
      ctx_.schedule_proposal(to);
      return true;
    }
    auto* clm = std::get_if<CrossLinkMsg>(&msg);
    if (!clm || to != kBeaconShard) return false;

    const auto& cl = clm->cl;
    const auto subject = Subject::crosslink(cl.shard, cl.height);
    const auto block_ts = cl.block_ts;
    const auto height = cl.height;
    const auto receipt = beacon_.on_crosslink(clm->cl);
    ctx_.sink().record(EventKind::CrossLinkReceived, subject, kBeaconShard,
                       {{"block_ts", block_ts}, {"height", height}, {"receipt", receipt_name(receipt)}});
    while (auto cycle = lock_step_ ? beacon_.try_sync_cycle() : beacon_.try_order_cycle()) {
      emit(*cycle);
    }
    return true;
  }

 private:
  void emit(const CCLs& c) {
    std::map<std::pair<std::uint32_t, Height>, Time> cl_ts;
    auto cls = nlohmann::json::array();
    for (const auto& ref : c.crosslinks) {
      cl_ts[{value(ref.shard), ref.height}] = ref.block_ts;
      cls.push_back({{"shard", value(ref.shard)},
                     {"height", ref.height},
                     {"block_ts", ref.block_ts},
                     {"txs", ref.tx_count}});
    }
    auto order = nlohmann::json::array();
    for (const auto& e : c.merged) {
      order.push_back({{"tx", value(e.tx->id)},
                       {"shard", value(e.cl_shard)},
                       {"height", e.cl_height},
                       {"block_ts", cl_ts.at({value(e.cl_shard), e.cl_height})},
                       {"key_ts", e.key_ts},
                       {"index", e.index}});
    }
    auto lists = nlohmann::json::object();
    for (const auto& [s, list] : c.lists) {
      auto ids = nlohmann::json::array();
      for (const auto& e : list) ids.push_back(value(e.tx->id));
      lists[std::to_string(value(s))] = ids;
    }
    auto& sink = ctx_.sink();
    sink.record(EventKind::Ordered, Subject::cycle(c.cycle), kBeaconShard,
                {{"cycle", c.cycle},
                 {"end_ts", c.end_ts},
                 {"crosslinks", cls},
                 {"order", order},
                 {"ccls", lists}});
    for (std::size_t i = 0; i < c.merged.size(); ++i) {
      sink.record(EventKind::Ordered, Subject::tx(c.merged[i].tx->id), kBeaconShard,
                  {{"cycle", c.cycle}, {"position", i}});
    }

    const Time hold = ctx_.scenario().beacon_interval;
    for (const auto& [s, list] : c.lists) {
      ctx_.send(kBeaconShard, s, CclMsg{c.cycle, list}, 0, hold);
    }
    if (lock_step_) {
      const Height h = c.crosslinks.front().height;
      for (std::uint32_t s = 1; s <= beacon_.shard_count(); ++s) {
        ctx_.send(kBeaconShard, shard_id(s), SyncReleaseMsg{h}, 0, hold);
      }
    }
  }

  SimContext& ctx_;
  bool lock_step_;
  BeaconState beacon_;
};

}  // namespace

std::unique_ptr<ProtocolDriver> make_haechi_driver(SimContext& ctx, bool lock_step) {
  return std::make_unique<HaechiDriver>(ctx, lock_step);
}

}  // namespace haechi
