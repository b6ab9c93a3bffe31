#pragma once

#include "haechi/core/trace.hpp"
#include "haechi/protocols/driver.hpp"
#include "haechi/sim/adversary.hpp"
#include "haechi/sim/scenario.hpp"
#include "haechi/sim/workload.hpp"

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <unordered_map>
#include <variant>
#include <vector>

namespace haechi {

/// Discrete-event run of one scenario. Time only advances through the
/// event queue; ties are broken by scheduling order, so a run is a pure
/// function of the scenario.
class Simulator final : private SimContext, private EventSink {
 public:
  using DriverFactory = std::function<std::unique_ptr<ProtocolDriver>(SimContext&)>;

  /// Validates the scenario and builds the initial world.
  explicit Simulator(Scenario scenario);
  /// Runs a custom driver instead of the scenario's protocol (test doubles).
  Simulator(Scenario scenario, DriverFactory factory);
  ~Simulator() override;

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const Trace& run();

  const Trace& trace() const { return recorder_.trace(); }
  const Scenario& config() const { return scenario_; }
  const World& world() const { return world_; }
  const ShardEngine& engine(ShardId s) const { return *engines_.at(value(s)); }
  /// Transactions submitted but not yet settled everywhere they ran.
  std::size_t outstanding() const { return outstanding_ + pending_injections_; }
  Time clock() const { return now_; }

 private:
  struct SubmitEv {
    TxRef tx;
  };
  struct ProposeEv {
    ShardId shard{};
  };
  struct FinalizeEv {
    ShardId shard{};
    Time ts = 0;
    std::vector<Message> inbox;
    std::vector<TxRef> txs;
  };
  struct DeliverEv {
    ShardId to{};
    Message msg;
  };
  struct InjectEv {
    AttackPlan plan;
  };
  using Body = std::variant<SubmitEv, ProposeEv, FinalizeEv, DeliverEv, InjectEv>;
  struct Event {
    Time time = 0;
    std::uint64_t seq = 0;
    Body body;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  struct Tracking {
    TxRef tx;
    bool sender_done = false;
    std::set<ShardId> expected;
    std::set<ShardId> resolved;
  };

  // SimContext
  Time now() const override { return now_; }
  const Scenario& scenario() const override { return scenario_; }
  ShardEngine& shard(ShardId s) override { return *engines_.at(value(s)); }
  EventSink& sink() override { return *this; }
  void send(ShardId from, ShardId to, Message m, Time extra, Time hold) override;
  Time jitter(const Transaction& tx) const override;
  void schedule_proposal(ShardId s) override;

  // EventSink
  void record(EventKind kind, Subject subject, ShardId location, nlohmann::json detail) override;

  void init(DriverFactory factory);
  void push(Time t, Body body);
  bool keep_going(Time t) const;
  void track(const TxRef& tx);
  void observe(EventKind kind, Subject subject, ShardId location, const nlohmann::json& detail);

  void on(SubmitEv& e);
  void on(ProposeEv& e);
  void on(FinalizeEv& e);
  void on(DeliverEv& e);
  void on(InjectEv& e);

  Scenario scenario_;
  World world_;
  TxFactory factory_;
  Adversary adversary_;
  TraceRecorder recorder_;
  std::unique_ptr<ProtocolDriver> driver_;
  std::map<std::uint32_t, std::unique_ptr<ShardEngine>> engines_;
  std::map<std::uint32_t, std::deque<TxRef>> mempool_;
  std::map<std::uint32_t, std::vector<Message>> inbox_;
  std::map<std::uint32_t, Time> last_proposal_;
  std::set<std::uint32_t> proposal_pending_;

  std::vector<Event> heap_;
  std::uint64_t next_seq_ = 0;
  Time now_ = 0;
  bool ran_ = false;

  std::unordered_map<std::uint64_t, Tracking> tracking_;
  std::size_t outstanding_ = 0;
  std::size_t pending_injections_ = 0;
};

/// Builds, runs and returns the trace of one scenario.
Trace run_simulation(const Scenario& scenario);

}  // namespace haechi
