#pragma once

#include "haechi/core/trace.hpp"
#include "haechi/sim/scenario.hpp"
#include "haechi/sim/workload.hpp"

#include <random>
#include <set>
#include <vector>

namespace haechi {

/// A pending front-running attempt: the victim was seen in a proposed
/// block and the attack transaction is submitted at `inject_at`.
struct AttackPlan {
  TxRef victim;
  ShardId observed_on{};
  Time observed_at = 0;
  Time inject_at = 0;
  std::uint32_t observer = 0;
  ShardId submit_to{};
  TxSpec attack;
};

class Adversary {
 public:
  Adversary(const Scenario& s, const World& w);

  bool active() const { return spec_.model != AdversaryModel::None; }

  /// Looks at the client transactions of a block proposed on `shard` before
  /// it is finalized. At most one attack per victim.
  std::vector<AttackPlan> observe(ShardId shard, Time now, const std::vector<TxRef>& block);

  /// Single-transaction form: nullopt when the transaction is not an
  /// eligible victim, was attacked already, or no observer noticed it.
  std::optional<AttackPlan> observe_and_inject(ShardId shard, const TxRef& tx, Time now);

 private:
  bool watches(ShardId s) const;

  AdversarySpec spec_;
  const World& world_;
  std::mt19937_64 rng_;
  std::set<std::uint64_t> attacked_;
};

enum class AttackOutcome : std::uint8_t { FrontRan, Failed };

struct AttackRecord {
  TxId victim{};
  TxId attack{};
  ContractId contract;
  Time observed_at = 0;
  Time injected_at = 0;
  AttackOutcome outcome = AttackOutcome::Failed;
};

/// FrontRan iff both transactions executed on the contract and the attack's
/// Executed event comes first.
std::vector<AttackRecord> attack_records(const Trace& trace);
/// Throws std::invalid_argument on an empty record set.
double attack_success_rate(const std::vector<AttackRecord>& records);

}  // namespace haechi
