#pragma once

#include "haechi/core/trace.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace haechi {

enum class ViolationKind : std::uint8_t {
  FairnessInversion,
  SafetyDivergence,
  AtomicityBreak,
  LivenessStall,
  Lemma1Breach,
  Lemma2Breach,
  GapInOrderedHeights,
};

const char* to_string(ViolationKind k);

struct Violation {
  ViolationKind kind = ViolationKind::FairnessInversion;
  std::string message;
  std::vector<std::uint64_t> evidence;  // trace sequence numbers
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const;
};

enum class ProcessingOrder : std::uint8_t { Before, After, Incomparable };

const char* to_string(ProcessingOrder o);

/// Where a transaction sits in its shard's chain.
struct ProcessedAt {
  ShardId shard{};
  Height height = 0;
  Time block_ts = 0;
  std::uint64_t index = 0;
  std::uint64_t seq = 0;
};

/// Same block: index. Same shard: height. Different shards: strictly
/// smaller block timestamp; equal timestamps are incomparable.
ProcessingOrder processing_order(const ProcessedAt& a, const ProcessedAt& b);
/// Throws std::invalid_argument when either transaction was never processed.
ProcessingOrder processing_order(const Trace& trace, TxId a, TxId b);

struct AuditStats {
  std::size_t pairs_checked = 0;
  std::size_t cycles_checked = 0;
  std::size_t txs_checked = 0;
  std::map<std::uint32_t, std::string> shard_digests;  // FNV-1a of each shard's commit sequence
};

/// Every pair executed on a shared contract must execute in processing
/// order there. `contract` restricts the check to one contract.
std::vector<Violation> check_finalization_fairness(const Trace& trace,
                                                   const std::optional<std::string>& contract = {},
                                                   AuditStats* stats = nullptr);

/// Outcome agreement across shards and matching relative commit order on
/// shards that executed both transactions.
std::vector<Violation> check_safety(const Trace& trace, AuditStats* stats = nullptr);

/// Every transaction submitted at or before `horizon` must be settled by the
/// end of the trace.
std::vector<Violation> check_liveness(const Trace& trace, std::optional<Time> horizon = {},
                                      AuditStats* stats = nullptr);

/// Ordering-cycle checks: no in-flight CrossLink older than anything already
/// ordered, no inversions inside a cycle, gap-free heights per shard.
std::vector<Violation> check_lemmas(const Trace& trace, AuditStats* stats = nullptr);

struct AuditOptions {
  std::optional<std::string> contract;
  std::optional<Time> horizon;
};

struct AuditReport {
  std::vector<Violation> violations;
  std::vector<std::string> assumptions;
  AuditStats stats;

  bool clean() const { return violations.empty(); }
  std::size_t count(ViolationKind k) const;
  nlohmann::json to_json() const;
};

AuditReport run_audit(const Trace& trace, const AuditOptions& options = {});

}  // namespace haechi
