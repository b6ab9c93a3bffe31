#pragma once

#include "haechi/core/types.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace haechi {

enum class CommitOutcome : std::uint8_t { Commit, Abort };

const char* to_string(CommitOutcome o);

struct Block {
  ShardId shard{};
  Height height = 0;
  Time block_ts = 0;
  std::vector<TxRef> pending_list;
  std::vector<std::pair<TxId, CommitOutcome>> committing_list;
};

/// <blockTS, L_tx, i, h> plus an opaque quorum attestation.
struct CrossLink {
  Time block_ts = 0;
  std::vector<TxRef> tx_list;
  ShardId shard{};
  Height height = 0;
  std::string attestation;
};

/// Projects a finalized block onto the CrossLink sent to the beacon chain.
/// Empty pending lists still yield a CrossLink so heights stay consecutive.
CrossLink crosslink_of(const Block& block);

/// One shard's finalized chain: heights 1,2,3,... with strictly increasing
/// timestamps, and a txid committed at most once.
class Chain {
 public:
  explicit Chain(ShardId shard) : shard_(shard) {}

  void append(Block block);

  ShardId shard() const { return shard_; }
  Height height() const { return static_cast<Height>(blocks_.size()); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& at(Height h) const { return blocks_.at(h - 1); }
  std::optional<Time> last_ts() const;

 private:
  ShardId shard_;
  std::vector<Block> blocks_;
  std::map<std::uint64_t, Height> committed_at_;
};

struct CclEntry {
  TxRef tx;
  ShardId cl_shard{};
  Height cl_height = 0;
  std::uint32_t index = 0;  // position inside the carrying CrossLink
  Time key_ts = 0;          // block_ts used for ordering (first-seen for multi-shard txs)
};

struct CrossLinkRef {
  ShardId shard{};
  Height height = 0;
  Time block_ts = 0;
  std::size_t tx_count = 0;
};

/// Per-contract-shard call lists produced by one ordering cycle. `merged`
/// is the cycle's total order; `lists[s]` is its restriction to shard s.
struct CCLs {
  std::uint64_t cycle = 0;
  Time end_ts = 0;
  std::vector<CclEntry> merged;
  std::map<ShardId, std::vector<CclEntry>> lists;
  std::vector<CrossLinkRef> crosslinks;
};

}  // namespace haechi
