#include "haechi/core/block.hpp"

namespace haechi {

const char* to_string(CommitOutcome o) {
  return o == CommitOutcome::Commit ? "commit" : "abort";
}

CrossLink crosslink_of(const Block& block) {
  CrossLink cl;
  cl.block_ts = block.block_ts;
  cl.shard = block.shard;
  cl.height = block.height;
  cl.tx_list.reserve(block.pending_list.size());
  for (const auto& tx : block.pending_list) {
    if (tx && tx->is_otx()) cl.tx_list.push_back(tx);
  }
  cl.attestation = "qc:" + std::to_string(value(block.shard)) + "/" + std::to_string(block.height);
  return cl;
}

std::optional<Time> Chain::last_ts() const {
  if (blocks_.empty()) return std::nullopt;
  return blocks_.back().block_ts;
}

void Chain::append(Block block) {
  if (block.shard != shard_) {
    throw ProtocolViolation("block for shard " + std::to_string(value(block.shard)) +
                            " appended to chain of shard " + std::to_string(value(shard_)));
  }
  if (block.height != height() + 1) {
    throw ProtocolViolation("non-consecutive height " + std::to_string(block.height) +
                            " after " + std::to_string(height()));
  }
  if (!blocks_.empty() && block.block_ts <= blocks_.back().block_ts) {
    throw ProtocolViolation("block timestamp " + std::to_string(block.block_ts) +
                            " does not increase on shard " + std::to_string(value(shard_)));
  }
  for (const auto& [id, outcome] : block.committing_list) {
    (void)outcome;
    auto [it, fresh] = committed_at_.emplace(value(id), block.height);
    if (!fresh) {
      throw ProtocolViolation("tx " + std::to_string(value(id)) + " already committed at height " +
                              std::to_string(it->second));
    }
  }
  blocks_.push_back(std::move(block));
}

}  // namespace haechi
