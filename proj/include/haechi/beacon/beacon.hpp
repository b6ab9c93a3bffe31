#pragma once

#include "haechi/core/block.hpp"

#include <compare>
#include <deque>
#include <map>
#include <optional>
#include <vector>

namespace haechi {

/// Total order of ordered transactions: block timestamp, then (shard,
/// height) for equal timestamps, then position inside the CrossLink.
struct OrderKey {
  Time block_ts = 0;
  std::uint32_t shard = 0;
  Height height = 0;
  std::uint32_t index = 0;

  friend auto operator<=>(const OrderKey&, const OrderKey&) = default;
};

OrderKey order_key(const CclEntry& e);

class BeaconState {
 public:
  enum class Receipt : std::uint8_t { Appended, Pooled, Duplicate };

  explicit BeaconState(std::uint32_t shard_count);

  /// Appends a consecutive CrossLink (pulling now-consecutive successors out
  /// of the pool) or pools an early one. Already-seen heights are ignored.
  Receipt on_crosslink(CrossLink cl);

  /// At-least-one rule: fires only when every shard has an unordered
  /// consecutive CrossLink, then orders all of them with block_ts at or
  /// below the minimum of the shards' latest timestamps.
  std::optional<CCLs> try_order_cycle();

  /// Lock-step variant: fires when every shard's next height is available
  /// and orders exactly that one CrossLink per shard.
  std::optional<CCLs> try_sync_cycle();

  std::uint32_t shard_count() const { return m_; }
  const std::deque<CrossLink>& shard_cls(ShardId s) const { return slot(s).cls; }
  std::size_t pool_size(ShardId s) const { return slot(s).pool.size(); }
  std::size_t pool_size() const;
  std::optional<Time> shard_last_ts(ShardId s) const { return slot(s).last_ts; }
  Height last_ordered_height(ShardId s) const { return slot(s).last_ordered; }
  std::optional<Time> first_ts(TxId tx) const;
  std::uint64_t cycles() const { return cycles_; }

 private:
  struct Slot {
    std::deque<CrossLink> cls;
    std::map<Height, CrossLink> pool;
    std::optional<Time> last_ts;
    Height rear = 0;  // highest consecutive height received
    Height last_ordered = 0;
  };

  Slot& slot(ShardId s);
  const Slot& slot(ShardId s) const;
  CCLs build(std::vector<CrossLink> selected, Time end_ts);

  std::uint32_t m_;
  std::vector<Slot> slots_;
  std::map<std::uint64_t, Time> first_ts_;
  std::uint64_t cycles_ = 0;
};

}  // namespace haechi
