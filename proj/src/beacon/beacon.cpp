#include "haechi/beacon/beacon.hpp"

#include <algorithm>

namespace haechi {

OrderKey order_key(const CclEntry& e) {
  return {e.key_ts, value(e.cl_shard), e.cl_height, e.index};
}

BeaconState::BeaconState(std::uint32_t shard_count) : m_(shard_count), slots_(shard_count) {
  if (shard_count == 0) throw ConfigError("beacon needs at least one shard");
}

BeaconState::Slot& BeaconState::slot(ShardId s) {
  if (value(s) == 0 || value(s) > m_) {
    throw ProtocolViolation("CrossLink from unknown shard " + std::to_string(value(s)));
  }
  return slots_[value(s) - 1];
}

const BeaconState::Slot& BeaconState::slot(ShardId s) const {
  return const_cast<BeaconState*>(this)->slot(s);
}

std::size_t BeaconState::pool_size() const {
  std::size_t n = 0;
  for (const auto& sl : slots_) n += sl.pool.size();
  return n;
}

std::optional<Time> BeaconState::first_ts(TxId tx) const {
  auto it = first_ts_.find(value(tx));
  if (it == first_ts_.end()) return std::nullopt;
  return it->second;
}

BeaconState::Receipt BeaconState::on_crosslink(CrossLink cl) {
  auto& sl = slot(cl.shard);
  if (cl.height == 0) throw ProtocolViolation("CrossLink with height 0");
  if (cl.height <= sl.rear || sl.pool.count(cl.height)) return Receipt::Duplicate;

  for (const auto& tx : cl.tx_list) {
    auto [it, fresh] = first_ts_.emplace(value(tx->id), cl.block_ts);
    if (!fresh) it->second = std::min(it->second, cl.block_ts);
  }

  if (cl.height != sl.rear + 1) {
    sl.pool.emplace(cl.height, std::move(cl));
    return Receipt::Pooled;
  }
  sl.rear = cl.height;
  sl.last_ts = cl.block_ts;
  sl.cls.push_back(std::move(cl));
  for (auto it = sl.pool.find(sl.rear + 1); it != sl.pool.end(); it = sl.pool.find(sl.rear + 1)) {
    sl.rear = it->first;
    sl.last_ts = it->second.block_ts;
    sl.cls.push_back(std::move(it->second));
    sl.pool.erase(it);
  }
  return Receipt::Appended;
}

std::optional<CCLs> BeaconState::try_order_cycle() {
  for (const auto& sl : slots_) {
    if (sl.cls.empty()) return std::nullopt;
  }
  Time end_ts = *slots_.front().last_ts;
  for (const auto& sl : slots_) end_ts = std::min(end_ts, *sl.last_ts);

  std::vector<CrossLink> selected;
  for (auto& sl : slots_) {
    while (!sl.cls.empty() && sl.cls.front().block_ts <= end_ts) {
      sl.last_ordered = sl.cls.front().height;
      selected.push_back(std::move(sl.cls.front()));
      sl.cls.pop_front();
    }
  }
  return build(std::move(selected), end_ts);
}

std::optional<CCLs> BeaconState::try_sync_cycle() {
  const Height next = slots_.front().last_ordered + 1;
  for (const auto& sl : slots_) {
    if (sl.last_ordered + 1 != next || sl.cls.empty()) return std::nullopt;
  }
  std::vector<CrossLink> selected;
  Time end_ts = 0;
  for (auto& sl : slots_) {
    end_ts = std::max(end_ts, sl.cls.front().block_ts);
    sl.last_ordered = next;
    selected.push_back(std::move(sl.cls.front()));
    sl.cls.pop_front();
  }
  return build(std::move(selected), end_ts);
}

CCLs BeaconState::build(std::vector<CrossLink> selected, Time end_ts) {
  CCLs out;
  out.cycle = ++cycles_;
  out.end_ts = end_ts;
  for (const auto& cl : selected) {
    out.crosslinks.push_back({cl.shard, cl.height, cl.block_ts, cl.tx_list.size()});
    for (std::uint32_t i = 0; i < cl.tx_list.size(); ++i) {
      const auto& tx = cl.tx_list[i];
      out.merged.push_back({tx, cl.shard, cl.height, i, first_ts_.at(value(tx->id))});
    }
  }
  std::sort(out.merged.begin(), out.merged.end(),
            [](const CclEntry& a, const CclEntry& b) { return order_key(a) < order_key(b); });
  for (const auto& e : out.merged) {
    for (auto s : e.tx->contract_shards()) out.lists[s].push_back(e);
  }
  return out;
}

}  // namespace haechi
