#include "haechi/core/types.hpp"

#include <algorithm>

namespace haechi {

const char* to_string(TxKind k) {
  switch (k) {
    case TxKind::IntraShard: return "intra";
    case TxKind::CrossShardTransfer: return "xfer";
    case TxKind::OSC: return "osc";
  }
  return "?";
}

TxKind tx_kind_from_string(const std::string& s) {
  if (s == "intra" || s == "intra_shard") return TxKind::IntraShard;
  if (s == "xfer" || s == "cross_shard_transfer") return TxKind::CrossShardTransfer;
  if (s == "osc") return TxKind::OSC;
  throw ConfigError("unknown transaction kind '" + s + "'");
}

bool Transaction::cross_shard() const {
  if (kind != TxKind::IntraShard) return true;
  return std::any_of(sub_calls.begin(), sub_calls.end(),
                     [&](const ContractCall& c) { return c.shard != sender_shard; });
}

Amount Transaction::coin_cost() const {
  if (!entry) return amount;
  Amount total = entry->payload.kind == CallKind::Swap ? entry->payload.coins : 0;
  for (const auto& c : sub_calls) {
    if (c.payload.kind == CallKind::Swap) total += c.payload.coins;
  }
  return total;
}

std::set<ShardId> Transaction::contract_shards() const {
  std::set<ShardId> out;
  if (entry) out.insert(entry->shard);
  for (const auto& c : sub_calls) out.insert(c.shard);
  return out;
}

std::vector<ContractCall> Transaction::calls_on(ShardId shard) const {
  std::vector<ContractCall> out;
  if (entry && entry->shard == shard) out.push_back(*entry);
  for (const auto& c : sub_calls) {
    if (c.shard == shard) out.push_back(c);
  }
  return out;
}

void TxFactory::check_shard(ShardId s, const char* what) const {
  if (value(s) == 0 || value(s) > shard_count_) {
    throw ConfigError(std::string(what) + ": unknown shard id " + std::to_string(value(s)));
  }
}

void TxFactory::validate(const TxSpec& spec) const {
  check_shard(spec.sender_shard, "sender");
  if (spec.entry) check_shard(spec.entry->shard, "target contract");
  for (const auto& c : spec.sub_calls) check_shard(c.shard, "sub-call contract");
  if (!spec.sub_calls.empty() && !spec.entry) {
    throw ConfigError("sub-calls require an entry contract");
  }
  switch (spec.kind) {
    case TxKind::IntraShard:
      if (spec.entry && spec.entry->shard != spec.sender_shard) {
        throw ConfigError("intra-shard transaction must target a contract on its own shard");
      }
      if (!spec.entry) check_shard(spec.recipient_shard, "recipient");
      if (!spec.entry && spec.recipient_shard != spec.sender_shard) {
        throw ConfigError("intra-shard transfer must stay on the sender shard");
      }
      break;
    case TxKind::OSC:
      if (!spec.entry) throw ConfigError("OSC transaction must name an entry contract");
      if (spec.entry->shard == spec.sender_shard) {
        throw ConfigError("OSC transaction targets its own shard; use an intra-shard transaction");
      }
      break;
    case TxKind::CrossShardTransfer:
      if (spec.entry) throw ConfigError("cross-shard transfer cannot call a contract");
      check_shard(spec.recipient_shard, "recipient");
      if (spec.recipient_shard == spec.sender_shard) {
        throw ConfigError("cross-shard transfer must leave the sender shard");
      }
      break;
  }
  if (spec.amount < 0) throw ConfigError("negative transfer amount");
}

TxRef TxFactory::make(TxSpec spec) {
  while (used_.count(next_id_) != 0) ++next_id_;
  return make_with_id(TxId{next_id_}, std::move(spec));
}

TxRef TxFactory::make_with_id(TxId id, TxSpec spec) {
  if (value(id) == 0) throw ConfigError("txid 0 is reserved");
  if (used_.count(value(id)) != 0) {
    throw ConfigError("duplicate txid " + std::to_string(value(id)));
  }
  validate(spec);
  used_.insert(value(id));
  if (value(id) >= next_id_) next_id_ = value(id) + 1;

  auto tx = std::make_shared<Transaction>();
  tx->id = id;
  tx->kind = spec.kind;
  tx->sender = std::move(spec.sender);
  tx->sender_shard = spec.sender_shard;
  tx->entry = std::move(spec.entry);
  tx->sub_calls = std::move(spec.sub_calls);
  tx->recipient = std::move(spec.recipient);
  tx->recipient_shard = spec.recipient_shard;
  tx->amount = spec.amount;
  tx->submit_time = spec.submit_time;
  tx->label = std::move(spec.label);
  tx->victim = spec.victim;
  return tx;
}

}  // namespace haechi
