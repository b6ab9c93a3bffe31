#include "haechi/protocols/protocol.hpp"

#include "haechi/protocols/driver.hpp"

namespace haechi {

const char* to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::Haechi: return "haechi";
    case ProtocolKind::HaechiSync: return "haechi_sync";
    case ProtocolKind::TwoPhaseSender: return "two_phase_sender";
    case ProtocolKind::TwoPhaseReference: return "two_phase_reference";
    case ProtocolKind::Optimistic: return "optimistic";
  }
  return "?";
}

std::optional<ProtocolKind> protocol_from_string(std::string_view s) {
  for (auto k : all_protocols()) {
    if (s == to_string(k)) return k;
  }
  if (s == "Haechi") return ProtocolKind::Haechi;
  if (s == "HaechiSync" || s == "haechi-sync") return ProtocolKind::HaechiSync;
  if (s == "TwoPhaseSender" || s == "2p-sender") return ProtocolKind::TwoPhaseSender;
  if (s == "TwoPhaseReference" || s == "2p-reference") return ProtocolKind::TwoPhaseReference;
  if (s == "Optimistic") return ProtocolKind::Optimistic;
  return std::nullopt;
}

const std::vector<ProtocolKind>& all_protocols() {
  static const std::vector<ProtocolKind> kAll = {
      ProtocolKind::Haechi, ProtocolKind::HaechiSync, ProtocolKind::TwoPhaseSender,
      ProtocolKind::TwoPhaseReference, ProtocolKind::Optimistic};
  return kAll;
}

std::unique_ptr<ProtocolDriver> make_driver(ProtocolKind kind, SimContext& ctx) {
  switch (kind) {
    case ProtocolKind::Haechi: return make_haechi_driver(ctx, false);
    case ProtocolKind::HaechiSync: return make_haechi_driver(ctx, true);
    case ProtocolKind::TwoPhaseSender: return make_two_phase_driver(ctx, false);
    case ProtocolKind::TwoPhaseReference: return make_two_phase_driver(ctx, true);
    case ProtocolKind::Optimistic: return make_optimistic_driver(ctx);
  }
  throw std::logic_error("unknown protocol");
}

namespace {

nlohmann::json call_json(const ContractCall& c) {
  nlohmann::json j{{"contract", c.contract}, {"shard", value(c.shard)}};
  if (c.payload.kind == CallKind::Swap) {
    j["call"] = "swap";
    j["coins"] = c.payload.coins;
  } else {
    j["call"] = "transfer";
    j["to"] = c.payload.to;
    j["amount"] = c.payload.amount;
  }
  return j;
}

}  // namespace

nlohmann::json tx_detail(const Transaction& tx) {
  nlohmann::json j{{"kind", to_string(tx.kind)},
                   {"sender", tx.sender},
                   {"sender_shard", value(tx.sender_shard)},
                   {"cross", tx.cross_shard()}};
  if (tx.entry) {
    j["entry"] = call_json(*tx.entry);
    auto subs = nlohmann::json::array();
    for (const auto& c : tx.sub_calls) subs.push_back(call_json(c));
    j["sub_calls"] = subs;
  } else {
    j["recipient"] = tx.recipient;
    j["recipient_shard"] = value(tx.recipient_shard);
    j["amount"] = tx.amount;
  }
  if (!tx.label.empty()) j["label"] = tx.label;
  if (tx.victim) j["victim"] = value(*tx.victim);
  return j;
}

}  // namespace haechi
