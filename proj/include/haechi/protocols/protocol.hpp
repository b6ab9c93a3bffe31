#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace haechi {

enum class ProtocolKind : std::uint8_t {
  Haechi,
  HaechiSync,
  TwoPhaseSender,
  TwoPhaseReference,
  Optimistic,
};

const char* to_string(ProtocolKind k);
/// Accepts snake_case names ("two_phase_sender") and the enum spelling.
std::optional<ProtocolKind> protocol_from_string(std::string_view s);
const std::vector<ProtocolKind>& all_protocols();

/// Protocols with a beacon ordering phase.
constexpr bool orders_globally(ProtocolKind k) {
  return k == ProtocolKind::Haechi || k == ProtocolKind::HaechiSync;
}

}  // namespace haechi
