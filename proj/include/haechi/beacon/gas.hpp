#pragma once

#include <cstdint>
#include <string>

namespace haechi {

enum class GasCase : std::uint8_t { Max, Avg, Min };

const char* to_string(GasCase c);

/// Gas charged for one comparison in the on-chain sort.
inline constexpr std::int64_t kGasPerComparison = 780;

/// Comparisons needed to order n CrossLinks: MAX n^2, AVG n*log2(n) (at
/// least 1), MIN n.
double ordering_comparisons(std::uint64_t n_crosslinks, GasCase c);

/// Per-transaction ordering overhead. MAX and MIN round to nearest, AVG
/// truncates. Throws std::invalid_argument on zero inputs.
std::int64_t estimate_ordering_gas(std::uint64_t n_crosslinks, std::uint64_t txs_per_crosslink,
                                   GasCase c);

}  // namespace haechi
