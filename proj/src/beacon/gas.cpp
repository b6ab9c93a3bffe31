#include "haechi/beacon/gas.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace haechi {

const char* to_string(GasCase c) {
  switch (c) {
    case GasCase::Max: return "MAX";
    case GasCase::Avg: return "AVG";
    case GasCase::Min: return "MIN";
  }
  return "?";
}

double ordering_comparisons(std::uint64_t n, GasCase c) {
  const auto nd = static_cast<double>(n);
  switch (c) {
    case GasCase::Max: return nd * nd;
    case GasCase::Avg: return std::max(1.0, nd * std::log2(nd));
    case GasCase::Min: return nd;
  }
  return 0;
}

std::int64_t estimate_ordering_gas(std::uint64_t n, std::uint64_t txs_per_cl, GasCase c) {
  if (n == 0) throw std::invalid_argument("n_crosslinks must be >= 1");
  if (txs_per_cl == 0) throw std::invalid_argument("txs_per_crosslink must be >= 1");
  const double per_tx = ordering_comparisons(n, c) * static_cast<double>(kGasPerComparison) /
                        (static_cast<double>(n) * static_cast<double>(txs_per_cl));
  // AVG truncates: 10000 CrossLinks x 100 txs must give 103, not 104.
  if (c == GasCase::Avg) return static_cast<std::int64_t>(std::floor(per_tx + 1e-9));
  return static_cast<std::int64_t>(std::floor(per_tx + 0.5));
}

}  // namespace haechi
