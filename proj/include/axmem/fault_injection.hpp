#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "axmem/knobs.hpp"
#include "axmem/rng.hpp"

namespace axmem {

/// Bit-flip mask of `width_bits` (1..64) bits, each set independently with
/// probability `ber`. Advances the generator.
uint64_t gen_flip_mask(int width_bits, double ber, InjectorRng& rng);

/// Same contract over an arbitrary-length byte buffer (used for whole cache
/// lines). ORs flips into `mask`.
void gen_flip_mask_bytes(std::span<uint8_t> mask, double ber, InjectorRng& rng);

/// Bitwise exclusive-or. `width_bits` guards against mixing widths: both
/// operands must fit in the stated width.
uint64_t apply_mask(uint64_t data, uint64_t mask, int width_bits = 64);

/// Persistent per-bit DRAM retention fault map for one simulation run.
///
/// Every bit position in the approximate region draws one uniform variate u;
/// the position fails at refresh period t iff u < error_rate(t). Since the
/// error rate grows with the period this makes the fail sets nested across
/// periods and the per-period fail probability match the table exactly.
class DramFaultMap {
public:
  DramFaultMap(uint64_t region_bits, const ErrorPowerTables& tables, uint64_t seed);

  uint64_t region_bits() const { return region_bits_; }

  /// Bit positions in [first_bit, last_bit) that fail at the given period.
  /// The range must lie within the region.
  std::vector<uint64_t> failing_bits(double period_seconds, uint64_t first_bit,
                                     uint64_t last_bit) const;

  /// Total failing positions at the given period (whole region).
  uint64_t fail_count(double period_seconds) const;

private:
  struct WeakCell {
    uint64_t bit;
    double variate; // fails at period t iff variate < error_rate(t)
  };

  uint64_t region_bits_ = 0;
  double max_rate_ = 0.0;
  std::vector<double> period_rates_; // known (period, rate) pairs, for validation
  std::vector<double> period_values_;
  std::vector<WeakCell> cells_; // sorted by bit position

  double rate_for(double period_seconds) const;
};

/// Convenience wrapper matching the map-construction contract.
DramFaultMap build_dram_map(uint64_t region_bits, const ErrorPowerTables& tables, uint64_t seed);

} // namespace axmem
