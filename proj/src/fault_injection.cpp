#include "axmem/fault_injection.hpp"

#include <algorithm>
#include <cmath>

#include "axmem/errors.hpp"

namespace axmem {

namespace {

// Geometric gap sampling: index of the next success at probability p,
// starting from `from`. One uniform draw skips past all intermediate
// failures, which keeps low-BER masks cheap.
uint64_t next_flip(uint64_t from, double p, InjectorRng& rng) {
  if (p >= 1.0) return from;
  double u = rng.next_unit();
  // u == 0 would send log(1-u)=0 -> gap 0; fine.
  double gap = std::floor(std::log1p(-u) / std::log1p(-p));
  if (gap > 1e18) return UINT64_MAX;
  return from + static_cast<uint64_t>(gap);
}

} // namespace

uint64_t gen_flip_mask(int width_bits, double ber, InjectorRng& rng) {
  if (width_bits < 1 || width_bits > 64)
    throw DomainError("flip mask width must be in [1,64]");
  if (!(ber >= 0.0 && ber <= 1.0)) throw DomainError("bit error rate must be in [0,1]");
  if (ber == 0.0) return 0;
  uint64_t mask = 0;
  if (ber >= 1.0) {
    mask = ~uint64_t{0};
  } else {
    for (uint64_t bit = next_flip(0, ber, rng); bit < static_cast<uint64_t>(width_bits);
         bit = next_flip(bit + 1, ber, rng)) {
      mask |= uint64_t{1} << bit;
    }
  }
  if (width_bits < 64) mask &= (uint64_t{1} << width_bits) - 1;
  return mask;
}

void gen_flip_mask_bytes(std::span<uint8_t> mask, double ber, InjectorRng& rng) {
  if (!(ber >= 0.0 && ber <= 1.0)) throw DomainError("bit error rate must be in [0,1]");
  if (ber == 0.0 || mask.empty()) return;
  uint64_t total = mask.size() * 8;
  if (ber >= 1.0) {
    std::fill(mask.begin(), mask.end(), uint8_t{0xff});
    return;
  }
  for (uint64_t bit = next_flip(0, ber, rng); bit < total; bit = next_flip(bit + 1, ber, rng)) {
    mask[bit / 8] |= static_cast<uint8_t>(1u << (bit % 8));
  }
}

uint64_t apply_mask(uint64_t data, uint64_t mask, int width_bits) {
  if (width_bits < 1 || width_bits > 64) throw DomainError("mask width must be in [1,64]");
  if (width_bits < 64) {
    uint64_t limit = (uint64_t{1} << width_bits) - 1;
    if (data > limit || mask > limit) throw DomainError("operand wider than stated mask width");
  }
  return data ^ mask;
}

DramFaultMap::DramFaultMap(uint64_t region_bits, const ErrorPowerTables& tables, uint64_t seed)
    : region_bits_(region_bits) {
  if (region_bits == 0) throw DomainError("dram fault map needs a non-empty region");
  period_values_ = tables.full_dram_periods();
  period_rates_.reserve(period_values_.size());
  for (double t : period_values_) period_rates_.push_back(tables.dram_error_rate_seconds(t));
  max_rate_ = period_rates_.empty() ? 0.0 : period_rates_.back();

  InjectorRng rng(seed);
  if (max_rate_ <= 0.0) return;
  for (uint64_t bit = next_flip(0, max_rate_, rng); bit < region_bits;
       bit = next_flip(bit + 1, max_rate_, rng)) {
    // Conditional on being weak at the longest period, the variate is
    // uniform in [0, max_rate); thresholding it against shorter-period
    // rates yields the nested fail sets.
    cells_.push_back(WeakCell{bit, rng.next_unit() * max_rate_});
  }
}

double DramFaultMap::rate_for(double period_seconds) const {
  for (size_t i = 0; i < period_values_.size(); ++i) {
    if (std::abs(period_values_[i] - period_seconds) < 1e-9) return period_rates_[i];
  }
  throw DomainError("refresh period not in fault map table: " + std::to_string(period_seconds));
}

std::vector<uint64_t> DramFaultMap::failing_bits(double period_seconds, uint64_t first_bit,
                                                 uint64_t last_bit) const {
  if (first_bit > last_bit || last_bit > region_bits_)
    throw DomainError("bit range outside approximate region");
  double rate = rate_for(period_seconds);
  std::vector<uint64_t> out;
  auto lo = std::lower_bound(cells_.begin(), cells_.end(), first_bit,
                             [](const WeakCell& c, uint64_t b) { return c.bit < b; });
  for (auto it = lo; it != cells_.end() && it->bit < last_bit; ++it) {
    if (it->variate < rate) out.push_back(it->bit);
  }
  return out;
}

uint64_t DramFaultMap::fail_count(double period_seconds) const {
  double rate = rate_for(period_seconds);
  uint64_t n = 0;
  for (const auto& c : cells_)
    if (c.variate < rate) ++n;
  return n;
}

DramFaultMap build_dram_map(uint64_t region_bits, const ErrorPowerTables& tables, uint64_t seed) {
  return DramFaultMap(region_bits, tables, seed);
}

} // namespace axmem
