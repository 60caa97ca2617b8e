#include "axmem/memory_sim.hpp"

#include <bit>
#include <cstring>

#include "axmem/errors.hpp"

namespace axmem {

namespace {

void check_cache_config(const CacheConfig& c, const char* name) {
  if (c.associativity < 1) throw DomainError(std::string(name) + ": associativity must be >= 1");
  if (c.line_bytes == 0 || (c.line_bytes & (c.line_bytes - 1)) != 0)
    throw DomainError(std::string(name) + ": line size must be a power of two");
  if (c.size_bytes == 0 || c.size_bytes % (c.associativity * c.line_bytes) != 0)
    throw DomainError(std::string(name) + ": size must divide into associativity * line size");
}

} // namespace

AccessStats AccessStats::operator-(const AccessStats& rhs) const {
  AccessStats d = *this;
  auto sub_level = [](Level& a, const Level& b) {
    a.reads -= b.reads;
    a.writes -= b.writes;
    a.read_hits -= b.read_hits;
    a.read_misses -= b.read_misses;
    a.write_hits -= b.write_hits;
    a.write_misses -= b.write_misses;
  };
  sub_level(d.l1, rhs.l1);
  sub_level(d.l2, rhs.l2);
  d.dram_fetches -= rhs.dram_fetches;
  d.dram_writebacks -= rhs.dram_writebacks;
  d.l1_read_inject_events -= rhs.l1_read_inject_events;
  d.l1_read_flipped_bits -= rhs.l1_read_flipped_bits;
  d.l1_write_inject_events -= rhs.l1_write_inject_events;
  d.l1_write_flipped_bits -= rhs.l1_write_flipped_bits;
  d.l2_read_inject_events -= rhs.l2_read_inject_events;
  d.l2_read_flipped_bits -= rhs.l2_read_flipped_bits;
  d.l2_write_inject_events -= rhs.l2_write_inject_events;
  d.l2_write_flipped_bits -= rhs.l2_write_flipped_bits;
  d.dram_corrupt_events -= rhs.dram_corrupt_events;
  d.dram_corrupt_bits -= rhs.dram_corrupt_bits;
  return d;
}

int Hierarchy::Cache::find(uint64_t line_addr) const {
  uint64_t set = line_addr % n_sets;
  uint64_t tag = line_addr / n_sets;
  for (uint32_t w = 0; w < n_ways; ++w) {
    const Way& way = ways[set * n_ways + w];
    if (way.valid && way.tag == tag) return static_cast<int>(set * n_ways + w);
  }
  return -1;
}

int Hierarchy::Cache::victim(uint64_t line_addr) const {
  uint64_t set = line_addr % n_sets;
  int slot = static_cast<int>(set * n_ways);
  uint64_t best = UINT64_MAX;
  for (uint32_t w = 0; w < n_ways; ++w) {
    const Way& way = ways[set * n_ways + w];
    if (!way.valid) return static_cast<int>(set * n_ways + w);
    if (way.lru < best) {
      best = way.lru;
      slot = static_cast<int>(set * n_ways + w);
    }
  }
  return slot;
}

uint8_t* Hierarchy::Cache::line_data(int slot) {
  return data.data() + static_cast<size_t>(slot) * line_bytes;
}

void Hierarchy::Cache::touch(int slot) { ways[static_cast<size_t>(slot)].lru = ++tick; }

Hierarchy::Hierarchy(CacheConfig l1, CacheConfig l2, uint64_t dram_bytes, ApproxRegion region,
                     const ErrorPowerTables& tables, KnobConfig initial_knobs,
                     uint64_t fault_seed)
    : line_bytes_(l1.line_bytes),
      dram_(dram_bytes, 0),
      region_(region),
      tables_(tables),
      knobs_(initial_knobs),
      rng_(InjectorRng(fault_seed).fork(1)),
      fault_map_(region.end > region.start ? (region.end - region.start) * 8 : 8, tables,
                 InjectorRng(fault_seed).fork(2).next_u64()) {
  check_cache_config(l1, "l1");
  check_cache_config(l2, "l2");
  if (l1.line_bytes != l2.line_bytes) throw DomainError("l1/l2 line sizes must match");
  if (dram_bytes == 0 || dram_bytes % line_bytes_ != 0)
    throw DomainError("dram size must be a positive multiple of the line size");
  if (region.start >= region.end) throw DomainError("approximate region must be non-empty");
  if (region.end > dram_bytes) throw DomainError("approximate region outside modeled dram");
  if (region.start % line_bytes_ != 0 || region.end % line_bytes_ != 0)
    throw DomainError("approximate region must be line-aligned");
  if ((region.end - region.start) * 4 > dram_bytes * 3)
    throw DomainError("approximate region may cover at most 3/4 of dram");

  auto init_cache = [&](Cache& c, const CacheConfig& cfg) {
    c.n_sets = cfg.size_bytes / (cfg.associativity * cfg.line_bytes);
    c.n_ways = cfg.associativity;
    c.line_bytes = cfg.line_bytes;
    c.ways.assign(static_cast<size_t>(c.n_sets) * c.n_ways, Way{});
    c.data.assign(static_cast<size_t>(c.n_sets) * c.n_ways * cfg.line_bytes, 0);
  };
  init_cache(l1_, l1);
  init_cache(l2_, l2);
  set_knobs(initial_knobs);
}

bool Hierarchy::is_approx(uint64_t addr) const {
  if (addr >= dram_.size()) throw DomainError("address outside modeled memory");
  return addr >= region_.start && addr < region_.end;
}

bool Hierarchy::line_is_approx(uint64_t line_addr) const {
  uint64_t byte = line_addr * line_bytes_;
  return byte >= region_.start && byte < region_.end;
}

bool Hierarchy::sram_injection_on(const VddLevel& level) const {
  // The exact (nominal) voltage means approximation is disabled for the
  // level, regardless of the table's residual error rate.
  return level.volts < tables_.nominal_volts();
}

void Hierarchy::check_access(uint64_t addr, int width_bytes) const {
  if (width_bytes != 1 && width_bytes != 2 && width_bytes != 4 && width_bytes != 8)
    throw DomainError("access width must be 1, 2, 4 or 8 bytes");
  if (addr % static_cast<uint64_t>(width_bytes) != 0) throw DomainError("misaligned access");
  if (addr + static_cast<uint64_t>(width_bytes) > dram_.size())
    throw DomainError("access outside modeled memory");
}

void Hierarchy::apply_line_mask(uint8_t* bytes, double ber, uint64_t& events, uint64_t& bits) {
  std::vector<uint8_t> mask(line_bytes_, 0);
  gen_flip_mask_bytes(mask, ber, rng_);
  ++events;
  for (uint32_t i = 0; i < line_bytes_; ++i) {
    if (mask[i]) {
      bits += std::popcount(static_cast<unsigned>(mask[i]));
      bytes[i] ^= mask[i];
    }
  }
}

void Hierarchy::apply_dram_decay(uint64_t line_addr, uint8_t* bytes) {
  uint64_t byte = line_addr * line_bytes_;
  uint64_t first_bit = (byte - region_.start) * 8;
  auto flips = fault_map_.failing_bits(knobs_.dram.seconds, first_bit, first_bit + line_bytes_ * 8);
  ++stats_.dram_corrupt_events;
  for (uint64_t bit : flips) {
    uint64_t local = bit - first_bit;
    bytes[local / 8] ^= static_cast<uint8_t>(1u << (local % 8));
    ++stats_.dram_corrupt_bits;
  }
}

void Hierarchy::fetch_line_from_dram(uint64_t line_addr, uint8_t* out) {
  std::memcpy(out, dram_.data() + line_addr * line_bytes_, line_bytes_);
  ++stats_.dram_fetches;
  // Retention decay materializes on the fetched copy at the current period;
  // the backing store keeps what was stored.
  if (line_is_approx(line_addr)) apply_dram_decay(line_addr, out);
}

void Hierarchy::evict_l2_slot(int slot, uint64_t set_index) {
  Way& way = l2_.ways[static_cast<size_t>(slot)];
  if (!way.valid) return;
  if (way.dirty) {
    uint64_t line_addr = way.tag * l2_.n_sets + set_index;
    std::memcpy(dram_.data() + line_addr * line_bytes_, l2_.line_data(slot), line_bytes_);
    ++stats_.dram_writebacks;
  }
  way.valid = false;
  way.dirty = false;
}

void Hierarchy::install_into_l2(uint64_t line_addr, const uint8_t* bytes, bool dirty,
                                bool inject_write) {
  int slot = l2_.find(line_addr);
  if (dirty) {
    // Write-back arriving from L1 counts as an L2 write access.
    ++stats_.l2.writes;
    if (slot >= 0)
      ++stats_.l2.write_hits;
    else
      ++stats_.l2.write_misses;
  }
  if (slot < 0) {
    slot = l2_.victim(line_addr);
    evict_l2_slot(slot, line_addr % l2_.n_sets);
    Way& way = l2_.ways[static_cast<size_t>(slot)];
    way.valid = true;
    way.tag = line_addr / l2_.n_sets;
    way.dirty = false;
  }
  Way& way = l2_.ways[static_cast<size_t>(slot)];
  uint8_t* dst = l2_.line_data(slot);
  std::memcpy(dst, bytes, line_bytes_);
  if (inject_write && line_is_approx(line_addr) && sram_injection_on(knobs_.l2)) {
    apply_line_mask(dst, tables_.sram_ber(knobs_.l2, AccessKind::Write),
                    stats_.l2_write_inject_events, stats_.l2_write_flipped_bits);
  }
  way.dirty = way.dirty || dirty;
  l2_.touch(slot);
}

void Hierarchy::evict_l1_slot(int slot, uint64_t set_index) {
  Way& way = l1_.ways[static_cast<size_t>(slot)];
  if (!way.valid) return;
  if (way.dirty) {
    uint64_t line_addr = way.tag * l1_.n_sets + set_index;
    install_into_l2(line_addr, l1_.line_data(slot), /*dirty=*/true, /*inject_write=*/true);
  }
  way.valid = false;
  way.dirty = false;
}

int Hierarchy::ensure_in_l1(uint64_t line_addr) {
  int slot = l1_.find(line_addr);
  if (slot >= 0) return slot;

  // Miss: build the incoming line from L2 or DRAM.
  std::vector<uint8_t> incoming(line_bytes_);
  int l2_slot = l2_.find(line_addr);
  if (l2_slot >= 0) {
    ++stats_.l2.read_hits;
    std::memcpy(incoming.data(), l2_.line_data(l2_slot), line_bytes_);
    l2_.touch(l2_slot);
    if (line_is_approx(line_addr) && sram_injection_on(knobs_.l2)) {
      apply_line_mask(incoming.data(), tables_.sram_ber(knobs_.l2, AccessKind::Read),
                      stats_.l2_read_inject_events, stats_.l2_read_flipped_bits);
    }
  } else {
    ++stats_.l2.read_misses;
    fetch_line_from_dram(line_addr, incoming.data());
    install_into_l2(line_addr, incoming.data(), /*dirty=*/false, /*inject_write=*/false);
  }

  slot = l1_.victim(line_addr);
  evict_l1_slot(slot, line_addr % l1_.n_sets);
  Way& way = l1_.ways[static_cast<size_t>(slot)];
  way.valid = true;
  way.dirty = false;
  way.tag = line_addr / l1_.n_sets;
  std::memcpy(l1_.line_data(slot), incoming.data(), line_bytes_);
  return slot;
}

uint64_t Hierarchy::read(uint64_t addr, int width_bytes) {
  check_access(addr, width_bytes);
  ++stats_.l1.reads;
  uint64_t line_addr = addr / line_bytes_;
  int slot = l1_.find(line_addr);
  bool l1_hit = slot >= 0;
  if (l1_hit) {
    ++stats_.l1.read_hits;
  } else {
    ++stats_.l1.read_misses;
    ++stats_.l2.reads;
    slot = ensure_in_l1(line_addr);
  }
  l1_.touch(slot);

  uint64_t value = 0;
  std::memcpy(&value, l1_.line_data(slot) + (addr % line_bytes_), static_cast<size_t>(width_bytes));

  // Per-access read upset on the value crossing the L1 bus; not persisted.
  if (l1_hit && is_approx(addr) && sram_injection_on(knobs_.l1)) {
    uint64_t mask =
        gen_flip_mask(width_bytes * 8, tables_.sram_ber(knobs_.l1, AccessKind::Read), rng_);
    ++stats_.l1_read_inject_events;
    stats_.l1_read_flipped_bits += std::popcount(mask);
    value ^= mask;
  }
  return value;
}

void Hierarchy::write(uint64_t addr, uint64_t value, int width_bytes) {
  check_access(addr, width_bytes);
  if (width_bytes < 8 && (value >> (width_bytes * 8)) != 0)
    throw DomainError("store value wider than access width");
  ++stats_.l1.writes;
  uint64_t line_addr = addr / line_bytes_;
  int slot = l1_.find(line_addr);
  if (slot >= 0) {
    ++stats_.l1.write_hits;
  } else {
    ++stats_.l1.write_misses;
    ++stats_.l2.reads; // write-allocate fill
    slot = ensure_in_l1(line_addr);
  }
  l1_.touch(slot);

  if (is_approx(addr) && sram_injection_on(knobs_.l1)) {
    uint64_t mask =
        gen_flip_mask(width_bytes * 8, tables_.sram_ber(knobs_.l1, AccessKind::Write), rng_);
    ++stats_.l1_write_inject_events;
    stats_.l1_write_flipped_bits += std::popcount(mask);
    value ^= mask;
  }
  std::memcpy(l1_.line_data(slot) + (addr % line_bytes_), &value,
              static_cast<size_t>(width_bytes));
  l1_.ways[static_cast<size_t>(slot)].dirty = true;
}

void Hierarchy::dma_write(uint64_t addr, std::span<const uint8_t> bytes) {
  if (bytes.empty()) return;
  if (addr % line_bytes_ != 0 || bytes.size() % line_bytes_ != 0)
    throw DomainError("dma transfers must be line-aligned");
  if (addr + bytes.size() > dram_.size()) throw DomainError("dma outside modeled memory");
  uint64_t first_line = addr / line_bytes_;
  uint64_t n_lines = bytes.size() / line_bytes_;
  for (uint64_t i = 0; i < n_lines; ++i) {
    uint64_t line_addr = first_line + i;
    // Device overwrite: cached copies are stale, drop them without write-back.
    if (int s = l1_.find(line_addr); s >= 0) {
      l1_.ways[static_cast<size_t>(s)].valid = false;
      l1_.ways[static_cast<size_t>(s)].dirty = false;
    }
    if (int s = l2_.find(line_addr); s >= 0) {
      l2_.ways[static_cast<size_t>(s)].valid = false;
      l2_.ways[static_cast<size_t>(s)].dirty = false;
    }
  }
  std::memcpy(dram_.data() + addr, bytes.data(), bytes.size());
}

void Hierarchy::set_knobs(const KnobConfig& config) {
  // Validates against the tables; throws DomainError on unknown levels.
  tables_.sram_ber(config.l1, AccessKind::Read);
  tables_.sram_ber(config.l2, AccessKind::Read);
  tables_.dram_error_rate(config.dram);
  knobs_ = config;
}

AccessStats Hierarchy::snapshot_stats() {
  AccessStats delta = stats_ - last_snapshot_;
  last_snapshot_ = stats_;
  return delta;
}

} // namespace axmem
