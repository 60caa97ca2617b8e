#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "axmem/fault_injection.hpp"
#include "axmem/knobs.hpp"
#include "axmem/rng.hpp"

namespace axmem {

/// Geometry of one cache level. Write-back, write-allocate, LRU.
struct CacheConfig {
  uint32_t size_bytes = 0;
  uint32_t associativity = 0;
  uint32_t line_bytes = 64;
};

/// Half-open byte range of modeled DRAM whose data may be approximated.
struct ApproxRegion {
  uint64_t start = 0;
  uint64_t end = 0;
};

/// Cumulative access / injection tallies. All counters are monotone within
/// a run; snapshot_stats() returns deltas between calls.
struct AccessStats {
  struct Level {
    uint64_t reads = 0;
    uint64_t writes = 0;
    uint64_t read_hits = 0;
    uint64_t read_misses = 0;
    uint64_t write_hits = 0;
    uint64_t write_misses = 0;
  };
  Level l1;
  Level l2;
  uint64_t dram_fetches = 0;
  uint64_t dram_writebacks = 0;

  // Injection events (mask drawn) and bits actually flipped, per site.
  uint64_t l1_read_inject_events = 0;
  uint64_t l1_read_flipped_bits = 0;
  uint64_t l1_write_inject_events = 0;
  uint64_t l1_write_flipped_bits = 0;
  uint64_t l2_read_inject_events = 0;
  uint64_t l2_read_flipped_bits = 0;
  uint64_t l2_write_inject_events = 0;
  uint64_t l2_write_flipped_bits = 0;
  uint64_t dram_corrupt_events = 0;
  uint64_t dram_corrupt_bits = 0;

  AccessStats operator-(const AccessStats& rhs) const;
};

/// Functional (non-cycle-accurate) two-level cache plus DRAM model with
/// fault injection on approximate-region data at five points: L1 read,
/// L1 write, L2 read (fill), L2 write (write-back install), DRAM fetch.
///
/// One Hierarchy per simulation run; not thread-safe.
class Hierarchy {
public:
  Hierarchy(CacheConfig l1, CacheConfig l2, uint64_t dram_bytes, ApproxRegion region,
            const ErrorPowerTables& tables, KnobConfig initial_knobs, uint64_t fault_seed);

  /// True iff the address falls in the approximate region.
  bool is_approx(uint64_t addr) const;

  /// Aligned load of 1/2/4/8 bytes. Returns the (possibly corrupted) value.
  uint64_t read(uint64_t addr, int width_bytes);

  /// Aligned store of 1/2/4/8 bytes.
  void write(uint64_t addr, uint64_t value, int width_bytes);

  /// Direct store into DRAM (frame/batch ingest). Line-aligned; overlapping
  /// cache lines are discarded without write-back, as a device overwrite.
  void dma_write(uint64_t addr, std::span<const uint8_t> bytes);

  /// Switch knobs. Takes effect immediately; no cache flush.
  void set_knobs(const KnobConfig& config);
  const KnobConfig& knobs() const { return knobs_; }

  /// Counters accumulated since the previous snapshot.
  AccessStats snapshot_stats();
  const AccessStats& totals() const { return stats_; }

  const DramFaultMap& fault_map() const { return fault_map_; }
  const ApproxRegion& region() const { return region_; }
  uint64_t dram_bytes() const { return dram_.size(); }
  uint32_t line_bytes() const { return line_bytes_; }

private:
  struct Way {
    uint64_t tag = 0;
    uint64_t lru = 0;
    bool valid = false;
    bool dirty = false;
  };

  struct Cache {
    uint32_t n_sets = 0;
    uint32_t n_ways = 0;
    uint32_t line_bytes = 0;
    std::vector<Way> ways;      // n_sets * n_ways
    std::vector<uint8_t> data;  // n_sets * n_ways * line_bytes
    uint64_t tick = 0;

    int find(uint64_t line_addr) const;       // way slot or -1
    int victim(uint64_t line_addr) const;     // LRU slot for the line's set
    uint8_t* line_data(int slot);
    void touch(int slot);
  };

  uint32_t line_bytes_;
  Cache l1_;
  Cache l2_;
  std::vector<uint8_t> dram_;
  ApproxRegion region_;
  const ErrorPowerTables& tables_;
  KnobConfig knobs_;
  InjectorRng rng_;
  DramFaultMap fault_map_;
  AccessStats stats_;
  AccessStats last_snapshot_;

  bool line_is_approx(uint64_t line_addr) const;
  bool sram_injection_on(const VddLevel& level) const;

  void check_access(uint64_t addr, int width_bytes) const;
  // Returns the L1 slot holding the line, filling from L2/DRAM as needed.
  int ensure_in_l1(uint64_t line_addr);
  void fetch_line_from_dram(uint64_t line_addr, uint8_t* out);
  void install_into_l2(uint64_t line_addr, const uint8_t* bytes, bool dirty, bool inject_write);
  void evict_l1_slot(int slot, uint64_t set_index);
  void evict_l2_slot(int slot, uint64_t set_index);
  void apply_line_mask(uint8_t* bytes, double ber, uint64_t& events, uint64_t& bits);
  void apply_dram_decay(uint64_t line_addr, uint8_t* bytes);
};

} // namespace axmem
