#pragma once

#include <array>
#include <string>
#include <vector>

namespace axmem {

/// SRAM supply-voltage knob level. Index 0 is the most approximate voltage;
/// the highest index is the exact (nominal) voltage.
struct VddLevel {
  int index = 0;
  double volts = 0.0;

  friend bool operator==(const VddLevel&, const VddLevel&) = default;
};

/// DRAM refresh-period knob level. Index 0 is the most approximate
/// (longest) period; the highest index is the exact (shortest) period.
struct RefreshPeriod {
  int index = 0;
  double seconds = 0.0;

  friend bool operator==(const RefreshPeriod&, const RefreshPeriod&) = default;
};

/// One full setting of the three approximation knobs.
struct KnobConfig {
  VddLevel l1;
  VddLevel l2;
  RefreshPeriod dram;

  friend bool operator==(const KnobConfig&, const KnobConfig&) = default;
};

enum class AccessKind { Read, Write };

/// The discrete knob ladders visible to the controller.
/// Voltages ascend from most approximate to exact; periods descend.
class KnobDomains {
public:
  KnobDomains(std::vector<double> sram_volts_ascending,
              std::vector<double> dram_seconds_descending);

  static KnobDomains defaults();

  int sram_levels() const { return static_cast<int>(sram_volts_.size()); }
  int dram_levels() const { return static_cast<int>(dram_seconds_.size()); }
  int config_count() const { return sram_levels() * sram_levels() * dram_levels(); }

  VddLevel sram_level(int index) const;
  RefreshPeriod dram_level(int index) const;

  int sram_exact_index() const { return sram_levels() - 1; }
  int dram_exact_index() const { return dram_levels() - 1; }

  KnobConfig config(int l1_index, int l2_index, int dram_index) const;
  KnobConfig most_exact() const;
  KnobConfig most_approximate() const;

private:
  std::vector<double> sram_volts_;   // ascending volts
  std::vector<double> dram_seconds_; // descending seconds
};

/// Table-driven error and power models for the SRAM and DRAM knobs.
/// Immutable after construction; shareable across concurrent runs.
class ErrorPowerTables {
public:
  struct Data {
    std::vector<double> sram_volts;        // ascending
    std::vector<double> sram_read_ber;     // aligned with sram_volts
    std::vector<double> sram_write_ber;    // aligned with sram_volts
    std::vector<double> dram_seconds;      // ascending, full table
    std::vector<double> dram_error_rate;   // aligned with dram_seconds
    std::vector<double> dram_power_saving; // aligned with dram_seconds
    std::array<double, 3> power_weights{0.35, 0.25, 0.40}; // l1, l2, dram
    double sram_power_exponent = 2.0;
  };

  explicit ErrorPowerTables(Data data);

  /// Built-in defaults: 6T SRAM read/write bit error rates vs supply voltage
  /// and DRAM retention error rate / self-refresh power saving vs refresh
  /// period.
  static ErrorPowerTables defaults();

  /// Load from a JSON file; missing keys fall back to the defaults.
  static ErrorPowerTables load(const std::string& path);
  static ErrorPowerTables from_json_text(const std::string& text);

  double sram_ber(const VddLevel& level, AccessKind kind) const;
  double sram_ber_volts(double volts, AccessKind kind) const;
  double dram_error_rate(const RefreshPeriod& period) const;
  double dram_error_rate_seconds(double seconds) const;
  double dram_power_saving(const RefreshPeriod& period) const;
  double dram_power_saving_seconds(double seconds) const;

  bool has_dram_period(double seconds) const;
  const std::vector<double>& full_dram_periods() const { return data_.dram_seconds; }
  const std::array<double, 3>& power_weights() const { return data_.power_weights; }
  double sram_power_exponent() const { return data_.sram_power_exponent; }

  /// Nominal (exact) voltage: the highest entry of the voltage table.
  double nominal_volts() const { return data_.sram_volts.back(); }
  /// Exact refresh period: the shortest entry of the period table.
  double exact_period_seconds() const { return data_.dram_seconds.front(); }

private:
  Data data_;
};

/// Normalized memory power of a knob configuration.
/// 1.0 at the exact config (nominal volts, shortest period); strictly
/// decreasing as any knob moves toward more approximation.
double memory_power(const KnobConfig& config, const ErrorPowerTables& tables);

} // namespace axmem
