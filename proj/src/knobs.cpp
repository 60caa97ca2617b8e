#include "axmem/knobs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "axmem/errors.hpp"
#include <json.hpp>

namespace axmem {

namespace {

constexpr double kLookupTol = 1e-9;

int find_value(const std::vector<double>& table, double value) {
  for (size_t i = 0; i < table.size(); ++i) {
    if (std::abs(table[i] - value) < kLookupTol) return static_cast<int>(i);
  }
  return -1;
}

} // namespace

KnobDomains::KnobDomains(std::vector<double> sram_volts_ascending,
                         std::vector<double> dram_seconds_descending)
    : sram_volts_(std::move(sram_volts_ascending)),
      dram_seconds_(std::move(dram_seconds_descending)) {
  if (sram_volts_.size() < 2 || dram_seconds_.size() < 2)
    throw DomainError("knob domains need at least two levels each");
  if (!std::is_sorted(sram_volts_.begin(), sram_volts_.end()))
    throw DomainError("sram voltages must ascend from most approximate to exact");
  if (!std::is_sorted(dram_seconds_.rbegin(), dram_seconds_.rend()))
    throw DomainError("dram periods must descend from most approximate to exact");
}

KnobDomains KnobDomains::defaults() {
  return KnobDomains({0.7, 0.8, 0.9, 1.0}, {20.0, 5.0, 1.0, 0.1});
}

VddLevel KnobDomains::sram_level(int index) const {
  if (index < 0 || index >= sram_levels())
    throw DomainError("sram level index out of range: " + std::to_string(index));
  return VddLevel{index, sram_volts_[static_cast<size_t>(index)]};
}

RefreshPeriod KnobDomains::dram_level(int index) const {
  if (index < 0 || index >= dram_levels())
    throw DomainError("dram level index out of range: " + std::to_string(index));
  return RefreshPeriod{index, dram_seconds_[static_cast<size_t>(index)]};
}

KnobConfig KnobDomains::config(int l1_index, int l2_index, int dram_index) const {
  return KnobConfig{sram_level(l1_index), sram_level(l2_index), dram_level(dram_index)};
}

KnobConfig KnobDomains::most_exact() const {
  return config(sram_exact_index(), sram_exact_index(), dram_exact_index());
}

KnobConfig KnobDomains::most_approximate() const { return config(0, 0, 0); }

ErrorPowerTables::ErrorPowerTables(Data data) : data_(std::move(data)) {
  const auto& d = data_;
  auto check_aligned = [](size_t a, size_t b, const char* what) {
    if (a != b || a == 0) throw DomainError(std::string("table size mismatch: ") + what);
  };
  check_aligned(d.sram_volts.size(), d.sram_read_ber.size(), "sram read ber");
  check_aligned(d.sram_volts.size(), d.sram_write_ber.size(), "sram write ber");
  check_aligned(d.dram_seconds.size(), d.dram_error_rate.size(), "dram error rate");
  check_aligned(d.dram_seconds.size(), d.dram_power_saving.size(), "dram power saving");
  if (!std::is_sorted(d.sram_volts.begin(), d.sram_volts.end()))
    throw DomainError("sram voltage table must be ascending");
  if (!std::is_sorted(d.dram_seconds.begin(), d.dram_seconds.end()))
    throw DomainError("dram period table must be ascending");

  auto check_prob = [](const std::vector<double>& v, const char* what) {
    for (double p : v)
      if (!(p >= 0.0 && p <= 1.0))
        throw DomainError(std::string("probability out of [0,1]: ") + what);
  };
  check_prob(d.sram_read_ber, "sram read ber");
  check_prob(d.sram_write_ber, "sram write ber");
  check_prob(d.dram_error_rate, "dram error rate");
  check_prob(d.dram_power_saving, "dram power saving");

  // BER falls with voltage, retention errors and savings grow with period.
  auto check_monotone = [](const std::vector<double>& v, bool non_increasing, const char* what) {
    for (size_t i = 1; i < v.size(); ++i) {
      bool ok = non_increasing ? v[i] <= v[i - 1] : v[i] >= v[i - 1];
      if (!ok) throw DomainError(std::string("table not monotone: ") + what);
    }
  };
  check_monotone(d.sram_read_ber, true, "sram read ber");
  check_monotone(d.sram_write_ber, true, "sram write ber");
  check_monotone(d.dram_error_rate, false, "dram error rate");
  check_monotone(d.dram_power_saving, false, "dram power saving");

  double wsum = d.power_weights[0] + d.power_weights[1] + d.power_weights[2];
  if (std::abs(wsum - 1.0) > 1e-12) throw DomainError("power weights must sum to 1");
}

ErrorPowerTables ErrorPowerTables::defaults() {
  Data d;
  d.sram_volts = {0.7, 0.8, 0.9, 1.0};
  d.sram_read_ber = {7.59e-3, 3.24e-4, 2.00e-5, 2.00e-6};
  d.sram_write_ber = {1.00e-4, 2.00e-5, 1.00e-6, 0.0};
  d.dram_seconds = {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  d.dram_error_rate = {8.088161777987015e-11, 5.007935227340456e-10,
                       7.96203148797984e-9,   3.8336966683708786e-8,
                       2.527728210797576e-7,  3.7739123458197472e-6,
                       2.0605975259769508e-5, 1.4468035186892834e-4};
  d.dram_power_saving = {0.0842007434944238,  0.16003717472118957,
                         0.20687732342007436, 0.22323420074349443,
                         0.23066914498141266, 0.23438661710037174,
                         0.2366171003717472,  0.24};
  d.power_weights = {0.35, 0.25, 0.40};
  d.sram_power_exponent = 2.0;
  return ErrorPowerTables(std::move(d));
}

ErrorPowerTables ErrorPowerTables::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

ErrorPowerTables ErrorPowerTables::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("table file is not valid JSON: ") + e.what());
  }
  Data d = defaults().data_;
  try {
    if (j.contains("sram_volts")) d.sram_volts = j["sram_volts"].get<std::vector<double>>();
    if (j.contains("sram_read_ber")) d.sram_read_ber = j["sram_read_ber"].get<std::vector<double>>();
    if (j.contains("sram_write_ber")) d.sram_write_ber = j["sram_write_ber"].get<std::vector<double>>();
    if (j.contains("dram_seconds")) d.dram_seconds = j["dram_seconds"].get<std::vector<double>>();
    if (j.contains("dram_error_rate")) d.dram_error_rate = j["dram_error_rate"].get<std::vector<double>>();
    if (j.contains("dram_power_saving"))
      d.dram_power_saving = j["dram_power_saving"].get<std::vector<double>>();
    if (j.contains("power_weights")) {
      auto w = j["power_weights"].get<std::vector<double>>();
      if (w.size() != 3) throw ConfigError("power_weights must have 3 entries");
      d.power_weights = {w[0], w[1], w[2]};
    }
    if (j.contains("sram_power_exponent")) d.sram_power_exponent = j["sram_power_exponent"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad table file field: ") + e.what());
  }
  try {
    return ErrorPowerTables(std::move(d));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("bad table file: ") + e.what());
  }
}

double ErrorPowerTables::sram_ber_volts(double volts, AccessKind kind) const {
  int i = find_value(data_.sram_volts, volts);
  if (i < 0) throw DomainError("unknown sram voltage: " + std::to_string(volts));
  return kind == AccessKind::Read ? data_.sram_read_ber[static_cast<size_t>(i)]
                                  : data_.sram_write_ber[static_cast<size_t>(i)];
}

double ErrorPowerTables::sram_ber(const VddLevel& level, AccessKind kind) const {
  return sram_ber_volts(level.volts, kind);
}

double ErrorPowerTables::dram_error_rate_seconds(double seconds) const {
  int i = find_value(data_.dram_seconds, seconds);
  if (i < 0) throw DomainError("unknown dram refresh period: " + std::to_string(seconds));
  return data_.dram_error_rate[static_cast<size_t>(i)];
}

double ErrorPowerTables::dram_error_rate(const RefreshPeriod& period) const {
  return dram_error_rate_seconds(period.seconds);
}

double ErrorPowerTables::dram_power_saving_seconds(double seconds) const {
  int i = find_value(data_.dram_seconds, seconds);
  if (i < 0) throw DomainError("unknown dram refresh period: " + std::to_string(seconds));
  return data_.dram_power_saving[static_cast<size_t>(i)];
}

double ErrorPowerTables::dram_power_saving(const RefreshPeriod& period) const {
  return dram_power_saving_seconds(period.seconds);
}

bool ErrorPowerTables::has_dram_period(double seconds) const {
  return find_value(data_.dram_seconds, seconds) >= 0;
}

double memory_power(const KnobConfig& config, const ErrorPowerTables& tables) {
  const auto& w = tables.power_weights();
  double nominal = tables.nominal_volts();
  double e = tables.sram_power_exponent();
  double sram1 = std::pow(config.l1.volts / nominal, e);
  double sram2 = std::pow(config.l2.volts / nominal, e);
  // DRAM share normalized so the exact (shortest) period costs exactly 1.
  double base = 1.0 - tables.dram_power_saving_seconds(tables.exact_period_seconds());
  double dram = (1.0 - tables.dram_power_saving(config.dram)) / base;
  return w[0] * sram1 + w[1] * sram2 + w[2] * dram;
}

} // namespace axmem
