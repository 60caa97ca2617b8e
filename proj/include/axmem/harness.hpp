#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "axmem/agent.hpp"
#include "axmem/memory_sim.hpp"
#include "axmem/scenario.hpp"

namespace axmem {

/// One controller-invocation row; one record per traced frame.
struct TraceRecord {
  int frame = 0;
  double q = 0.0;
  double q_threshold = 0.0;
  double power = 0.0;
  int l1 = 0;
  int l2 = 0;
  int dram = 0;
  int action = 0;
  double reward = 0.0;
  bool violation = false;
  bool invoked = false;
};

struct RunSummary {
  int frames = 0;
  double mean_power = 0.0; // functional timing: energy/frame == mean power
  double mean_q = 0.0;
  double qos_overshoot = 0.0;
  uint64_t violations = 0;
  uint64_t invocations = 0;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  RunSummary summary;
  QTable qtable;
  KnobConfig final_knobs;
};

/// Drive the observe-decide-act loop over the scenario's frame budget.
/// Deterministic per (scenario, seed). An optional warm-start table seeds
/// the agent.
RunResult run_scenario(const Scenario& s, uint64_t seed, const QTable* warm_start = nullptr);

/// Sum over frames of max(0, q - threshold).
double qos_overshoot(const std::vector<TraceRecord>& trace);

/// The scenario's fixed-knob baseline configuration (full-table periods
/// allowed).
KnobConfig static_baseline_config(const Scenario& s);

struct OracleResult {
  KnobConfig config;
  double power = 0.0;
  double median_q = 0.0;
  bool feasible = false;
  // Per-config enumeration table (power, median q), indexed like
  // KnobDomains::config iteration order.
  std::vector<double> all_power;
  std::vector<double> all_median_q;
};

/// Enumerate every agent-visible config on a fixed-seed segment and return
/// the minimum-power config whose median QoS meets the threshold. Ties break
/// toward the more exact config; infeasible thresholds return the most exact
/// config with feasible = false.
OracleResult brute_force_oracle(const Scenario& s, double threshold, uint64_t seed);

/// Write n 64-bit words through the hierarchy, read them back, and return
/// the summed Hamming distance against what was written.
uint64_t microbench_writeread(Hierarchy& h, int n_words, uint64_t addr, uint64_t pattern_seed);

enum class SweepKind { Sensitivity, InvocationPeriod, StateSpace };

struct SweepRow {
  std::string dimension;
  double value = 0.0;
  std::string metric;
  double metric_value = 0.0;
};

std::vector<SweepRow> sweep(SweepKind kind, const Scenario& base, uint64_t seed);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Fixed-order trace CSV:
/// frame,q,q_threshold,power,l1,l2,dram,action,reward,violation,invoked
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);
std::string trace_csv_text(const std::vector<TraceRecord>& trace);

} // namespace axmem
