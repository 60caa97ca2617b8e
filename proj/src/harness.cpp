#include "axmem/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "axmem/errors.hpp"

namespace axmem {

namespace {

uint64_t stream_seed(uint64_t seed, uint64_t salt) {
  return InjectorRng::splitmix64(seed ^ (salt * 0x9e3779b97f4a7c15ULL));
}

constexpr uint64_t kFaultSalt = 0xf0a17;
constexpr uint64_t kAgentSalt = 0xa9e27;
constexpr uint64_t kSceneSalt = 0x5ce2e;

// Per-run workload adapter: generates inputs, runs the approximate pass
// through the hierarchy every frame, and reruns the golden kernel for the
// quality monitor on demand.
class WorkloadEngine {
public:
  WorkloadEngine(const Scenario& s, uint64_t scene_seed, Hierarchy& h)
      : s_(s), h_(h),
        seq_(s.scenes, scene_seed, s.width, s.height, s.frame_channels()),
        warmup_seq_(s.warmup_scenes.empty() ? s.scenes : s.warmup_scenes,
                    stream_seed(scene_seed, 0x77), s.width, s.height, s.frame_channels()),
        micro_seed_(stream_seed(scene_seed, 0x3175)) {
    uint64_t line = h.line_bytes();
    auto round_line = [line](uint64_t b) { return (b + line - 1) / line * line; };
    input_addr_ = h.region().start;
    result_addr_ =
        input_addr_ + round_line(static_cast<uint64_t>(s.batch_entries) * sizeof(OptionRecord));
  }

  void run_approx(int t, bool warmup) {
    switch (s_.workload) {
      case WorkloadKind::Canny:
        last_frame_ = run_canny(h_, input(t, warmup), input_addr_, s_.canny);
        break;
      case WorkloadKind::Kmeans:
        last_frame_ = run_kmeans(h_, input(t, warmup), input_addr_, s_.kmeans);
        break;
      case WorkloadKind::Blackscholes:
        last_prices_ = run_blackscholes(h_, batch(t, warmup), input_addr_, result_addr_);
        break;
      case WorkloadKind::Micro:
        last_flips_ = microbench_writeread(h_, s_.micro_words, input_addr_,
                                           micro_pattern(t, warmup));
        break;
    }
  }

  double measure_qos(int t, bool warmup) {
    switch (s_.workload) {
      case WorkloadKind::Canny:
        return rmse(canny_edges(input(t, warmup), s_.canny), last_frame_).value;
      case WorkloadKind::Kmeans:
        return rmse(kmeans_recolor(input(t, warmup), s_.kmeans), last_frame_).value;
      case WorkloadKind::Blackscholes:
        return avg_rel_error(blackscholes_prices(batch(t, warmup)), last_prices_).value;
      case WorkloadKind::Micro:
        return static_cast<double>(last_flips_);
    }
    return 0.0;
  }

private:
  Frame input(int t, bool warmup) const {
    return warmup ? warmup_seq_.frame_at(t) : seq_.frame_at(t);
  }
  OptionBatch batch(int t, bool warmup) const {
    return warmup ? warmup_seq_.batch_at(t, s_.batch_entries)
                  : seq_.batch_at(t, s_.batch_entries);
  }
  uint64_t micro_pattern(int t, bool warmup) const {
    return stream_seed(micro_seed_, (warmup ? 0x8000000000ULL : 0) + static_cast<uint64_t>(t));
  }

  const Scenario& s_;
  Hierarchy& h_;
  SceneSequence seq_;
  SceneSequence warmup_seq_;
  uint64_t micro_seed_;
  uint64_t input_addr_ = 0;
  uint64_t result_addr_ = 0;
  Frame last_frame_;
  std::vector<float> last_prices_;
  uint64_t last_flips_ = 0;
};

int domain_index_or_minus_one(const std::vector<double>& values, double v) {
  for (size_t i = 0; i < values.size(); ++i)
    if (std::abs(values[i] - v) < 1e-9) return static_cast<int>(i);
  return -1;
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(10) << v;
  return o.str();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

KnobConfig static_baseline_config(const Scenario& s) {
  ErrorPowerTables t = s.tables();
  KnobDomains d = s.knob_domains();
  // Validate against the full tables (baselines may use non-agent periods).
  t.sram_ber_volts(s.static_l1_volts, AccessKind::Read);
  t.sram_ber_volts(s.static_l2_volts, AccessKind::Read);
  t.dram_error_rate_seconds(s.static_dram_seconds);

  std::vector<double> volts, agent_seconds;
  for (int i = 0; i < d.sram_levels(); ++i) volts.push_back(d.sram_level(i).volts);
  for (int i = 0; i < d.dram_levels(); ++i) agent_seconds.push_back(d.dram_level(i).seconds);
  KnobConfig cfg;
  cfg.l1 = VddLevel{domain_index_or_minus_one(volts, s.static_l1_volts), s.static_l1_volts};
  cfg.l2 = VddLevel{domain_index_or_minus_one(volts, s.static_l2_volts), s.static_l2_volts};
  cfg.dram = RefreshPeriod{domain_index_or_minus_one(agent_seconds, s.static_dram_seconds),
                           s.static_dram_seconds};
  return cfg;
}

RunResult run_scenario(const Scenario& s, uint64_t seed, const QTable* warm_start) {
  s.validate();
  ErrorPowerTables tables = s.tables();
  KnobDomains domains = s.knob_domains();
  StateSpace space(domains.sram_levels(), domains.dram_levels(), s.qos_buckets);

  QTable table = warm_start ? *warm_start
                            : QTable(space.state_count(), ActionVector::kCount, s.learning.q_init);
  if (table.n_states() != space.state_count() || table.n_actions() != ActionVector::kCount)
    throw ConfigError("warm-start table shape does not match the scenario's state space");

  uint64_t fault_seed = stream_seed(seed, kFaultSalt);
  uint64_t scene_seed = stream_seed(seed, kSceneSalt);
  InjectorRng agent_rng(stream_seed(seed, kAgentSalt));

  const bool is_agent = s.controller == ControllerKind::Agent;
  KnobConfig initial = is_agent ? domains.most_exact() : static_baseline_config(s);
  Hierarchy h(s.memory.l1, s.memory.l2, s.memory.dram_bytes, s.memory.region, tables, initial,
              fault_seed);
  WorkloadEngine engine(s, scene_seed, h);

  std::vector<TraceRecord> trace;
  trace.reserve(static_cast<size_t>(s.frames));

  bool have_prev = false;
  int prev_state = 0;
  int prev_action = 0;
  int invocations_total = 0;
  uint64_t invocations_traced = 0;
  double last_q = 0.0;
  double last_reward = 0.0;
  int last_action_id = ActionVector{0, 0, 0}.id();
  double current_thr = 0.0;
  int last_goal_change = -1000000;

  const int total = s.warmup_frames + s.frames;
  for (int g = 0; g < total; ++g) {
    const bool warmup = g < s.warmup_frames;
    const int t = warmup ? g : g - s.warmup_frames;

    double thr;
    if (s.unconstrained) {
      thr = s.max_q;
    } else {
      const GoalSchedule& sched =
          (warmup && !s.warmup_goal_schedule.empty()) ? s.warmup_goal_schedule : s.goal_schedule;
      thr = Scenario::threshold_at(sched, t, sched.empty() ? s.max_q : sched.front().second);
    }
    if (g == 0) {
      current_thr = thr;
    } else if (thr != current_thr) {
      current_thr = thr;
      last_goal_change = g;
    }
    const GoalSpec goal{current_thr, s.max_q, 1.0};

    // Episode boundary: traces reset, on-policy continuity restarts.
    if (g % s.episode_frames == 0) {
      table.reset_traces();
      have_prev = false;
    }

    const KnobConfig during = h.knobs();
    const double power_during = memory_power(during, tables);

    engine.run_approx(t, warmup);

    const int episode = g / s.episode_frames;
    const int period =
        episode < s.bootstrap_episodes ? 1 : s.invocation_period;
    const bool invoked = (g % period == 0) || (g - last_goal_change < 5);

    if (invoked) {
      const double q = engine.measure_qos(t, warmup);
      last_q = q;
      const RewardComponents rc = compute_reward(q, power_during, goal);
      last_reward = rc.reward;

      if (is_agent) {
        const int bucket = discretize_qos_error(q, goal, s.qos_buckets);
        const AgentState observed{during.l1.index, during.l2.index, during.dram.index, bucket};
        const int state = space.encode(observed);
        const double eps = s.learning.epsilon.after(invocations_total);
        int action;
        if (s.algorithm == AlgorithmKind::TdLambda) {
          // On-policy: choose A' first, then update toward Q(S', A').
          action = select_action(table, state, eps, agent_rng);
          if (have_prev)
            table.td_lambda_step(prev_state, prev_action, rc.reward, state, action, s.learning);
        } else {
          if (have_prev)
            table.q_learning_step(prev_state, prev_action, rc.reward, state, s.learning);
          action = select_action(table, state, eps, agent_rng);
        }
        prev_state = state;
        prev_action = action;
        have_prev = true;
        last_action_id = action;
        const AgentState next = space.apply_action(observed, ActionVector::from_id(action));
        h.set_knobs(domains.config(next.l1, next.l2, next.dram));
      }
      ++invocations_total;
      if (!warmup) ++invocations_traced;
    }

    if (!warmup) {
      TraceRecord r;
      r.frame = t;
      r.q = last_q;
      r.q_threshold = current_thr;
      r.power = power_during;
      r.l1 = during.l1.index;
      r.l2 = during.l2.index;
      r.dram = during.dram.index;
      r.action = last_action_id;
      r.reward = last_reward;
      r.violation = last_q > current_thr;
      r.invoked = invoked;
      trace.push_back(r);
    }
  }

  RunSummary summary;
  summary.frames = s.frames;
  summary.invocations = invocations_traced;
  double power_acc = 0.0, q_acc = 0.0;
  for (const auto& r : trace) {
    power_acc += r.power;
    q_acc += r.q;
    if (r.violation) ++summary.violations;
  }
  summary.mean_power = power_acc / static_cast<double>(trace.size());
  summary.mean_q = q_acc / static_cast<double>(trace.size());
  summary.qos_overshoot = qos_overshoot(trace);

  return RunResult{std::move(trace), summary, std::move(table), h.knobs()};
}

double qos_overshoot(const std::vector<TraceRecord>& trace) {
  if (trace.empty()) throw DomainError("qos overshoot needs a non-empty trace");
  double acc = 0.0;
  for (const auto& r : trace) acc += std::max(0.0, r.q - r.q_threshold);
  return acc;
}

OracleResult brute_force_oracle(const Scenario& s, double threshold, uint64_t seed) {
  s.validate();
  ErrorPowerTables tables = s.tables();
  KnobDomains domains = s.knob_domains();
  const int n_sram = domains.sram_levels();
  const int n_dram = domains.dram_levels();
  const int n = domains.config_count();
  const uint64_t fault_seed = stream_seed(seed, kFaultSalt);
  const uint64_t scene_seed = stream_seed(seed, kSceneSalt);

  std::vector<double> power(static_cast<size_t>(n)), medq(static_cast<size_t>(n));

#pragma omp parallel for schedule(dynamic)
  for (int ci = 0; ci < n; ++ci) {
    const int dram = ci % n_dram;
    const int l2 = (ci / n_dram) % n_sram;
    const int l1 = ci / (n_dram * n_sram);
    const KnobConfig cfg = domains.config(l1, l2, dram);
    Hierarchy h(s.memory.l1, s.memory.l2, s.memory.dram_bytes, s.memory.region, tables, cfg,
                fault_seed);
    WorkloadEngine engine(s, scene_seed, h);
    std::vector<double> qs;
    qs.reserve(static_cast<size_t>(s.oracle_frames));
    for (int t = 0; t < s.oracle_frames; ++t) {
      engine.run_approx(t, false);
      qs.push_back(engine.measure_qos(t, false));
    }
    power[static_cast<size_t>(ci)] = memory_power(cfg, tables);
    medq[static_cast<size_t>(ci)] = median_of(std::move(qs));
  }

  OracleResult out;
  out.all_power = power;
  out.all_median_q = medq;
  int best = -1;
  for (int ci = 0; ci < n; ++ci) {
    if (medq[static_cast<size_t>(ci)] > threshold) continue;
    if (best < 0 || power[static_cast<size_t>(ci)] < power[static_cast<size_t>(best)]) {
      best = ci;
    } else if (power[static_cast<size_t>(ci)] == power[static_cast<size_t>(best)]) {
      // Tie: prefer the more exact config (higher summed level indices).
      auto exactness = [&](int c) {
        return c / (n_dram * n_sram) + (c / n_dram) % n_sram + c % n_dram;
      };
      if (exactness(ci) > exactness(best)) best = ci;
    }
  }
  out.feasible = best >= 0;
  if (best < 0) {
    out.config = domains.most_exact();
    int exact_ci = (n_sram - 1) * n_sram * n_dram + (n_sram - 1) * n_dram + (n_dram - 1);
    out.power = power[static_cast<size_t>(exact_ci)];
    out.median_q = medq[static_cast<size_t>(exact_ci)];
  } else {
    out.config = domains.config(best / (n_dram * n_sram), (best / n_dram) % n_sram, best % n_dram);
    out.power = power[static_cast<size_t>(best)];
    out.median_q = medq[static_cast<size_t>(best)];
  }
  return out;
}

uint64_t microbench_writeread(Hierarchy& h, int n_words, uint64_t addr, uint64_t pattern_seed) {
  if (n_words <= 0) throw DomainError("microbench needs a positive word count");
  if (addr % 8 != 0) throw DomainError("microbench buffer must be 8-byte aligned");
  for (int i = 0; i < n_words; ++i) {
    uint64_t word = InjectorRng::splitmix64(pattern_seed + static_cast<uint64_t>(i));
    h.write(addr + static_cast<uint64_t>(i) * 8, word, 8);
  }
  uint64_t flips = 0;
  for (int i = 0; i < n_words; ++i) {
    uint64_t expected = InjectorRng::splitmix64(pattern_seed + static_cast<uint64_t>(i));
    uint64_t got = h.read(addr + static_cast<uint64_t>(i) * 8, 8);
    flips += static_cast<uint64_t>(std::popcount(expected ^ got));
  }
  return flips;
}

std::vector<SweepRow> sweep(SweepKind kind, const Scenario& base, uint64_t seed) {
  base.validate();
  std::vector<SweepRow> rows;
  KnobDomains domains = base.knob_domains();
  ErrorPowerTables tables = base.tables();

  if (kind == SweepKind::Sensitivity) {
    // One knob varied from exact toward most approximate, others exact;
    // fixed knobs, no controller.
    const uint64_t fault_seed = stream_seed(seed, kFaultSalt);
    const uint64_t scene_seed = stream_seed(seed, kSceneSalt);
    struct Dim {
      const char* name;
      int which; // 0=l1, 1=l2, 2=dram
    };
    for (const Dim& dim : {Dim{"l1_volts", 0}, Dim{"l2_volts", 1}, Dim{"dram_seconds", 2}}) {
      int levels = dim.which == 2 ? domains.dram_levels() : domains.sram_levels();
      for (int step = levels - 1; step >= 0; --step) {
        KnobConfig cfg = domains.most_exact();
        if (dim.which == 0) cfg.l1 = domains.sram_level(step);
        if (dim.which == 1) cfg.l2 = domains.sram_level(step);
        if (dim.which == 2) cfg.dram = domains.dram_level(step);
        Hierarchy h(base.memory.l1, base.memory.l2, base.memory.dram_bytes, base.memory.region,
                    tables, cfg, fault_seed);
        WorkloadEngine engine(base, scene_seed, h);
        std::vector<double> qs;
        for (int t = 0; t < base.oracle_frames; ++t) {
          engine.run_approx(t, false);
          qs.push_back(engine.measure_qos(t, false));
        }
        double value = dim.which == 2 ? cfg.dram.seconds
                                      : (dim.which == 0 ? cfg.l1.volts : cfg.l2.volts);
        rows.push_back({dim.name, value, "power", memory_power(cfg, tables)});
        rows.push_back({dim.name, value, "median_q", median_of(std::move(qs))});
      }
    }
  } else if (kind == SweepKind::InvocationPeriod) {
    for (int period : {1, 2, 5, 10}) {
      Scenario s = base;
      s.invocation_period = period;
      s.bootstrap_episodes = 0; // count scales as budget/period
      RunResult r = run_scenario(s, seed);
      rows.push_back({"invocation_period", static_cast<double>(period), "invocations",
                      static_cast<double>(r.summary.invocations)});
      rows.push_back(
          {"invocation_period", static_cast<double>(period), "mean_power", r.summary.mean_power});
      rows.push_back({"invocation_period", static_cast<double>(period), "qos_overshoot",
                      r.summary.qos_overshoot});
    }
  } else { // StateSpace
    for (int factor : {1, 2, 4}) {
      Scenario s = base;
      s.qos_buckets = base.qos_buckets * factor;
      RunResult r = run_scenario(s, seed);
      rows.push_back({"qos_buckets", static_cast<double>(s.qos_buckets), "mean_power",
                      r.summary.mean_power});
      rows.push_back({"qos_buckets", static_cast<double>(s.qos_buckets), "qos_overshoot",
                      r.summary.qos_overshoot});
    }
  }
  if (rows.empty()) throw ConfigError("sweep produced an empty grid");
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "dimension,value,metric,metric_value\n";
  for (const auto& r : rows)
    out << r.dimension << ',' << fmt(r.value) << ',' << r.metric << ',' << fmt(r.metric_value)
        << '\n';
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "frame,q,q_threshold,power,l1,l2,dram,action,reward,violation,invoked\n";
  for (const auto& r : trace) {
    out << r.frame << ',' << fmt(r.q) << ',' << fmt(r.q_threshold) << ',' << fmt(r.power) << ','
        << r.l1 << ',' << r.l2 << ',' << r.dram << ',' << r.action << ',' << fmt(r.reward) << ','
        << (r.violation ? 1 : 0) << ',' << (r.invoked ? 1 : 0) << '\n';
  }
}

std::string trace_csv_text(const std::vector<TraceRecord>& trace) {
  std::ostringstream ss;
  write_trace_csv(ss, trace);
  return ss.str();
}

} // namespace axmem
