#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "axmem/rng.hpp"

namespace axmem {

/// MDP state: the three knob indices plus the discretized QoS-error bucket.
struct AgentState {
  int l1 = 0;
  int l2 = 0;
  int dram = 0;
  int qos_bucket = 0;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Per-knob index delta in {-1, 0, +1}; 27 distinct actions.
struct ActionVector {
  int dl1 = 0;
  int dl2 = 0;
  int ddram = 0;

  static constexpr int kCount = 27;
  int id() const { return (dl1 + 1) * 9 + (dl2 + 1) * 3 + (ddram + 1); }
  static ActionVector from_id(int id);

  friend bool operator==(const ActionVector&, const ActionVector&) = default;
};

/// Application goal: QoS threshold, the metric's ceiling, and the power
/// normalization bound.
struct GoalSpec {
  double q_threshold = 0.0;
  double max_q = 1.0;
  double max_power = 1.0;
};

struct EpsilonSchedule {
  double initial = 1.0;
  double decay = 0.99; // multiplicative, per invocation
  double floor = 0.05;
  double zero_below = 0.0; // snap to exactly 0 once below this

  double after(int invocations) const;
};

struct LearningParams {
  double alpha = 0.6;
  double gamma = 0.1;
  double lambda = 0.95;
  // Initial table value. Above the reward ceiling this acts as optimistic
  // initialization: the greedy policy itself sweeps untried actions.
  double q_init = 0.0;
  EpsilonSchedule epsilon;
};

struct RewardComponents {
  double reward_p = 0.0;
  double reward_q = 0.0;
  double reward = 0.0;
  bool violation = false;     // q > threshold
  bool power_clamped = false; // measured power exceeded max_power
};

/// Power term: 1 - power / max_power, in [0, 1].
/// Power above max_power clamps to 0 and flags model drift.
double reward_power(double power, const GoalSpec& goal, bool* clamped = nullptr);

/// Quality term: -(q - threshold) / max_q, in [-1, 1] for a saturating metric.
double reward_quality(double q, const GoalSpec& goal);

/// Piecewise reward: the power term while within the constraint (inclusive),
/// the quality term on violation.
RewardComponents compute_reward(double q, double power, const GoalSpec& goal);

/// Signed-log bucketing of the normalized QoS error
/// e = (threshold - q) / max_q, clamped to [-1, 1]. The lower half of the
/// buckets covers violations (bucket 0 = worst), the upper half headroom
/// (bucket n/2 contains e = 0). n_buckets must be even and >= 4.
int discretize_qos_error(double q, const GoalSpec& goal, int n_buckets = 16);

/// Bijective encoding of AgentState onto [0, state_count).
class StateSpace {
public:
  StateSpace(int sram_levels, int dram_levels, int qos_buckets);

  int state_count() const { return sram_levels_ * sram_levels_ * dram_levels_ * qos_buckets_; }
  int qos_buckets() const { return qos_buckets_; }
  int sram_levels() const { return sram_levels_; }
  int dram_levels() const { return dram_levels_; }

  int encode(const AgentState& s) const;
  AgentState decode(int id) const;

  /// Knob part of the successor state: indices shifted and clamped to their
  /// domains; the QoS bucket carries over until the next observation.
  AgentState apply_action(const AgentState& s, const ActionVector& a) const;

private:
  int sram_levels_;
  int dram_levels_;
  int qos_buckets_;
};

/// Dense tabular state-action values with a companion eligibility table.
class QTable {
public:
  QTable(int n_states, int n_actions, double init_value = 0.0);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }

  double q(int s, int a) const { return q_[index(s, a)]; }
  double& q(int s, int a) { return q_[index(s, a)]; }
  double elig(int s, int a) const { return e_[index(s, a)]; }

  /// Zero all eligibility traces (episode start).
  void reset_traces();

  /// Greedy action for a state; ties break toward the lowest action id.
  int greedy_action(int s) const;
  double max_q(int s) const;

  /// Accumulating-trace TD step for the on-policy transition
  /// (s, a, r, s2, a2): delta = r + gamma*Q(s2,a2) - Q(s,a); E(s,a) += 1;
  /// then for every pair Q += alpha*delta*E and E *= gamma*lambda.
  void td_lambda_step(int s, int a, double r, int s2, int a2, const LearningParams& p);

  /// One-step off-policy update toward r + gamma * max_a Q(s2, a).
  void q_learning_step(int s, int a, double r, int s2, const LearningParams& p);

  void save(const std::string& path) const;
  static QTable load(const std::string& path);

private:
  int n_states_;
  int n_actions_;
  std::vector<double> q_;
  std::vector<double> e_;

  size_t index(int s, int a) const;
};

/// Epsilon-greedy selection over a state's action row.
int select_action(const QTable& table, int state, double epsilon, InjectorRng& rng);

} // namespace axmem
