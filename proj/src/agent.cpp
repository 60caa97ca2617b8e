#include "axmem/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "axmem/errors.hpp"

namespace axmem {

ActionVector ActionVector::from_id(int id) {
  if (id < 0 || id >= kCount) throw DomainError("action id out of range");
  return ActionVector{id / 9 - 1, (id / 3) % 3 - 1, id % 3 - 1};
}

double EpsilonSchedule::after(int invocations) const {
  double e = initial * std::pow(decay, invocations);
  if (e < zero_below) return 0.0;
  return std::max(e, floor);
}

double reward_power(double power, const GoalSpec& goal, bool* clamped) {
  if (clamped) *clamped = false;
  if (power > goal.max_power) {
    if (clamped) *clamped = true;
    return 0.0;
  }
  if (power < 0.0) throw DomainError("power must be non-negative");
  return 1.0 - power / goal.max_power;
}

double reward_quality(double q, const GoalSpec& goal) {
  if (q < 0.0) throw DomainError("qos reading must be non-negative");
  return -(q - goal.q_threshold) / goal.max_q;
}

RewardComponents compute_reward(double q, double power, const GoalSpec& goal) {
  RewardComponents rc;
  rc.reward_p = reward_power(power, goal, &rc.power_clamped);
  rc.reward_q = reward_quality(q, goal);
  rc.violation = q > goal.q_threshold;
  rc.reward = rc.violation ? rc.reward_q : rc.reward_p;
  return rc;
}

int discretize_qos_error(double q, const GoalSpec& goal, int n_buckets) {
  if (n_buckets < 4 || n_buckets % 2 != 0)
    throw DomainError("qos bucket count must be even and >= 4");
  double e = (goal.q_threshold - q) / goal.max_q;
  e = std::clamp(e, -1.0, 1.0);
  int half = n_buckets / 2;
  double m = std::abs(e);
  // Log2-spaced magnitude bins: [0, 2^-(half-1)), ..., [2^-1, 1].
  int bin = 0;
  for (int k = 1; k < half; ++k) {
    if (m >= std::ldexp(1.0, k - half)) bin = k;
  }
  return e >= 0.0 ? half + bin : half - 1 - bin;
}

StateSpace::StateSpace(int sram_levels, int dram_levels, int qos_buckets)
    : sram_levels_(sram_levels), dram_levels_(dram_levels), qos_buckets_(qos_buckets) {
  if (sram_levels < 1 || dram_levels < 1 || qos_buckets < 1)
    throw DomainError("state space dimensions must be positive");
}

int StateSpace::encode(const AgentState& s) const {
  if (s.l1 < 0 || s.l1 >= sram_levels_ || s.l2 < 0 || s.l2 >= sram_levels_ || s.dram < 0 ||
      s.dram >= dram_levels_ || s.qos_bucket < 0 || s.qos_bucket >= qos_buckets_)
    throw DomainError("agent state out of range");
  return ((s.l1 * sram_levels_ + s.l2) * dram_levels_ + s.dram) * qos_buckets_ + s.qos_bucket;
}

AgentState StateSpace::decode(int id) const {
  if (id < 0 || id >= state_count()) throw DomainError("state id out of range");
  AgentState s;
  s.qos_bucket = id % qos_buckets_;
  id /= qos_buckets_;
  s.dram = id % dram_levels_;
  id /= dram_levels_;
  s.l2 = id % sram_levels_;
  s.l1 = id / sram_levels_;
  return s;
}

AgentState StateSpace::apply_action(const AgentState& s, const ActionVector& a) const {
  AgentState out = s;
  out.l1 = std::clamp(s.l1 + a.dl1, 0, sram_levels_ - 1);
  out.l2 = std::clamp(s.l2 + a.dl2, 0, sram_levels_ - 1);
  out.dram = std::clamp(s.dram + a.ddram, 0, dram_levels_ - 1);
  return out;
}

QTable::QTable(int n_states, int n_actions, double init_value)
    : n_states_(n_states), n_actions_(n_actions) {
  if (n_states < 1 || n_actions < 1) throw DomainError("q-table dimensions must be positive");
  q_.assign(static_cast<size_t>(n_states) * n_actions, init_value);
  e_.assign(q_.size(), 0.0);
}

size_t QTable::index(int s, int a) const {
  if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_)
    throw DomainError("q-table index out of range");
  return static_cast<size_t>(s) * n_actions_ + a;
}

void QTable::reset_traces() { std::fill(e_.begin(), e_.end(), 0.0); }

int QTable::greedy_action(int s) const {
  size_t base = index(s, 0);
  int best = 0;
  double best_q = q_[base];
  for (int a = 1; a < n_actions_; ++a) {
    if (q_[base + static_cast<size_t>(a)] > best_q) {
      best_q = q_[base + static_cast<size_t>(a)];
      best = a;
    }
  }
  return best;
}

double QTable::max_q(int s) const {
  size_t base = index(s, 0);
  double best = q_[base];
  for (int a = 1; a < n_actions_; ++a) best = std::max(best, q_[base + static_cast<size_t>(a)]);
  return best;
}

void QTable::td_lambda_step(int s, int a, double r, int s2, int a2, const LearningParams& p) {
  double delta = r + p.gamma * q(s2, a2) - q(s, a);
  if (!std::isfinite(delta)) throw std::runtime_error("non-finite td error; table corrupt");
  e_[index(s, a)] += 1.0;
  double scale = p.alpha * delta;
  double decay = p.gamma * p.lambda;
  for (size_t i = 0; i < q_.size(); ++i) {
    double e = e_[i];
    if (e != 0.0) {
      q_[i] += scale * e;
      e_[i] = e * decay;
    }
  }
}

void QTable::q_learning_step(int s, int a, double r, int s2, const LearningParams& p) {
  double target = r + p.gamma * max_q(s2);
  double delta = target - q(s, a);
  if (!std::isfinite(delta)) throw std::runtime_error("non-finite td error; table corrupt");
  q_[index(s, a)] += p.alpha * delta;
}

void QTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write q-table file: " + path);
  out << n_states_ << ' ' << n_actions_ << '\n';
  out.precision(17);
  for (int s = 0; s < n_states_; ++s)
    for (int a = 0; a < n_actions_; ++a)
      out << s << ' ' << a << ' ' << q_[static_cast<size_t>(s) * n_actions_ + a] << '\n';
}

QTable QTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read q-table file: " + path);
  int n_states = 0, n_actions = 0;
  if (!(in >> n_states >> n_actions)) throw ConfigError("bad q-table header: " + path);
  QTable t(n_states, n_actions);
  int s, a;
  double v;
  while (in >> s >> a >> v) t.q(s, a) = v;
  return t;
}

int select_action(const QTable& table, int state, double epsilon, InjectorRng& rng) {
  if (epsilon > 0.0 && rng.next_unit() < epsilon)
    return static_cast<int>(rng.next_below(static_cast<uint64_t>(table.n_actions())));
  return table.greedy_action(state);
}

} // namespace axmem
