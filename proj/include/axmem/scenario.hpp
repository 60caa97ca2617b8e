#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "axmem/agent.hpp"
#include "axmem/knobs.hpp"
#include "axmem/memory_sim.hpp"
#include "axmem/scene.hpp"
#include "axmem/workloads.hpp"

namespace axmem {

enum class WorkloadKind { Canny, Kmeans, Blackscholes, Micro };
enum class ControllerKind { Agent, Static };
enum class AlgorithmKind { TdLambda, QLearning };

struct MemoryLayout {
  CacheConfig l1{16 * 1024, 4, 64};
  CacheConfig l2{64 * 1024, 4, 64};
  uint64_t dram_bytes = 2 * 1024 * 1024;
  ApproxRegion region{0, 1536 * 1024};
};

/// Threshold schedule: (frame index, threshold), sorted by frame.
using GoalSchedule = std::vector<std::pair<int, double>>;

/// Everything needed to reproduce one experiment.
struct Scenario {
  WorkloadKind workload = WorkloadKind::Canny;
  int frames = 100;
  int warmup_frames = 0;
  int invocation_period = 5;
  int episode_frames = 100;
  int bootstrap_episodes = 1; // episodes run at invocation period 1

  ControllerKind controller = ControllerKind::Agent;
  AlgorithmKind algorithm = AlgorithmKind::TdLambda;
  int qos_buckets = 16;
  LearningParams learning;

  double max_q = 255.0;
  bool unconstrained = false;
  GoalSchedule goal_schedule{{0, 28.0}};
  GoalSchedule warmup_goal_schedule; // empty: reuse goal_schedule

  int width = 176;
  int height = 144;
  int batch_entries = 4096;
  int micro_words = 512;
  std::vector<SceneSegment> scenes{SceneSegment{}};
  std::vector<SceneSegment> warmup_scenes; // empty: reuse scenes

  // Static baseline knob values; may use any period from the full table.
  double static_l1_volts = 1.0;
  double static_l2_volts = 1.0;
  double static_dram_seconds = 0.1;

  MemoryLayout memory;
  std::string tables_file; // empty: built-in defaults
  int oracle_frames = 9;
  CannyParams canny;
  KmeansParams kmeans;

  static Scenario from_json_text(const std::string& text);
  static Scenario load(const std::string& path);
  std::string to_json_text() const;

  /// Full consistency check; throws ConfigError before any simulation.
  void validate() const;

  KnobDomains knob_domains() const { return KnobDomains::defaults(); }
  ErrorPowerTables tables() const;
  int frame_channels() const { return workload == WorkloadKind::Kmeans ? 3 : 1; }

  /// Threshold active at frame t under a schedule (last entry at or before t).
  static double threshold_at(const GoalSchedule& schedule, int t, double fallback);
};

std::string workload_name(WorkloadKind k);

} // namespace axmem
