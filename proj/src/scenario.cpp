#include "axmem/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "axmem/errors.hpp"
#include <json.hpp>

namespace axmem {

using nlohmann::json;

namespace {

WorkloadKind workload_from_name(const std::string& name) {
  if (name == "canny") return WorkloadKind::Canny;
  if (name == "kmeans") return WorkloadKind::Kmeans;
  if (name == "blackscholes") return WorkloadKind::Blackscholes;
  if (name == "micro") return WorkloadKind::Micro;
  throw ConfigError("unknown workload: " + name);
}

GoalSchedule schedule_from_json(const json& j) {
  GoalSchedule out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("schedule entries are [frame, threshold]");
    out.emplace_back(e[0].get<int>(), e[1].get<double>());
  }
  return out;
}

json schedule_to_json(const GoalSchedule& s) {
  json j = json::array();
  for (const auto& [frame, thr] : s) j.push_back(json::array({frame, thr}));
  return j;
}

SceneSegment segment_from_json(const json& j) {
  SceneSegment s;
  if (j.contains("frames")) s.frames = j["frames"].get<int>();
  if (j.contains("base_level")) s.base_level = j["base_level"].get<int>();
  if (j.contains("texture_amp")) s.texture_amp = j["texture_amp"].get<int>();
  if (j.contains("texture_cell")) s.texture_cell = j["texture_cell"].get<int>();
  if (j.contains("shapes")) s.shapes = j["shapes"].get<int>();
  if (j.contains("shape_speed")) s.shape_speed = j["shape_speed"].get<int>();
  if (j.contains("noise_amp")) s.noise_amp = j["noise_amp"].get<int>();
  if (j.contains("style")) s.style = j["style"].get<uint64_t>();
  return s;
}

json segment_to_json(const SceneSegment& s) {
  return json{{"frames", s.frames},         {"base_level", s.base_level},
              {"texture_amp", s.texture_amp}, {"texture_cell", s.texture_cell},
              {"shapes", s.shapes},         {"shape_speed", s.shape_speed},
              {"noise_amp", s.noise_amp},   {"style", s.style}};
}

std::vector<SceneSegment> segments_from_json(const json& j) {
  std::vector<SceneSegment> out;
  for (const auto& e : j) out.push_back(segment_from_json(e));
  return out;
}

} // namespace

std::string workload_name(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::Canny: return "canny";
    case WorkloadKind::Kmeans: return "kmeans";
    case WorkloadKind::Blackscholes: return "blackscholes";
    case WorkloadKind::Micro: return "micro";
  }
  return "?";
}

Scenario Scenario::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }

  Scenario s;
  try {
    if (j.contains("workload")) s.workload = workload_from_name(j["workload"].get<std::string>());
    if (j.contains("frames")) s.frames = j["frames"].get<int>();
    if (j.contains("warmup_frames")) s.warmup_frames = j["warmup_frames"].get<int>();
    if (j.contains("invocation_period")) s.invocation_period = j["invocation_period"].get<int>();
    if (j.contains("episode_frames")) s.episode_frames = j["episode_frames"].get<int>();
    if (j.contains("bootstrap_episodes"))
      s.bootstrap_episodes = j["bootstrap_episodes"].get<int>();

    if (j.contains("controller")) {
      std::string c = j["controller"].get<std::string>();
      if (c == "agent")
        s.controller = ControllerKind::Agent;
      else if (c == "static")
        s.controller = ControllerKind::Static;
      else
        throw ConfigError("unknown controller: " + c);
    }
    if (j.contains("algorithm")) {
      std::string a = j["algorithm"].get<std::string>();
      if (a == "td_lambda")
        s.algorithm = AlgorithmKind::TdLambda;
      else if (a == "q_learning")
        s.algorithm = AlgorithmKind::QLearning;
      else
        throw ConfigError("unknown algorithm: " + a);
    }
    if (j.contains("qos_buckets")) s.qos_buckets = j["qos_buckets"].get<int>();

    if (j.contains("agent_params")) {
      const auto& p = j["agent_params"];
      if (p.contains("alpha")) s.learning.alpha = p["alpha"].get<double>();
      if (p.contains("gamma")) s.learning.gamma = p["gamma"].get<double>();
      if (p.contains("lambda")) s.learning.lambda = p["lambda"].get<double>();
      if (p.contains("q_init")) s.learning.q_init = p["q_init"].get<double>();
      if (p.contains("epsilon")) {
        const auto& e = p["epsilon"];
        if (e.contains("initial")) s.learning.epsilon.initial = e["initial"].get<double>();
        if (e.contains("decay")) s.learning.epsilon.decay = e["decay"].get<double>();
        if (e.contains("floor")) s.learning.epsilon.floor = e["floor"].get<double>();
        if (e.contains("zero_below")) s.learning.epsilon.zero_below = e["zero_below"].get<double>();
      }
    }

    if (j.contains("goal")) {
      const auto& g = j["goal"];
      if (g.contains("max_q")) s.max_q = g["max_q"].get<double>();
      if (g.contains("unconstrained")) s.unconstrained = g["unconstrained"].get<bool>();
      if (g.contains("schedule")) s.goal_schedule = schedule_from_json(g["schedule"]);
      if (g.contains("warmup_schedule"))
        s.warmup_goal_schedule = schedule_from_json(g["warmup_schedule"]);
    }

    if (j.contains("input")) {
      const auto& in = j["input"];
      if (in.contains("width")) s.width = in["width"].get<int>();
      if (in.contains("height")) s.height = in["height"].get<int>();
      if (in.contains("entries")) s.batch_entries = in["entries"].get<int>();
      if (in.contains("micro_words")) s.micro_words = in["micro_words"].get<int>();
      if (in.contains("scenes")) s.scenes = segments_from_json(in["scenes"]);
      if (in.contains("warmup_scenes")) s.warmup_scenes = segments_from_json(in["warmup_scenes"]);
    }

    if (j.contains("static_config")) {
      const auto& c = j["static_config"];
      if (c.contains("l1_volts")) s.static_l1_volts = c["l1_volts"].get<double>();
      if (c.contains("l2_volts")) s.static_l2_volts = c["l2_volts"].get<double>();
      if (c.contains("dram_seconds")) s.static_dram_seconds = c["dram_seconds"].get<double>();
    }

    if (j.contains("memory")) {
      const auto& m = j["memory"];
      auto& mem = s.memory;
      if (m.contains("l1_kb")) mem.l1.size_bytes = m["l1_kb"].get<uint32_t>() * 1024;
      if (m.contains("l2_kb")) mem.l2.size_bytes = m["l2_kb"].get<uint32_t>() * 1024;
      if (m.contains("assoc")) {
        mem.l1.associativity = m["assoc"].get<uint32_t>();
        mem.l2.associativity = m["assoc"].get<uint32_t>();
      }
      if (m.contains("line_bytes")) {
        mem.l1.line_bytes = m["line_bytes"].get<uint32_t>();
        mem.l2.line_bytes = m["line_bytes"].get<uint32_t>();
      }
      if (m.contains("dram_kb")) mem.dram_bytes = m["dram_kb"].get<uint64_t>() * 1024;
      if (m.contains("approx_kb"))
        mem.region = ApproxRegion{0, m["approx_kb"].get<uint64_t>() * 1024};
      if (m.contains("approx_start")) mem.region.start = m["approx_start"].get<uint64_t>();
      if (m.contains("approx_end")) mem.region.end = m["approx_end"].get<uint64_t>();
    }

    if (j.contains("tables_file")) s.tables_file = j["tables_file"].get<std::string>();
    if (j.contains("oracle_frames")) s.oracle_frames = j["oracle_frames"].get<int>();
    if (j.contains("canny")) {
      const auto& c = j["canny"];
      if (c.contains("high_threshold")) s.canny.high_threshold = c["high_threshold"].get<int>();
      if (c.contains("low_threshold")) s.canny.low_threshold = c["low_threshold"].get<int>();
    }
    if (j.contains("kmeans")) {
      const auto& k = j["kmeans"];
      if (k.contains("clusters")) s.kmeans.clusters = k["clusters"].get<int>();
      if (k.contains("max_iterations")) s.kmeans.max_iterations = k["max_iterations"].get<int>();
      if (k.contains("init_seed")) s.kmeans.init_seed = k["init_seed"].get<uint64_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad scenario field: ") + e.what());
  }

  s.validate();
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string Scenario::to_json_text() const {
  json j;
  j["workload"] = workload_name(workload);
  j["frames"] = frames;
  j["warmup_frames"] = warmup_frames;
  j["invocation_period"] = invocation_period;
  j["episode_frames"] = episode_frames;
  j["bootstrap_episodes"] = bootstrap_episodes;
  j["controller"] = controller == ControllerKind::Agent ? "agent" : "static";
  j["algorithm"] = algorithm == AlgorithmKind::TdLambda ? "td_lambda" : "q_learning";
  j["qos_buckets"] = qos_buckets;
  j["agent_params"] = {{"alpha", learning.alpha},
                       {"gamma", learning.gamma},
                       {"lambda", learning.lambda},
                       {"q_init", learning.q_init},
                       {"epsilon",
                        {{"initial", learning.epsilon.initial},
                         {"decay", learning.epsilon.decay},
                         {"floor", learning.epsilon.floor},
                         {"zero_below", learning.epsilon.zero_below}}}};
  j["goal"] = {{"max_q", max_q},
               {"unconstrained", unconstrained},
               {"schedule", schedule_to_json(goal_schedule)},
               {"warmup_schedule", schedule_to_json(warmup_goal_schedule)}};
  json scenes_json = json::array();
  for (const auto& seg : scenes) scenes_json.push_back(segment_to_json(seg));
  json warmup_json = json::array();
  for (const auto& seg : warmup_scenes) warmup_json.push_back(segment_to_json(seg));
  j["input"] = {{"width", width},   {"height", height},       {"entries", batch_entries},
                {"micro_words", micro_words}, {"scenes", scenes_json}, {"warmup_scenes", warmup_json}};
  j["static_config"] = {{"l1_volts", static_l1_volts},
                        {"l2_volts", static_l2_volts},
                        {"dram_seconds", static_dram_seconds}};
  j["memory"] = {{"l1_kb", memory.l1.size_bytes / 1024},
                 {"l2_kb", memory.l2.size_bytes / 1024},
                 {"assoc", memory.l1.associativity},
                 {"line_bytes", memory.l1.line_bytes},
                 {"dram_kb", memory.dram_bytes / 1024},
                 {"approx_start", memory.region.start},
                 {"approx_end", memory.region.end}};
  j["tables_file"] = tables_file;
  j["oracle_frames"] = oracle_frames;
  j["canny"] = {{"high_threshold", canny.high_threshold}, {"low_threshold", canny.low_threshold}};
  j["kmeans"] = {{"clusters", kmeans.clusters},
                 {"max_iterations", kmeans.max_iterations},
                 {"init_seed", kmeans.init_seed}};
  return j.dump(2);
}

ErrorPowerTables Scenario::tables() const {
  return tables_file.empty() ? ErrorPowerTables::defaults() : ErrorPowerTables::load(tables_file);
}

double Scenario::threshold_at(const GoalSchedule& schedule, int t, double fallback) {
  double thr = fallback;
  for (const auto& [frame, value] : schedule) {
    if (frame <= t) thr = value;
    else break;
  }
  return thr;
}

void Scenario::validate() const {
  if (frames <= 0) throw ConfigError("frame budget must be positive");
  if (warmup_frames < 0) throw ConfigError("warmup frame count must be non-negative");
  if (invocation_period <= 0) throw ConfigError("invocation period must be positive");
  if (bootstrap_episodes < 0) throw ConfigError("bootstrap episode count must be non-negative");
  if (episode_frames <= 0) throw ConfigError("episode length must be positive");
  if (qos_buckets < 4 || qos_buckets % 2 != 0)
    throw ConfigError("qos bucket count must be even and >= 4");
  if (max_q <= 0) throw ConfigError("max_q must be positive");
  if (!unconstrained && goal_schedule.empty())
    throw ConfigError("constrained runs need a goal schedule");
  if (!std::is_sorted(goal_schedule.begin(), goal_schedule.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; }))
    throw ConfigError("goal schedule must be sorted by frame");
  for (const auto& [frame, thr] : goal_schedule) {
    (void)frame;
    if (thr < 0 || thr > max_q) throw ConfigError("thresholds must lie in [0, max_q]");
  }
  if (scenes.empty()) throw ConfigError("scenario needs at least one scene segment");
  if (width <= 0 || height <= 0) throw ConfigError("frame dimensions must be positive");
  if (batch_entries <= 0) throw ConfigError("batch entry count must be positive");
  if (micro_words <= 0) throw ConfigError("micro word count must be positive");

  auto learning_ok = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!learning_ok(learning.alpha) || !learning_ok(learning.gamma))
    throw ConfigError("alpha and gamma must lie in (0, 1]");
  if (learning.lambda < 0.0 || learning.lambda > 1.0)
    throw ConfigError("lambda must lie in [0, 1]");
  if (learning.epsilon.initial < 0.0 || learning.epsilon.initial > 1.0)
    throw ConfigError("epsilon must lie in [0, 1]");

  ErrorPowerTables t = tables();
  KnobDomains domains = knob_domains();
  for (int i = 0; i < domains.dram_levels(); ++i) {
    if (!t.has_dram_period(domains.dram_level(i).seconds))
      throw ConfigError("agent refresh period missing from the full table");
  }
  if (controller == ControllerKind::Static) {
    try {
      t.sram_ber_volts(static_l1_volts, AccessKind::Read);
      t.sram_ber_volts(static_l2_volts, AccessKind::Read);
      t.dram_error_rate_seconds(static_dram_seconds);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("static config invalid: ") + e.what());
    }
  }

  // Buffer fit: workload data must sit inside the approximate region.
  uint64_t region_bytes = memory.region.end > memory.region.start
                              ? memory.region.end - memory.region.start
                              : 0;
  uint64_t line = memory.l1.line_bytes;
  auto round_line = [line](uint64_t b) { return (b + line - 1) / line * line; };
  uint64_t need = 0;
  switch (workload) {
    case WorkloadKind::Canny:
      need = round_line(static_cast<uint64_t>(width) * height);
      break;
    case WorkloadKind::Kmeans:
      need = round_line(static_cast<uint64_t>(width) * height * 3);
      break;
    case WorkloadKind::Blackscholes:
      // Parameter and result buffers, each line-aligned.
      need = round_line(static_cast<uint64_t>(batch_entries) * sizeof(OptionRecord)) +
             round_line(static_cast<uint64_t>(batch_entries) * 4);
      break;
    case WorkloadKind::Micro:
      need = round_line(static_cast<uint64_t>(micro_words) * 8);
      break;
  }
  if (need > region_bytes)
    throw ConfigError("workload buffers do not fit in the approximate region");
  if (oracle_frames <= 0) throw ConfigError("oracle segment length must be positive");
}

} // namespace axmem
