#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "axmem/errors.hpp"
#include "axmem/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw axmem::ConfigError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw axmem::ConfigError("cannot write file: " + path);
  out << text;
}

json summary_json(const axmem::RunSummary& s) {
  return json{{"frames", s.frames},
              {"mean_power", s.mean_power},
              {"mean_q", s.mean_q},
              {"qos_overshoot", s.qos_overshoot},
              {"violations", s.violations},
              {"invocations", s.invocations}};
}

int cmd_run(const std::string& scenario_path, uint64_t seed, const std::string& out_dir,
            const std::string& load_qtable, const std::string& save_qtable) {
  axmem::Scenario scenario = axmem::Scenario::load(scenario_path);
  std::optional<axmem::QTable> warm;
  if (!load_qtable.empty()) warm = axmem::QTable::load(load_qtable);

  axmem::RunResult result = axmem::run_scenario(scenario, seed, warm ? &*warm : nullptr);

  fs::create_directories(out_dir);
  spit((fs::path(out_dir) / "trace.csv").string(), axmem::trace_csv_text(result.trace));
  json meta{{"seed", seed}, {"scenario", json::parse(scenario.to_json_text())}};
  spit((fs::path(out_dir) / "meta.json").string(), meta.dump(2) + "\n");
  spit((fs::path(out_dir) / "summary.json").string(), summary_json(result.summary).dump(2) + "\n");
  if (!save_qtable.empty()) result.qtable.save(save_qtable);

  std::cout << "frames " << result.summary.frames << "  mean_power " << result.summary.mean_power
            << "  mean_q " << result.summary.mean_q << "  overshoot "
            << result.summary.qos_overshoot << "  violations " << result.summary.violations
            << "  invocations " << result.summary.invocations << "\n";
  return 0;
}

int cmd_oracle(const std::string& scenario_path, double threshold, int frames, uint64_t seed) {
  axmem::Scenario scenario = axmem::Scenario::load(scenario_path);
  if (frames > 0) scenario.oracle_frames = frames;
  axmem::OracleResult r = axmem::brute_force_oracle(scenario, threshold, seed);
  std::cout << "config l1=" << r.config.l1.volts << "V l2=" << r.config.l2.volts
            << "V dram=" << r.config.dram.seconds << "s  power " << r.power << "  median_q "
            << r.median_q << "  feasible " << (r.feasible ? "yes" : "no") << "\n";
  return r.feasible ? 0 : 3;
}

int cmd_sweep(const std::string& kind_name, const std::string& scenario_path, uint64_t seed,
              const std::string& out_path) {
  axmem::SweepKind kind;
  if (kind_name == "sensitivity")
    kind = axmem::SweepKind::Sensitivity;
  else if (kind_name == "invocation_period")
    kind = axmem::SweepKind::InvocationPeriod;
  else if (kind_name == "state_space")
    kind = axmem::SweepKind::StateSpace;
  else
    throw axmem::ConfigError("unknown sweep kind: " + kind_name);

  axmem::Scenario scenario = axmem::Scenario::load(scenario_path);
  auto rows = axmem::sweep(kind, scenario, seed);
  if (out_path.empty()) {
    axmem::write_sweep_csv(std::cout, rows);
  } else {
    std::ostringstream ss;
    axmem::write_sweep_csv(ss, rows);
    spit(out_path, ss.str());
  }
  return 0;
}

int cmd_replay(const std::string& trace_path, std::string meta_path) {
  if (meta_path.empty()) meta_path = (fs::path(trace_path).parent_path() / "meta.json").string();
  json meta;
  try {
    meta = json::parse(slurp(meta_path));
  } catch (const json::exception& e) {
    throw axmem::ConfigError(std::string("bad meta file: ") + e.what());
  }
  if (!meta.contains("seed") || !meta.contains("scenario"))
    throw axmem::ConfigError("meta file needs 'seed' and 'scenario'");
  uint64_t seed = meta["seed"].get<uint64_t>();
  axmem::Scenario scenario = axmem::Scenario::from_json_text(meta["scenario"].dump());

  std::string recorded = slurp(trace_path);
  axmem::RunResult result = axmem::run_scenario(scenario, seed);
  std::string regenerated = axmem::trace_csv_text(result.trace);
  if (recorded == regenerated) {
    std::cout << "replay ok: " << result.trace.size() << " frames byte-identical\n";
    return 0;
  }
  std::cerr << "replay mismatch: regenerated trace differs from " << trace_path << "\n";
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"approximate memory hierarchy simulator with a self-optimizing knob controller"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a scenario, writing trace.csv/meta.json/summary.json");
  std::string scenario_path, out_dir, load_qtable, save_qtable;
  uint64_t seed = 1;
  run->add_option("--scenario", scenario_path, "scenario file")->required();
  run->add_option("--seed", seed, "run seed");
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--load-qtable", load_qtable, "warm-start table file");
  run->add_option("--save-qtable", save_qtable, "export the final table");

  auto* oracle = app.add_subcommand("oracle", "brute-force the best feasible config");
  std::string oracle_scenario;
  double threshold = 0.0;
  int oracle_frames = 0;
  uint64_t oracle_seed = 1;
  oracle->add_option("--scenario", oracle_scenario)->required();
  oracle->add_option("--threshold", threshold, "QoS threshold")->required();
  oracle->add_option("--frames", oracle_frames, "segment length (default from scenario)");
  oracle->add_option("--seed", oracle_seed);

  auto* sweep_cmd = app.add_subcommand("sweep", "grid run over one dimension, long-format CSV");
  std::string sweep_kind, sweep_scenario, sweep_out;
  uint64_t sweep_seed = 1;
  sweep_cmd->add_option("--kind", sweep_kind, "sensitivity | invocation_period | state_space")
      ->required();
  sweep_cmd->add_option("--scenario", sweep_scenario)->required();
  sweep_cmd->add_option("--seed", sweep_seed);
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default stdout)");

  auto* replay = app.add_subcommand("replay", "re-run a recorded trace and compare bytes");
  std::string trace_path, meta_path;
  replay->add_option("--trace", trace_path, "trace.csv to validate")->required();
  replay->add_option("--meta", meta_path, "meta.json (default: next to the trace)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario_path, seed, out_dir, load_qtable, save_qtable);
    if (*oracle) return cmd_oracle(oracle_scenario, threshold, oracle_frames, oracle_seed);
    if (*sweep_cmd) return cmd_sweep(sweep_kind, sweep_scenario, sweep_seed, sweep_out);
    if (*replay) return cmd_replay(trace_path, meta_path);
  } catch (const axmem::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
