#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "xnet/event_log.hpp"
#include "xnet/solver.hpp"
#include "xnet/world.hpp"

namespace xnet {

struct ScriptEntry {
  double at = 0.0;
  std::string command;
};

/// A world, a timed command script, and assertions over the resulting log
/// and trajectory. Runs on a virtual clock, so results are reproducible.
struct Scenario {
  std::string name;
  WorldDefinition world;
  double duration = 10.0;
  std::vector<ScriptEntry> script;
  std::vector<nlohmann::json> assertions;
};

struct TrajectorySample {
  double time = 0.0;
  Vec2 position;
  Vec2 velocity;
};

struct AssertionResult {
  std::string description;
  bool passed = false;
  std::vector<std::string> evidence;  // matching log lines or the values compared
};

struct ScenarioReport {
  std::string name;
  std::vector<AssertionResult> results;
  std::vector<LogRecord> log;
  std::vector<TrajectorySample> trajectory;
  WorldState final_world;

  bool passed() const;
  void print(std::ostream& out) const;
};

/// Throws ValidationError on malformed files. A "world" string is resolved
/// relative to the scenario file; an object is read inline.
Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
Scenario load_scenario_file(const std::filesystem::path& path);

/// Runs the script and evaluates the assertions. `log_sink`, when set,
/// receives the event log as JSON lines.
ScenarioReport run_scenario(const Scenario& scenario, SolverConfig config = {}, std::ostream* log_sink = nullptr);

/// Evaluates one assertion; exposed for tests.
AssertionResult evaluate_assertion(const nlohmann::json& assertion, const ScenarioReport& run);

}  // namespace xnet
