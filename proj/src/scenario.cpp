#include "xnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "xnet/command.hpp"
#include "xnet/errors.hpp"

namespace xnet {

using nlohmann::json;

namespace {

constexpr double kTimeEpsilon = 1e-9;

bool record_matches(const LogRecord& r, const json& a) {
  if (a.contains("kind") && r.kind != a.at("kind").get<std::string>()) return false;
  if (a.contains("match")) {
    for (const auto& [key, value] : a.at("match").items()) {
      if (!r.detail.contains(key) || r.detail.at(key) != value) return false;
    }
  }
  return true;
}

std::string line(const LogRecord& r) { return r.to_json().dump(); }

std::string describe(const json& a) {
  if (a.contains("description")) return a.at("description").get<std::string>();
  std::string text = a.at("type").get<std::string>();
  if (a.contains("kind")) text += " " + a.at("kind").get<std::string>();
  if (a.contains("match")) text += " " + a.at("match").dump();
  if (a.contains("values")) text += " " + a.at("values").dump();
  if (a.contains("kinds")) text += " " + a.at("kinds").dump();
  if (a.contains("object")) text += " " + a.at("object").get<std::string>();
  return text;
}

std::string fmt(Vec2 p) { return to_json(p).dump(); }

double angle_between(Vec2 a, Vec2 b) {
  const double c = std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace

bool ScenarioReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const AssertionResult& r) { return r.passed; });
}

void ScenarioReport::print(std::ostream& out) const {
  out << "scenario " << name << '\n';
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.description << '\n';
    for (const auto& e : r.evidence) out << "    " << e << '\n';
  }
  out << (passed() ? "PASS" : "FAIL") << ' ' << name << '\n';
}

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    Scenario s;
    s.name = j.value("name", "scenario");
    const auto& world = j.at("world");
    s.world = world.is_string() ? load_world_file(base_dir / world.get<std::string>()) : world_from_json(world);
    s.duration = j.value("duration", 10.0);
    if (!(s.duration > 0.0)) throw ValidationError("scenario duration must be positive");
    double last = 0.0;
    for (const auto& e : j.value("script", json::array())) {
      ScriptEntry entry{e.at("at").get<double>(), e.at("command").get<std::string>()};
      if (entry.at < last) throw ValidationError("script times must be non-decreasing");
      last = entry.at;
      s.script.push_back(std::move(entry));
    }
    for (const auto& a : j.value("assertions", json::array())) {
      if (!a.contains("type")) throw ValidationError("assertion without a type: " + a.dump());
      s.assertions.push_back(a);
    }
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j, path.parent_path());
}

ScenarioReport run_scenario(const Scenario& scenario, SolverConfig config, std::ostream* log_sink) {
  Solver solver(scenario.world, config);
  if (log_sink != nullptr) solver.log().set_sink(log_sink);
  ScenarioReport report;
  report.name = scenario.name;
  solver.set_tick_observer([&](const WorldState& w) { report.trajectory.push_back({w.time, w.position, w.velocity}); });
  report.trajectory.push_back({0.0, scenario.world.state.position, scenario.world.state.velocity});

  CommandParser parser;
  const double dt = scenario.world.dt;
  const auto cycles = static_cast<std::size_t>(std::llround(scenario.duration / dt));
  std::size_t next_entry = 0;
  for (std::size_t k = 0; k < cycles; ++k) {
    const double now = static_cast<double>(k) * dt;
    while (next_entry < scenario.script.size() && scenario.script[next_entry].at <= now + kTimeEpsilon) {
      const auto& entry = scenario.script[next_entry++];
      try {
        solver.submit(parser.parse(entry.command));
      } catch (const Error& e) {
        solver.log().append(k, now, "command-rejected", {{"text", entry.command}, {"error", e.what()}});
      }
    }
    solver.cycle();
  }

  report.log = solver.log().records();
  report.final_world = solver.world();
  for (const auto& a : scenario.assertions) report.results.push_back(evaluate_assertion(a, report));
  return report;
}

AssertionResult evaluate_assertion(const json& a, const ScenarioReport& run) {
  AssertionResult result;
  try {
    result.description = describe(a);
    const auto type = a.at("type").get<std::string>();

    if (type == "event") {
      std::vector<const LogRecord*> hits;
      for (const auto& r : run.log) {
        if (record_matches(r, a)) hits.push_back(&r);
      }
      result.passed = !hits.empty();
      if (a.contains("count")) result.passed = hits.size() == a.at("count").get<std::size_t>();
      if (!hits.empty() && a.contains("time")) {
        const double want = a.at("time").get<double>();
        const double tol = a.value("tolerance", 0.0);
        result.passed = result.passed && std::abs(hits.front()->time - want) <= tol + kTimeEpsilon;
        result.evidence.push_back("expected time " + std::to_string(want) + " +/- " + std::to_string(tol));
      }
      for (const auto* h : hits) result.evidence.push_back(line(*h));
      if (hits.empty()) result.evidence.push_back("no matching record");

    } else if (type == "absent") {
      const double from = a.value("from", -std::numeric_limits<double>::infinity());
      const double to = a.value("to", std::numeric_limits<double>::infinity());
      result.passed = true;
      for (const auto& r : run.log) {
        if (r.time + kTimeEpsilon >= from && r.time <= to + kTimeEpsilon && record_matches(r, a)) {
          result.passed = false;
          result.evidence.push_back(line(r));
        }
      }

    } else if (type == "subsequence") {
      const auto field = a.at("field").get<std::string>();
      const auto want = a.at("values");
      std::size_t next = 0;
      json seen = json::array();
      for (const auto& r : run.log) {
        if (!record_matches(r, a) || !r.detail.contains(field)) continue;
        seen.push_back(r.detail.at(field));
        if (next < want.size() && r.detail.at(field) == want[next]) {
          result.evidence.push_back(line(r));
          ++next;
        }
      }
      result.passed = next == want.size();
      result.evidence.push_back("observed " + field + ": " + seen.dump());

    } else if (type == "ordered-once") {
      const auto kinds = a.at("kinds").get<std::vector<std::string>>();
      result.passed = true;
      std::optional<std::uint64_t> previous;
      for (const auto& kind : kinds) {
        std::vector<const LogRecord*> hits;
        for (const auto& r : run.log) {
          if (r.kind == kind) hits.push_back(&r);
        }
        for (const auto* h : hits) result.evidence.push_back(line(*h));
        if (hits.size() != 1) {
          result.passed = false;
          result.evidence.push_back(kind + " appears " + std::to_string(hits.size()) + " times");
          continue;
        }
        if (previous && hits.front()->index <= *previous) result.passed = false;
        previous = hits.front()->index;
      }

    } else if (type == "final-position") {
      Vec2 want;
      if (a.contains("object")) {
        want = run.final_world.objects.at(a.at("object").get<std::string>()).position;
      } else {
        want = {a.at("position").at(0).get<double>(), a.at("position").at(1).get<double>()};
      }
      const double tol = a.value("tolerance", 0.1);
      const double d = distance(run.final_world.position, want);
      result.passed = d <= tol;
      result.evidence.push_back("final " + fmt(run.final_world.position) + ", expected " + fmt(want) +
                                ", distance " + std::to_string(d));

    } else if (type == "position-frozen") {
      const double from = a.at("from").get<double>();
      const double to = a.at("to").get<double>();
      std::optional<Vec2> first;
      std::size_t samples = 0;
      result.passed = true;
      for (const auto& s : run.trajectory) {
        if (s.time + kTimeEpsilon < from || s.time > to + kTimeEpsilon) continue;
        ++samples;
        if (!first) first = s.position;
        if (!(s.position == *first)) {
          result.passed = false;
          result.evidence.push_back("t=" + std::to_string(s.time) + " moved to " + fmt(s.position));
        }
      }
      if (samples < 2) result.passed = false;
      result.evidence.push_back(std::to_string(samples) + " samples" + (first ? " at " + fmt(*first) : ""));

    } else if (type == "heading-preserved") {
      const double before = a.at("before").get<double>();
      const double after = a.at("after").get<double>();
      const double tol = a.value("tolerance", 1e-9);
      std::optional<Vec2> heading_before;
      std::optional<Vec2> heading_after;
      for (const auto& s : run.trajectory) {
        const bool moving = norm(s.velocity) > 0.0;
        if (moving && s.time <= before + kTimeEpsilon) heading_before = s.velocity;
        if (moving && s.time + kTimeEpsilon >= after && !heading_after) heading_after = s.velocity;
      }
      result.passed = heading_before && heading_after && angle_between(*heading_before, *heading_after) <= tol;
      result.evidence.push_back("heading before " + (heading_before ? fmt(*heading_before) : "none") + ", after " +
                                (heading_after ? fmt(*heading_after) : "none"));

    } else {
      result.evidence.push_back("unknown assertion type " + type);
    }
  } catch (const std::exception& e) {
    result.passed = false;
    result.evidence.push_back(std::string("malformed assertion: ") + e.what());
  }
  return result;
}

}  // namespace xnet
