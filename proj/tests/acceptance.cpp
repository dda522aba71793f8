// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "support/oracle.hpp"
#include "support/random_nets.hpp"
#include "support/xnet_inputs.hpp"
#include "xnet/actions.hpp"
#include "xnet/pnml.hpp"
#include "xnet/request_queue.hpp"
#include "xnet/runner.hpp"
#include "xnet/scenario.hpp"

using namespace xnet;
using nlohmann::json;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

// Fails the criterion with a message; later checks still run so the detail
// names the first problem.
struct Checker {
  Outcome out;
  void require(bool ok, const std::string& what) {
    if (!ok && out.passed) {
      out.passed = false;
      out.detail = what;
    }
  }
};

// ---------------------------------------------------------------------------
// Scenario helpers. The worlds and scripts are pinned here rather than read
// from scenarios/ so that editing a shipped scenario cannot move the gate.

const json kDemoObjects = json::parse(R"([
  {"name": "blue_box", "color": "blue", "position": [5, 0], "radius": 0.3},
  {"name": "green_box", "color": "green", "position": [2, 4], "radius": 0.3}
])");

ScenarioReport run_pinned(const json& objects, double duration, const json& script) {
  const json j = {{"name", "acceptance"},
                  {"world",
                   {{"robot", {{"name", "Robot1"}, {"position", {0.0, 0.0}}}},
                    {"dt", 0.1},
                    {"proximity_threshold", 1.0},
                    {"objects", objects}}},
                  {"duration", duration},
                  {"script", script}};
  return run_scenario(scenario_from_json(j, "."));
}

std::vector<const LogRecord*> records(const ScenarioReport& r, std::string_view kind) {
  std::vector<const LogRecord*> out;
  for (const auto& rec : r.log) {
    if (rec.kind == kind) out.push_back(&rec);
  }
  return out;
}

bool has_subsequence(const std::vector<std::string>& seen, const std::vector<std::string>& want) {
  std::size_t next = 0;
  for (const auto& s : seen) {
    if (next < want.size() && s == want[next]) ++next;
  }
  return next == want.size();
}

std::string join(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out + "]";
}

std::vector<std::string> channel_ops(const ScenarioReport& r) {
  std::vector<std::string> out;
  for (const auto* rec : records(r, "channel-op")) out.push_back(rec->detail.at("operation"));
  return out;
}

std::vector<std::string> controller_firings(const ScenarioReport& r) {
  std::vector<std::string> out;
  for (const auto* rec : records(r, "transition-fired")) {
    if (rec->detail.at("controller").get<bool>()) out.push_back(rec->detail.at("logical"));
  }
  return out;
}

std::optional<double> done_time(const ScenarioReport& r) {
  for (const auto* rec : records(r, "place-changed")) {
    if (rec->detail.at("place") == "Done" && rec->detail.at("count").get<TokenCount>() > 0) return rec->time;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Outcome firing_oracle() {
  Checker c;
  std::mt19937 rng(2024);
  constexpr std::size_t kDepth = 8;
  std::size_t checked = 0;
  std::size_t fires = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto [net, initial] = testing::random_net(rng);  // <= 8 places, <= 8 transitions, <= 4 tokens, weights <= 2
    const oracle::DenseNet dense(net);
    const auto reachable = oracle::reachable_within(dense, dense.to_vec(initial), kDepth);

    auto conserved = [&](const Marking& before, const Marking& after, const TransitionId& t) {
      const std::size_t ti = static_cast<std::size_t>(
          std::find(dense.transitions.begin(), dense.transitions.end(), t) - dense.transitions.begin());
      const auto b = dense.to_vec(before);
      const auto a = dense.to_vec(after);
      for (std::size_t p = 0; p < dense.places.size(); ++p) {
        if (a[p] != b[p] - dense.pre[ti][p] + dense.post[ti][p]) return false;
      }
      ++fires;
      return true;
    };

    // Random walks through the firing function.
    for (int walk = 0; walk < 5; ++walk) {
      Marking m = initial;
      for (std::size_t step = 0; step < kDepth; ++step) {
        const auto enabled = enabled_set(net, m);
        if (enabled.empty()) break;
        const auto& t = enabled[rng() % enabled.size()];
        const Marking next = fire(net, m, t);
        c.require(conserved(m, next, t), "conservation violated by " + t + " in net " + std::to_string(trial));
        c.require(reachable.contains(dense.to_vec(next)), "unreachable marking in net " + std::to_string(trial));
        ++checked;
        m = next;
      }
    }

    // The runner's own scheduling.
    auto runner = Runner::create(net, initial, {});
    auto events = runner->subscribe_events();
    runner->start(ExecutionMode::stepped);
    Marking before = runner->marking();
    for (std::size_t step = 0; step < kDepth && runner->step(); ++step) {
      const Marking after = runner->marking();
      std::optional<TransitionId> fired;
      for (const auto& ev : events.drain()) {
        if (ev.kind == RunnerEventKind::transition_fired) fired = ev.transition;
      }
      c.require(fired.has_value(), "runner step without a firing in net " + std::to_string(trial));
      if (fired) c.require(conserved(before, after, *fired), "runner broke conservation in net " + std::to_string(trial));
      c.require(reachable.contains(dense.to_vec(after)), "runner reached an unreachable marking");
      ++checked;
      before = after;
    }
    runner->stop();
  }
  if (c.out.passed) {
    c.out.detail = "200 nets, " + std::to_string(checked) + " engine markings in the BFS set, " +
                   std::to_string(fires) + " fires conserve tokens";
  }
  return c.out;
}

Outcome join_exactness() {
  Checker c;
  const PetriNet net({{"A"}, {"B"}, {"C"}}, {{"t"}}, {{"A", "t", 1}, {"B", "t", 1}, {"t", "C", 1}});
  auto runner = Runner::create(net, Marking{{"A", 1}, {"B", 1}, {"C", 0}}, {});
  runner->start(ExecutionMode::threaded);
  c.require(runner->wait_quiescent(std::chrono::seconds(5)), "runner did not become quiescent");
  const Marking m = runner->marking();
  runner->stop();
  c.require(runner->fired_count() == 1, "fired " + std::to_string(runner->fired_count()) + " times");
  c.require(m["A"] == 0 && m["B"] == 0 && m["C"] == 1, "final marking A=" + std::to_string(m["A"]) +
                                                           " B=" + std::to_string(m["B"]) +
                                                           " C=" + std::to_string(m["C"]));
  c.require(enabled_set(net, m).empty(), "enabled set not empty");
  if (c.out.passed) c.out.detail = "fired once; A=0 B=0 C=1; enabled set empty";
  return c.out;
}

Outcome xnet_safety() {
  Checker c;
  const auto xnet = build_move_xnet();
  const oracle::DenseNet dense(xnet.net);
  const auto explored = oracle::explore_with_inputs(dense, dense.to_vec(xnet.initial), testing::move_xnet_inputs(), 6);
  const MoveXnetPlaces places;
  const std::vector<int> states{dense.place_index(places.ready), dense.place_index(places.ongoing),
                                dense.place_index(places.suspended), dense.place_index(places.done)};
  for (const auto& m : explored.markings) {
    for (std::size_t p = 0; p < m.size(); ++p) {
      c.require(m[p] <= 1, dense.places[p] + " holds " + std::to_string(m[p]) + " tokens");
    }
    int marked = 0;
    for (int s : states) marked += m[static_cast<std::size_t>(s)] > 0 ? 1 : 0;
    c.require(marked <= 1, "more than one state place marked");
  }
  if (c.out.passed) {
    c.out.detail = std::to_string(explored.states) + " states, " + std::to_string(explored.markings.size()) +
                   " markings over input schedules of length <= 6";
  }
  return c.out;
}

Outcome normal_move() {
  Checker c;
  const auto r = run_pinned(kDemoObjects, 8.0, json::parse(R"([{"at": 0, "command": "Robot1, move to the blue box!"}])"));
  const auto done = done_time(r);
  c.require(done.has_value(), "no Done event");
  if (done) c.require(std::abs(*done - 5.0) <= 0.2, "Done at " + std::to_string(*done));
  const double d = distance(r.final_world.position, {5, 0});
  c.require(d <= 0.1, "final distance " + std::to_string(d));
  if (c.out.passed) c.out.detail = "Done at t=" + std::to_string(*done) + ", final distance " + std::to_string(d);
  return c.out;
}

Outcome suspend_resume() {
  Checker c;
  const auto r = run_pinned(kDemoObjects, 8.0, json::parse(R"([
    {"at": 0.0, "command": "Robot1, move to the blue box!"},
    {"at": 1.0, "command": "Robot1, continue moving!"},
    {"at": 2.0, "command": "Robot1, stop moving!"},
    {"at": 3.0, "command": "Robot1, continue moving!"}])"));

  // Exact freeze across the suspended interval.
  std::optional<Vec2> frozen;
  std::size_t samples = 0;
  for (const auto& s : r.trajectory) {
    if (s.time < 2.0 - 1e-9 || s.time > 3.0 + 1e-9) continue;
    if (!frozen) frozen = s.position;
    c.require(s.position == *frozen, "moved while suspended at t=" + std::to_string(s.time));
    ++samples;
  }
  c.require(samples >= 10, "only " + std::to_string(samples) + " samples in the suspended interval");

  // Heading: last velocity before the stop, first velocity after the resume.
  std::optional<Vec2> before;
  std::optional<Vec2> after;
  for (const auto& s : r.trajectory) {
    if (norm(s.velocity) == 0.0) continue;
    if (s.time <= 2.0 + 1e-9) before = s.velocity;
    if (s.time >= 3.0 - 1e-9 && !after) after = s.velocity;
  }
  c.require(before && after, "no motion before or after suspension");
  if (before && after) {
    const double angle = std::atan2(before->x * after->y - before->y * after->x, dot(*before, *after));
    c.require(std::abs(angle) <= 1e-9, "heading changed by " + std::to_string(angle) + " rad");
  }

  // Between receiving the first continue and the stop, no controller transition fires.
  const auto received = records(r, "actspec-received");
  c.require(received.size() == 4, "expected 4 received requests");
  if (received.size() == 4) {
    for (const auto* rec : records(r, "transition-fired")) {
      if (rec->index > received[1]->index && rec->index < received[2]->index && rec->detail.at("controller")) {
        c.require(false, "controller transition " + rec->detail.at("logical").get<std::string>() +
                             " fired after resume-while-moving");
      }
    }
  }
  if (c.out.passed) {
    c.out.detail = std::to_string(samples) + " frozen samples, heading preserved, resume-while-moving ignored";
  }
  return c.out;
}

Outcome redirect() {
  Checker c;
  const auto r = run_pinned(kDemoObjects, 10.0, json::parse(R"([
    {"at": 0.0, "command": "Robot1, move to the blue box!"},
    {"at": 2.0, "command": "Robot1, dash to the green box!"}])"));
  const auto ops = channel_ops(r);
  const auto ctl = controller_firings(r);
  c.require(has_subsequence(ops, {"move", "suspend", "restart"}), "channel ops " + join(ops));
  c.require(has_subsequence(ctl, {"SuspendT", "RestartT", "Start"}), "controller firings " + join(ctl));
  const double d = distance(r.final_world.position, {2, 4});
  c.require(d <= 0.1, "final distance to green box " + std::to_string(d));
  if (c.out.passed) c.out.detail = "channel " + join(ops) + ", controller " + join(ctl);
  return c.out;
}

Outcome interrupt_ordering() {
  Checker c;
  json objects = kDemoObjects;
  objects.push_back(json::parse(
      R"({"name": "crate", "color": "brown", "position": [2.5, 0], "radius": 0.4, "known": false})"));
  const auto r = run_pinned(objects, 10.0, json::parse(R"([{"at": 0, "command": "Robot1, move to the blue box!"}])"));
  std::vector<std::uint64_t> indices;
  for (const auto* kind : {"model-update", "notification", "replan"}) {
    const auto hits = records(r, kind);
    c.require(hits.size() == 1, std::string(kind) + " appears " + std::to_string(hits.size()) + " times");
    if (!hits.empty()) indices.push_back(hits.front()->index);
  }
  c.require(indices.size() == 3 && indices[0] < indices[1] && indices[1] < indices[2], "records out of order");
  if (c.out.passed) {
    c.out.detail = "model-update #" + std::to_string(indices[0]) + " < notification #" + std::to_string(indices[1]) +
                   " < replan #" + std::to_string(indices[2]);
  }
  return c.out;
}

Outcome request_latency() {
  Checker c;
  // Two places passing one token back and forth: always exactly one enabled transition.
  const PetriNet net({{"a"}, {"b"}}, {{"t1"}, {"t2"}}, {{"a", "t1", 1}, {"t1", "b", 1}, {"b", "t2", 1}, {"t2", "a", 1}});
  std::mt19937 rng(99);
  std::uint64_t worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::atomic<std::uint64_t> firings{0};
    RequestQueue queue([&firings] { return firings.load(); });
    std::mutex mutex;
    std::condition_variable cv;
    std::optional<std::pair<std::uint64_t, std::uint64_t>> seen;

    auto runner = Runner::create(net, Marking{{"a", 1}, {"b", 0}}, {});
    attach_request_polling(*runner, queue, firings, [&](QueuedRequest request, std::uint64_t dequeued_at) {
      std::lock_guard lock(mutex);
      seen = {request.enqueued_at, dequeued_at};
      cv.notify_all();
    });
    runner->start(ExecutionMode::threaded);
    std::this_thread::sleep_for(std::chrono::microseconds(rng() % 500));
    ActSpec spec;
    spec.agent = "Robot1";
    spec.predicate = Predicate::stop;
    queue.push(spec);
    {
      std::unique_lock lock(mutex);
      cv.wait_for(lock, std::chrono::seconds(5), [&] { return seen.has_value(); });
    }
    runner->stop();
    c.require(seen.has_value(), "request never dequeued in trial " + std::to_string(trial));
    if (!seen) continue;
    const auto [enq, deq] = *seen;
    c.require(enq > 0, "runner had not started firing in trial " + std::to_string(trial));
    c.require(deq < enq + 2, "enqueued at firing " + std::to_string(enq) + ", dequeued at " + std::to_string(deq));
    worst = std::max(worst, deq - enq);
  }
  if (c.out.passed) c.out.detail = "100 trials, worst dequeue - enqueue = " + std::to_string(worst) + " firings";
  return c.out;
}

Outcome pnml_round_trip() {
  Checker c;
  const std::filesystem::path dir = std::filesystem::path(XNET_SOURCE_DIR) / "fixtures";
  for (const auto* name : {"move_xnet.pnml", "standard_controller.pnml"}) {
    const auto doc = load_pnml_file(dir / name);
    c.require(parse_pnml(serialize_pnml(doc)).structurally_equal(doc), std::string(name) + " did not round-trip");
  }
  std::mt19937 rng(5);
  testing::RandomNetLimits limits;
  limits.extension_kinds = true;
  for (int i = 0; i < 50; ++i) {
    auto [net, initial] = testing::random_net(rng, limits);
    const auto doc = make_document("r" + std::to_string(i), net, initial);
    c.require(parse_pnml(serialize_pnml(doc)).structurally_equal(doc), "random net " + std::to_string(i));
  }
  if (c.out.passed) c.out.detail = "2 fixtures and 50 random nets";
  return c.out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"firing-semantics-oracle", firing_oracle},
      {"join-net-exactness", join_exactness},
      {"move-xnet-1-safety-and-exclusivity", xnet_safety},
      {"normal-move-scenario", normal_move},
      {"suspend-resume-scenario", suspend_resume},
      {"redirect-scenario", redirect},
      {"interrupt-protocol-ordering", interrupt_ordering},
      {"request-latency", request_latency},
      {"pnml-round-trip", pnml_round_trip},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    if (!out.passed) ++failed;
    std::cout << (out.passed ? "PASS " : "FAIL ") << name << ": " << out.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
