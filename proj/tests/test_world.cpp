#include <cmath>
#include <random>

#include "doctest.h"
#include "xnet/errors.hpp"
#include "xnet/world.hpp"

using namespace xnet;

namespace {

MotionChannel op(ChannelOp o, double speed = 1.0) {
  MotionChannel ch;
  ch.target_operation = o;
  ch.speed = speed;
  return ch;
}

WorldState robot_at(Vec2 p) {
  WorldState w;
  w.position = p;
  return w;
}

std::vector<WorldEvent> run(WorldState& w, int ticks, double dt = 0.1) {
  std::vector<WorldEvent> all;
  for (int i = 0; i < ticks; ++i) {
    auto [next, events] = tick(w, dt);
    w = std::move(next);
    all.insert(all.end(), events.begin(), events.end());
  }
  return all;
}

int count_proximity(const std::vector<WorldEvent>& events, const std::string& name) {
  int n = 0;
  for (const auto& e : events) {
    if (const auto* p = std::get_if<ProximityEvent>(&e); p && p->object.name == name) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("straight move arrives on the closed-form tick") {
  WorldState w = apply_channel(robot_at({0, 0}), op(ChannelOp::move), {{5, 0}});
  CHECK(w.velocity == Vec2{1, 0});
  for (int i = 1; i <= 50; ++i) {
    auto [next, events] = tick(w, 0.1);
    w = std::move(next);
    // x(t) = min(5, 1.0 * t)
    REQUIRE(w.position.x == doctest::Approx(std::min(5.0, 0.1 * i)).epsilon(1e-12));
    REQUIRE(w.position.y == 0.0);
    if (i < 50) REQUIRE(events.empty());
    if (i == 50) {
      REQUIRE(events.size() == 1);
      CHECK(std::holds_alternative<ArrivalEvent>(events.front()));
    }
  }
  CHECK(w.position == Vec2{5, 0});
  CHECK(w.velocity == Vec2{});
  CHECK(run(w, 5).empty());
}

TEST_CASE("stationary robot produces nothing") {
  WorldState w = robot_at({1, 1});
  w.objects["near"] = {"near", "red", "box", {1.2, 1}, 0.1};
  auto [next, events] = tick(w, 0.1);
  CHECK(events.empty());
  CHECK(next.position == Vec2{1, 1});
  CHECK(next.time == doctest::Approx(0.1));
  CHECK_THROWS_AS(tick(w, 0.0), ValidationError);
}

TEST_CASE("waypoints are clamped and leftover distance carries over") {
  WorldState w = apply_channel(robot_at({0, 0}), op(ChannelOp::move, 1.0), {{0.25, 0}, {0.25, 1}});
  auto [next, events] = tick(w, 0.3);
  CHECK(next.position.x == doctest::Approx(0.25));
  CHECK(next.position.y == doctest::Approx(0.05));
  CHECK(next.waypoints.size() == 1);
  CHECK(next.velocity.y == doctest::Approx(1.0));
}

TEST_CASE("empty waypoint list arrives on the next tick") {
  WorldState w = apply_channel(robot_at({3, 3}), op(ChannelOp::move), {});
  CHECK(w.arrival_pending);
  auto [next, events] = tick(w, 0.1);
  REQUIRE(events.size() == 1);
  CHECK(std::get<ArrivalEvent>(events.front()).position == Vec2{3, 3});
  CHECK(next.position == Vec2{3, 3});
}

TEST_CASE("suspend freezes exactly and resume keeps the heading") {
  WorldState w = apply_channel(robot_at({0, 0}), op(ChannelOp::move), {{3, 4}});
  run(w, 7);
  const Vec2 heading = w.velocity;
  const Vec2 frozen = w.position;
  w = apply_channel(w, op(ChannelOp::suspend), {});
  CHECK(w.velocity == Vec2{});
  CHECK(w.waypoints == std::vector<Vec2>{{3, 4}});
  CHECK(run(w, 13).empty());
  CHECK(w.position == frozen);
  w = apply_channel(w, op(ChannelOp::resume), {});
  CHECK(w.velocity.x == doctest::Approx(heading.x));
  CHECK(w.velocity.y == doctest::Approx(heading.y));
  run(w, 100);
  CHECK(w.position == Vec2{3, 4});
}

TEST_CASE("restart switches trajectory and speed") {
  WorldState w = apply_channel(robot_at({0, 0}), op(ChannelOp::move), {{5, 0}});
  run(w, 10);
  w = apply_channel(w, op(ChannelOp::suspend), {});
  w = apply_channel(w, op(ChannelOp::restart, 2.0), {{1, 4}});
  CHECK(norm(w.velocity) == doctest::Approx(2.0));
  CHECK(w.velocity.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.velocity.y > 0);
  CHECK(apply_channel(w, op(ChannelOp::none), {{9, 9}}) == w);
}

TEST_CASE("proximity is reported once per approach") {
  SUBCASE("passing an object near the path") {
    WorldState w = apply_channel(robot_at({0, 0}), op(ChannelOp::move), {{5, 0}});
    w.objects["box"] = {"box", "green", "box", {2.5, 0.6}, 0.3};
    w.objects["far"] = {"far", "red", "box", {2.5, 5.0}, 0.3};
    const auto events = run(w, 60);
    CHECK(count_proximity(events, "box") == 1);
    CHECK(count_proximity(events, "far") == 0);
  }
  SUBCASE("leaving and coming back gives a second event") {
    WorldState w = robot_at({0, 0});
    w.objects["box"] = {"box", "green", "box", {1.5, 0}, 0.2};
    w = apply_channel(w, op(ChannelOp::move), {{1.0, 0}, {-2, 0}, {1.0, 0}});
    const auto events = run(w, 100);
    CHECK(count_proximity(events, "box") == 2);
  }
  SUBCASE("a fast pass between samples is still seen") {
    WorldState w = apply_channel(robot_at({0, 0}), op(ChannelOp::move, 50.0), {{10, 0}});
    w.objects["box"] = {"box", "green", "box", {5.0, 0.5}, 0.1};
    CHECK(count_proximity(run(w, 3), "box") == 1);
  }
}

TEST_CASE("no teleporting and determinism on random drives") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> coord(-10, 10);
  std::uniform_real_distribution<double> speed(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    WorldState w = robot_at({coord(rng), coord(rng)});
    w.objects["o"] = {"o", "red", "box", {coord(rng), coord(rng)}, 0.5};
    std::vector<Vec2> waypoints;
    for (int i = 0; i < 4; ++i) waypoints.push_back({coord(rng), coord(rng)});
    const double v = speed(rng);
    WorldState a = apply_channel(w, op(ChannelOp::move, v), waypoints);
    WorldState b = a;
    for (int i = 0; i < 200; ++i) {
      if (i == 40) {
        a = apply_channel(a, op(ChannelOp::suspend), {});
        b = apply_channel(b, op(ChannelOp::suspend), {});
      }
      if (i == 60) {
        a = apply_channel(a, op(ChannelOp::resume), {});
        b = apply_channel(b, op(ChannelOp::resume), {});
      }
      auto [na, ea] = tick(a, 0.1);
      auto [nb, eb] = tick(b, 0.1);
      REQUIRE(distance(a.position, na.position) <= v * 0.1 + 1e-9);
      const double len = norm(na.velocity);
      REQUIRE((len == 0.0 || std::abs(len - v) < 1e-9));
      REQUIRE(na == nb);
      REQUIRE(ea == eb);
      a = std::move(na);
      b = std::move(nb);
    }
  }
}

TEST_CASE("world definitions") {
  const auto def = world_from_json(nlohmann::json::parse(R"({
    "robot": {"name": "Robot1", "position": [1, 2]},
    "dt": 0.05,
    "objects": [
      {"name": "blue_box", "color": "blue", "position": [5, 0], "radius": 0.3},
      {"name": "crate", "color": "brown", "position": [2, 0], "radius": 0.4, "known": false}
    ]})"));
  CHECK(def.state.position == Vec2{1, 2});
  CHECK(def.dt == 0.05);
  CHECK(def.state.proximity_threshold == 1.0);
  CHECK(def.state.objects.size() == 2);
  CHECK(def.known == std::set<std::string>{"blue_box"});

  CHECK_THROWS_AS(world_from_json(nlohmann::json::parse(R"({"objects": []})")), ValidationError);
  CHECK_THROWS_AS(world_from_json(nlohmann::json::parse(R"({"robot": {"position": [0]}})")), ValidationError);
  CHECK_THROWS_AS(world_from_json(nlohmann::json::parse(
                      R"({"robot": {"position": [0, 0]}, "objects": [{"name": "a", "position": [1, 1]},
                                                                    {"name": "a", "position": [2, 2]}]})")),
                  ValidationError);
  CHECK_THROWS_AS(world_from_json(nlohmann::json::parse(R"({"robot": {"position": [0, 0]}, "dt": 0})")),
                  ValidationError);
  CHECK_THROWS_AS(load_world_file("/nonexistent/world.json"), ValidationError);

  const auto demo = load_world_file(std::string(XNET_SOURCE_DIR) + "/worlds/demo.json");
  CHECK(demo.state.objects.at("blue_box").position == Vec2{5, 0});
  const auto snap = snapshot_json(demo.state);
  CHECK(snap["robot"]["position"] == nlohmann::json::array({0.0, 0.0}));
  CHECK(snap["objects"].size() == demo.state.objects.size());
}
