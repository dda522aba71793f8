#include "xnet/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "xnet/errors.hpp"

namespace xnet {

using nlohmann::json;

namespace {

// Remaining distances below this count as reached, so accumulated rounding
// in position never costs an extra tick.
constexpr double kSnap = 1e-9;

Vec2 heading_to(Vec2 from, Vec2 to) {
  const Vec2 d = to - from;
  const double n = norm(d);
  return n == 0.0 ? Vec2{} : d * (1.0 / n);
}

void aim(WorldState& w) {
  while (!w.waypoints.empty() && distance(w.position, w.waypoints.front()) <= kSnap) {
    w.waypoints.erase(w.waypoints.begin());
  }
  if (w.waypoints.empty()) {
    w.velocity = {};
    return;
  }
  w.velocity = heading_to(w.position, w.waypoints.front()) * w.speed;
}

Vec2 read_point(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(what + " must be a [x, y] pair");
  }
  const Vec2 p{j[0].get<double>(), j[1].get<double>()};
  if (!finite(p)) throw ValidationError(what + " is not finite");
  return p;
}

}  // namespace

double surface_distance(const WorldObject& object, Vec2 p) {
  return std::max(0.0, distance(object.position, p) - object.radius);
}

WorldState apply_channel(WorldState w, const MotionChannel& channel, const std::vector<Vec2>& waypoints) {
  switch (channel.target_operation) {
    case ChannelOp::move:
    case ChannelOp::restart:
      w.waypoints = waypoints;
      w.speed = channel.speed;
      w.arrival_pending = false;
      aim(w);
      if (w.waypoints.empty()) {
        w.arrival_pending = true;
        w.speed = 0.0;
      }
      break;
    case ChannelOp::suspend:
      w.velocity = {};
      break;
    case ChannelOp::resume:
      aim(w);
      break;
    case ChannelOp::none:
      break;
  }
  return w;
}

std::pair<WorldState, std::vector<WorldEvent>> tick(WorldState w, double dt) {
  if (!(dt > 0.0)) throw ValidationError("tick needs a positive dt");
  std::vector<WorldEvent> events;
  const double end_time = w.time + dt;

  if (w.arrival_pending) {
    w.arrival_pending = false;
    w.time = end_time;
    events.emplace_back(ArrivalEvent{w.position, w.time});
    return {std::move(w), std::move(events)};
  }
  if (w.waypoints.empty() || (w.velocity.x == 0.0 && w.velocity.y == 0.0)) {
    w.time = end_time;
    return {std::move(w), std::move(events)};
  }

  std::vector<std::pair<Vec2, Vec2>> path;
  double remaining = w.speed * dt;
  bool arrived = false;
  while (remaining > 0.0 && !w.waypoints.empty()) {
    const Vec2 target = w.waypoints.front();
    const double d = distance(w.position, target);
    if (d - remaining <= kSnap) {
      path.emplace_back(w.position, target);
      w.position = target;
      remaining = std::max(0.0, remaining - d);
      w.waypoints.erase(w.waypoints.begin());
      arrived = w.waypoints.empty();
    } else {
      const Vec2 next = w.position + heading_to(w.position, target) * remaining;
      path.emplace_back(w.position, next);
      w.position = next;
      remaining = 0.0;
    }
  }
  w.time = end_time;
  if (arrived) {
    w.velocity = {};
    w.speed = 0.0;
  } else {
    aim(w);
  }

  // Proximity is judged along the whole path of the tick, so a fast pass
  // between two samples is still seen. Entries are ordered by where on the
  // path the closest approach happens.
  std::vector<std::pair<double, ProximityEvent>> entered;
  for (const auto& [name, object] : w.objects) {
    double best = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    double s = 0.0;
    for (const auto& [a, b] : path) {
      const Vec2 c = closest_on_segment(object.position, a, b);
      const double dist = surface_distance(object, c);
      if (dist < best) {
        best = dist;
        best_s = s + distance(a, c);
      }
      s += distance(a, b);
    }
    const bool inside_now = surface_distance(object, w.position) < w.proximity_threshold;
    if (best < w.proximity_threshold && !w.in_proximity.contains(name)) {
      entered.emplace_back(best_s, ProximityEvent{object, w.time});
    }
    if (inside_now) {
      w.in_proximity.insert(name);
    } else {
      w.in_proximity.erase(name);
    }
  }
  std::stable_sort(entered.begin(), entered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [s, ev] : entered) events.emplace_back(std::move(ev));
  if (arrived) events.emplace_back(ArrivalEvent{w.position, w.time});
  return {std::move(w), std::move(events)};
}

WorldDefinition world_from_json(const json& j) {
  try {
    WorldDefinition def;
    const auto& robot = j.at("robot");
    def.state.robot_name = robot.value("name", "Robot1");
    def.state.position = read_point(robot.at("position"), "robot.position");
    def.dt = j.value("dt", 0.1);
    if (!(def.dt > 0.0)) throw ValidationError("dt must be positive");
    def.state.proximity_threshold = j.value("proximity_threshold", 1.0);
    if (!(def.state.proximity_threshold >= 0.0)) throw ValidationError("proximity_threshold must be non-negative");
    for (const auto& o : j.value("objects", json::array())) {
      WorldObject object;
      object.name = o.at("name").get<std::string>();
      object.color = o.value("color", "");
      object.shape = o.value("shape", "box");
      object.position = read_point(o.at("position"), "object " + object.name + " position");
      object.radius = o.value("radius", 0.5);
      if (object.name.empty()) throw ValidationError("object without a name");
      if (!(object.radius > 0.0)) throw ValidationError("object " + object.name + " needs a positive radius");
      if (o.value("known", true)) def.known.insert(object.name);
      if (!def.state.objects.emplace(object.name, object).second) {
        throw ValidationError("duplicate object name " + object.name);
      }
    }
    return def;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed world definition: ") + e.what());
  }
}

WorldDefinition load_world_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open world file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return world_from_json(j);
}

json to_json(Vec2 v) { return json::array({v.x, v.y}); }

json snapshot_json(const WorldState& w) {
  json waypoints = json::array();
  for (const auto& p : w.waypoints) waypoints.push_back(to_json(p));
  json objects = json::array();
  for (const auto& [name, o] : w.objects) {
    objects.push_back({{"name", name}, {"color", o.color}, {"shape", o.shape}, {"position", to_json(o.position)},
                       {"radius", o.radius}});
  }
  return {{"time", w.time},
          {"robot",
           {{"name", w.robot_name},
            {"position", to_json(w.position)},
            {"velocity", to_json(w.velocity)},
            {"speed", w.speed},
            {"waypoints", waypoints}}},
          {"objects", objects},
          {"proximity_threshold", w.proximity_threshold}};
}

}  // namespace xnet
