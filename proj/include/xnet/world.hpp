#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "xnet/channel.hpp"
#include "xnet/geometry.hpp"

namespace xnet {

struct WorldObject {
  std::string name;
  std::string color;
  std::string shape = "box";
  Vec2 position;
  double radius = 0.5;

  bool operator==(const WorldObject&) const = default;
};

/// Kinematic robot on an open plane with static circular objects.
struct WorldState {
  std::string robot_name = "Robot1";
  Vec2 position;
  Vec2 velocity;
  double speed = 0.0;  // active speed; kept while suspended so resume can restore it
  std::vector<Vec2> waypoints;
  bool arrival_pending = false;  // a move with no waypoints arrives on the next tick
  std::map<std::string, WorldObject> objects;
  double proximity_threshold = 1.0;
  double time = 0.0;
  std::set<std::string> in_proximity;

  bool operator==(const WorldState&) const = default;
};

struct ProximityEvent {
  WorldObject object;
  double time = 0.0;

  bool operator==(const ProximityEvent&) const = default;
};

struct ArrivalEvent {
  Vec2 position;
  double time = 0.0;

  bool operator==(const ArrivalEvent&) const = default;
};

using WorldEvent = std::variant<ArrivalEvent, ProximityEvent>;

/// Distance from `p` to the object's boundary (0 inside).
double surface_distance(const WorldObject& object, Vec2 p);

/// move/restart replace the waypoints and speed, suspend zeroes the velocity
/// and keeps the waypoints, resume aims the stored speed at the current
/// waypoint again.
WorldState apply_channel(WorldState w, const MotionChannel& channel, const std::vector<Vec2>& waypoints);

/// Advances the robot by dt seconds. Waypoints are clamped onto (never
/// overshot) and leftover step distance carries on toward the next one.
/// Events come out in path order with the arrival last.
std::pair<WorldState, std::vector<WorldEvent>> tick(WorldState w, double dt);

/// World definition file: robot start pose, objects, and the solver-facing
/// settings that travel with a world.
struct WorldDefinition {
  WorldState state;
  std::set<std::string> known;  // objects the solver knows about up front
  double dt = 0.1;
};

/// Throws ValidationError with a description of the problem.
WorldDefinition world_from_json(const nlohmann::json& j);
WorldDefinition load_world_file(const std::filesystem::path& path);

nlohmann::json snapshot_json(const WorldState& w);
nlohmann::json to_json(Vec2 v);

}  // namespace xnet
