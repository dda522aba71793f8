#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "xnet/geometry.hpp"
#include "xnet/world.hpp"

namespace xnet {

struct KnownObject {
  WorldObject object;
  bool verified = false;  // false until a proximity reading confirms the stored position
};

/// The solver's belief about the world, which can lag the simulated truth.
struct WorldModel {
  Vec2 robot_position;
  std::map<std::string, KnownObject> objects;
};

/// Waypoints from `from` (exclusive) to `to`: a straight line when no known
/// object's inflated circle touches the segment, otherwise a two-segment
/// detour around the first blocking object. Objects in `ignore`, and objects
/// whose inflated circle already contains `from`, are not obstacles. Throws
/// PlanningError when `to` lies inside an obstacle or no detour side is clear.
std::vector<Vec2> plan_trajectory(const WorldModel& model, Vec2 from, Vec2 to, double inflation,
                                  const std::set<std::string>& ignore = {});

}  // namespace xnet
