#include "xnet/planner.hpp"

#include <algorithm>
#include <optional>

#include "xnet/errors.hpp"

namespace xnet {

namespace {

struct Obstacle {
  std::string name;
  Vec2 center;
  double radius;  // inflated
};

bool clear(const std::vector<Obstacle>& obstacles, Vec2 a, Vec2 b) {
  return std::all_of(obstacles.begin(), obstacles.end(),
                     [&](const Obstacle& o) { return segment_distance(o.center, a, b) >= o.radius; });
}

// Smallest perpendicular offset (to within bisection precision) at which the
// two legs through the detour point clear `o`.
std::optional<Vec2> detour_point(const Obstacle& o, Vec2 from, Vec2 to, Vec2 side) {
  const Vec2 foot = closest_on_segment(o.center, from, to);
  auto legs_clear = [&](double d) {
    const Vec2 w = foot + side * d;
    return segment_distance(o.center, from, w) >= o.radius && segment_distance(o.center, w, to) >= o.radius;
  };
  double lo = 0.0;
  double hi = o.radius;
  for (int i = 0; i < 60 && !legs_clear(hi); ++i) hi *= 2.0;
  if (!legs_clear(hi)) return std::nullopt;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (legs_clear(mid) ? hi : lo) = mid;
  }
  return foot + side * hi;
}

}  // namespace

std::vector<Vec2> plan_trajectory(const WorldModel& model, Vec2 from, Vec2 to, double inflation,
                                  const std::set<std::string>& ignore) {
  if (!finite(from) || !finite(to)) throw PlanningError("trajectory endpoints must be finite");
  if (distance(from, to) <= 1e-9) return {};

  std::vector<Obstacle> obstacles;
  for (const auto& [name, known] : model.objects) {
    if (ignore.contains(name)) continue;
    const Obstacle o{name, known.object.position, known.object.radius + inflation};
    if (distance(o.center, from) < o.radius) continue;
    if (distance(o.center, to) < o.radius) throw PlanningError("goal lies inside " + name);
    obstacles.push_back(o);
  }
  if (clear(obstacles, from, to)) return {to};

  // First blocking obstacle along the direction of travel.
  const Vec2 dir = to - from;
  const Obstacle* first = nullptr;
  double first_s = 0.0;
  for (const auto& o : obstacles) {
    if (segment_distance(o.center, from, to) >= o.radius) continue;
    const double s = dot(o.center - from, dir);
    if (first == nullptr || s < first_s) {
      first = &o;
      first_s = s;
    }
  }

  const double len = norm(dir);
  const Vec2 left{-dir.y / len, dir.x / len};
  // Go around on the side away from the obstacle center; left when it sits on the line.
  const Vec2 preferred = dot(first->center - from, left) > 0.0 ? left * -1.0 : left;
  for (const Vec2 side : {preferred, preferred * -1.0}) {
    const auto w = detour_point(*first, from, to, side);
    if (w && clear(obstacles, from, *w) && clear(obstacles, *w, to)) return {*w, to};
  }
  throw PlanningError("no single-waypoint detour around " + first->name);
}

}  // namespace xnet
