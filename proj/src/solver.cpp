#include "xnet/solver.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <sstream>

#include "xnet/errors.hpp"

namespace xnet {

using nlohmann::json;

namespace {

const MoveXnetPlaces kPlaces;

bool same_name(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

json plan_json(const std::vector<Vec2>& plan) {
  json out = json::array();
  for (const auto& p : plan) out.push_back(to_json(p));
  return out;
}

json object_json(const WorldObject& o) {
  return {{"name", o.name}, {"color", o.color}, {"shape", o.shape}, {"position", to_json(o.position)},
          {"size", o.radius}};
}

std::string format_point(Vec2 p) {
  std::ostringstream out;
  out.precision(3);
  out << '(' << p.x << ", " << p.y << ')';
  return out.str();
}

}  // namespace

Solver::Solver(const WorldDefinition& world, SolverConfig config)
    : config_(std::move(config)), dt_(world.dt), world_(world.state) {
  model_.robot_position = world_.position;
  for (const auto& name : world.known) {
    model_.objects.emplace(name, KnownObject{world.state.objects.at(name), false});
  }
  channel_.current_position = world_.position;
}

Solver::~Solver() { stop_live(); }

void Solver::submit(ActSpec spec) { queue_.push(std::move(spec)); }

void Solver::record(std::string kind, json detail) {
  log_.append(tick_, world_.time, std::move(kind), std::move(detail));
}

void Solver::cycle() {
  std::lock_guard lock(mutex_);
  for (auto& request : queue_.drain()) receive(request, firings_.load());

  moved_this_cycle_ = false;
  arrival_requested_ = false;
  for (std::size_t steps = 0; steps < config_.max_steps_per_cycle; ++steps) {
    Runner* runner = runner_.get();
    if (runner == nullptr || !runner->running()) break;
    const auto before = runner->fired_count();
    const bool progressed = runner->step();
    drain_runner_events();
    // Idle steps (nothing enabled, or a timed transition waiting) hand over to the world.
    if (!progressed || runner->fired_count() == before) break;
    if (moved_this_cycle_ && !arrival_requested_) break;
  }
  retired_.clear();

  auto [next, events] = tick(world_, dt_);
  world_ = std::move(next);
  ++tick_;
  // Counting ticks keeps the clock free of accumulated rounding.
  world_.time = static_cast<double>(tick_) * dt_;
  channel_.current_position = world_.position;
  model_.robot_position = world_.position;
  for (const auto& ev : events) {
    if (const auto* arrival = std::get_if<ArrivalEvent>(&ev)) {
      record("world-arrival", {{"position", to_json(arrival->position)}});
      arrival_seen_ = true;
    } else {
      on_proximity(std::get<ProximityEvent>(ev));
    }
  }
  if (tick_observer_) tick_observer_(world_);
}

void Solver::receive(const QueuedRequest& request, std::uint64_t dequeued_at) {
  record("actspec-received",
         {{"actspec", to_json(request.spec)}, {"enqueued_at", request.enqueued_at}, {"dequeued_at", dequeued_at}});
  handle_actspec(request.spec);
}

void Solver::on_firing() {
  drain_runner_events();
}

void Solver::drain_runner_events() {
  if (!runner_events_) return;
  for (const auto& ev : runner_events_->drain()) {
    if (ev.kind == RunnerEventKind::transition_fired) {
      const std::string& id = *ev.transition;
      const auto logical = logical_transition_name(id);
      json detail{{"transition", id}, {"logical", logical}, {"controller", is_controller_transition(id)}};
      if (logical.size() < id.size()) detail["variant"] = id.substr(logical.size() + 1);
      record("transition-fired", std::move(detail));
    } else if (ev.kind == RunnerEventKind::place_marking_changed) {
      const PlaceId& place = *ev.place;
      if (place == kPlaces.ready || place == kPlaces.ongoing || place == kPlaces.suspended || place == kPlaces.done) {
        record("place-changed", {{"place", place}, {"count", *ev.new_count}});
        if (place == kPlaces.done && *ev.new_count > 0) record("xnet-completed", {{"goal", goal_}});
      }
    }
  }
  for (auto& pending : pending_records_) record(std::move(pending.kind), std::move(pending.detail));
  pending_records_.clear();
}

double Solver::speed_of(Speed speed) const {
  switch (speed) {
    case Speed::slow: return config_.slow_speed;
    case Speed::normal: return config_.normal_speed;
    case Speed::fast: return config_.fast_speed;
  }
  return config_.normal_speed;
}

std::optional<std::string> Solver::resolve_goal(const ObjectDescriptor& goal) const {
  for (const auto& [name, known] : model_.objects) {
    if (same_name(known.object.color, goal.color) && same_name(known.object.shape, goal.shape)) return name;
  }
  return std::nullopt;
}

Aspect Solver::aspect_locked() const {
  if (!runner_) return Aspect::inactive;
  return aspect_of(kPlaces, runner_->marking());
}

void Solver::notify(std::string topic, std::string message, std::optional<ReportedObject> object, bool rejection) {
  ActSpec n;
  n.kind = ActSpecKind::notification;
  n.agent = config_.agent;
  n.sequence = ++notification_sequence_;
  n.topic = std::move(topic);
  n.message = std::move(message);
  n.object = std::move(object);
  record(rejection ? "rejection" : "notification", {{"actspec", to_json(n)}});
  notifications_.push_back(std::move(n));
}

void Solver::handle_actspec(const ActSpec& spec) {
  if (spec.kind != ActSpecKind::command || !spec.predicate) {
    notify("rejection", "only command ActSpecs are accepted", std::nullopt, true);
    return;
  }
  if (!same_name(spec.agent, config_.agent)) {
    notify("rejection", "unknown agent " + spec.agent + "; this solver drives " + config_.agent, std::nullopt, true);
    return;
  }
  const Aspect aspect = aspect_locked();
  switch (*spec.predicate) {
    case Predicate::move: {
      const auto goal = resolve_goal(*spec.goal);
      if (!goal) {
        std::string known;
        for (const auto& [name, k] : model_.objects) known += (known.empty() ? "" : ", ") + name;
        notify("rejection", "no known " + spec.goal->color + " " + spec.goal->shape + " (known objects: " + known + ")",
               std::nullopt, true);
        return;
      }
      const double speed = speed_of(*spec.speed);
      if (aspect == Aspect::inactive || aspect == Aspect::completed) {
        start_move(*goal, speed);
      } else if (aspect == Aspect::impending) {
        // Not moving yet: the first Move firing picks up the new goal.
        const Vec2 target = model_.objects.at(*goal).object.position;
        try {
          plan_ = plan_trajectory(model_, world_.position, target, config_.inflation, {*goal});
        } catch (const PlanningError& e) {
          notify("planning-error", e.what(), std::nullopt, true);
          return;
        }
        goal_ = *goal;
        channel_.target_position = target;
        channel_.speed = speed;
        record("plan-updated", {{"goal", goal_}, {"waypoints", plan_json(plan_)}});
      } else {
        redirect(*goal, speed, false);
      }
      return;
    }
    case Predicate::stop:
    case Predicate::continue_: {
      if (aspect == Aspect::inactive || aspect == Aspect::completed) {
        notify("no-op", std::string("no operation: ") + (aspect == Aspect::completed ? "the action is already complete"
                                                                                      : "no action is running"),
               std::nullopt, true);
        return;
      }
      mark_control({*spec.predicate == Predicate::stop ? kPlaces.suspend : kPlaces.resume});
      return;
    }
    case Predicate::redirect_implicit:
      notify("rejection", "implicit redirects are raised by the solver itself", std::nullopt, true);
      return;
  }
}

void Solver::start_move(const std::string& goal, double speed) {
  const Vec2 target = model_.objects.at(goal).object.position;
  std::vector<Vec2> plan;
  try {
    plan = plan_trajectory(model_, world_.position, target, config_.inflation, {goal});
  } catch (const PlanningError& e) {
    notify("planning-error", e.what(), std::nullopt, true);
    return;
  }
  if (runner_) retired_.push_back(std::move(runner_));
  plan_ = std::move(plan);
  goal_ = goal;
  channel_ = MotionChannel{ChannelOp::none, target, world_.position, speed};
  arrival_seen_ = false;

  HookRegistry hooks;
  hooks.bind(std::string(hooks::kMove), [this](const HookCall& c) { return hook(c, ChannelOp::move); });
  hooks.bind(std::string(hooks::kSuspend), [this](const HookCall& c) { return hook(c, ChannelOp::suspend); });
  hooks.bind(std::string(hooks::kResume), [this](const HookCall& c) { return hook(c, ChannelOp::resume); });
  hooks.bind(std::string(hooks::kRestart), [this](const HookCall& c) { return hook(c, ChannelOp::restart); });
  runner_ = Runner::load(move_xnet_document({.wait_delay = config_.wait_delay}), std::move(hooks), &channel_);
  runner_events_ = runner_->subscribe_events();
  attach_request_polling(
      *runner_, queue_, firings_, [this](QueuedRequest r, std::uint64_t at) { receive(r, at); },
      [this] { on_firing(); });
  runner_->start(ExecutionMode::stepped);
  record("xnet-started", {{"goal", goal}, {"speed", speed}, {"target", to_json(target)}, {"waypoints", plan_json(plan_)}});
  mark(kPlaces.enabled, "solver");
}

void Solver::redirect(const std::string& goal, double speed, bool implicit) {
  const Vec2 target = model_.objects.at(goal).object.position;
  if (!implicit) {
    try {
      plan_ = plan_trajectory(model_, world_.position, target, config_.inflation, {goal});
    } catch (const PlanningError& e) {
      notify("planning-error", e.what(), std::nullopt, true);
      return;
    }
  }
  goal_ = goal;
  channel_.target_position = target;
  channel_.speed = speed;
  arrival_seen_ = false;
  if (runner_->marking()[kPlaces.arrived] > 0) runner_->drain_place(kPlaces.arrived);
  record("redirect", {{"goal", goal}, {"speed", speed}, {"waypoints", plan_json(plan_)}, {"implicit", implicit}});
  if (aspect_locked() == Aspect::suspended) {
    mark_control({kPlaces.restart});
  } else {
    mark_control({kPlaces.suspend, kPlaces.restart});
  }
}

void Solver::mark_control(const std::vector<PlaceId>& places) {
  // Stale control tokens from earlier, ignored requests must not fire later.
  const Marking m = runner_->marking();
  for (const auto& p : {kPlaces.suspend, kPlaces.resume, kPlaces.restart}) {
    if (m[p] > 0) {
      runner_->drain_place(p);
      record("place-drained", {{"place", p}});
    }
  }
  for (const auto& p : places) mark(p, "solver");
}

void Solver::mark(const PlaceId& place, std::string by) {
  runner_->mark_place(place, 1);
  record("place-marked", {{"place", place}, {"tokens", 1}, {"by", std::move(by)}});
}

void Solver::set_operation(MotionChannel& ch, ChannelOp op) {
  if (ch.target_operation == op) return;
  ch.target_operation = op;
  pending_records_.push_back({"channel-op", {{"operation", to_string(op)},
                                             {"target", to_json(ch.target_position)},
                                             {"speed", ch.speed}}});
}

void Solver::apply_to_world(const MotionChannel& ch) {
  world_ = apply_channel(world_, ch, plan_);
}

std::vector<PlaceUpdate> Solver::hook(const HookCall& call, ChannelOp op) {
  auto& ch = *std::any_cast<MotionChannel*>(call.context);
  const ChannelOp previous = ch.target_operation;
  set_operation(ch, op);
  std::vector<PlaceUpdate> updates;
  if (op == ChannelOp::move) {
    // Move keeps an established motion going; only the first Move starts it.
    if (previous == ChannelOp::none) apply_to_world(ch);
    moved_this_cycle_ = true;
    if (arrival_seen_) {
      arrival_seen_ = false;
      arrival_requested_ = true;
      pending_records_.push_back({"place-marked", {{"place", kPlaces.arrived}, {"tokens", 1}, {"by", "Move"}}});
      updates.push_back({kPlaces.arrived, 1});
    }
  } else {
    apply_to_world(ch);
  }
  ch.current_position = world_.position;
  return updates;
}

void Solver::on_proximity(const ProximityEvent& ev) {
  const WorldObject& seen = ev.object;
  const ReportedObject reported{seen.name, seen.color, seen.position, seen.radius};
  auto known = model_.objects.find(seen.name);
  if (known != model_.objects.end()) {
    const bool moved = distance(known->second.object.position, seen.position) > 1e-9;
    known->second.object = seen;
    known->second.verified = true;
    record("model-verified", {{"object", object_json(seen)}, {"moved", moved}});
    if (!moved) return;
  } else {
    model_.objects.emplace(seen.name, KnownObject{seen, true});
    record("model-update", {{"object", object_json(seen)}});
    notify("unknown-object",
           config_.agent + " found an unknown " + seen.color + " " + seen.shape + " at " + format_point(seen.position),
           reported, false);
  }

  const Aspect aspect = aspect_locked();
  if (aspect != Aspect::ongoing && aspect != Aspect::suspended) {
    record("replan", {{"changed", false}, {"reason", "no motion in progress"}});
    return;
  }
  std::vector<Vec2> plan;
  try {
    plan = plan_trajectory(model_, world_.position, channel_.target_position, config_.inflation, {goal_});
  } catch (const PlanningError& e) {
    record("replan", {{"changed", false}, {"reason", e.what()}});
    return;
  }
  const bool changed = plan != world_.waypoints;
  ActSpec implicit;
  implicit.kind = ActSpecKind::command;
  implicit.agent = config_.agent;
  implicit.predicate = Predicate::redirect_implicit;
  record("replan", {{"changed", changed}, {"waypoints", plan_json(plan)}, {"actspec", to_json(implicit)}});
  if (changed) {
    plan_ = std::move(plan);
    redirect(goal_, channel_.speed, true);
  }
}

void Solver::start_live(double pace) {
  if (!(pace > 0.0)) throw ValidationError("live pace must be positive");
  stop_live();
  driver_ = std::jthread([this, pace](std::stop_token token) {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / pace));
    auto next = clock::now();
    std::mutex sleep_mutex;
    std::condition_variable_any sleeper;
    while (!token.stop_requested()) {
      cycle();
      next += period;
      std::unique_lock lock(sleep_mutex);
      sleeper.wait_until(lock, token, next, [] { return false; });
    }
  });
}

void Solver::stop_live() {
  if (driver_.joinable()) {
    driver_.request_stop();
    driver_.join();
  }
}

WorldState Solver::world() const {
  std::lock_guard lock(mutex_);
  return world_;
}

WorldModel Solver::model() const {
  std::lock_guard lock(mutex_);
  return model_;
}

MotionChannel Solver::channel() const {
  std::lock_guard lock(mutex_);
  return channel_;
}

std::optional<Marking> Solver::marking() const {
  std::lock_guard lock(mutex_);
  if (!runner_) return std::nullopt;
  return runner_->marking();
}

Aspect Solver::aspect() const {
  std::lock_guard lock(mutex_);
  return aspect_locked();
}

double Solver::time() const {
  std::lock_guard lock(mutex_);
  return world_.time;
}

std::vector<ActSpec> Solver::notifications() const {
  std::lock_guard lock(mutex_);
  return notifications_;
}

void Solver::set_tick_observer(std::function<void(const WorldState&)> observer) {
  std::lock_guard lock(mutex_);
  tick_observer_ = std::move(observer);
}

json Solver::snapshot(std::size_t last_events) const {
  std::lock_guard lock(mutex_);
  json marking = json::object();
  Aspect aspect = Aspect::inactive;
  if (runner_) {
    const Marking m = runner_->marking();
    for (const auto& [place, count] : m.counts()) marking[place] = count;
    aspect = aspect_of(kPlaces, m);
  }
  json events = json::array();
  for (const auto& r : log_.tail(last_events)) events.push_back(r.to_json());
  return {{"world", snapshot_json(world_)},
          {"marking", marking},
          {"aspect", to_string(aspect)},
          {"goal", goal_.empty() ? json(nullptr) : json(goal_)},
          {"events", events}};
}

}  // namespace xnet
