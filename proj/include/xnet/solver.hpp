#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "xnet/actions.hpp"
#include "xnet/channel.hpp"
#include "xnet/command.hpp"
#include "xnet/event_log.hpp"
#include "xnet/planner.hpp"
#include "xnet/request_queue.hpp"
#include "xnet/runner.hpp"
#include "xnet/world.hpp"

namespace xnet {

struct SolverConfig {
  std::string agent = "Robot1";
  double slow_speed = 0.5;
  double normal_speed = 1.0;
  double fast_speed = 2.0;
  double inflation = 0.3;
  Ticks wait_delay = 0;
  std::size_t max_steps_per_cycle = 64;
};

/// Translates ActSpecs into Move X-net place updates, services the X-net's
/// hooks against the simulated world, and runs the unknown-object protocol.
///
/// Time advances in cycles of one world tick. A cycle drains the request
/// queue, steps the active X-net until its motion loop has handed control to
/// the world (or nothing is enabled), then ticks the world. Requests are also
/// polled after every firing. All state sits behind one mutex; submit() and
/// the read accessors may be called from any thread.
class Solver {
 public:
  Solver(const WorldDefinition& world, SolverConfig config = {});
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  void submit(ActSpec spec);
  void cycle();

  /// Live mode: a driver thread runs one cycle every 1/pace wall seconds.
  void start_live(double pace);
  void stop_live();

  EventLog& log() noexcept { return log_; }
  const SolverConfig& config() const noexcept { return config_; }

  WorldState world() const;
  WorldModel model() const;
  MotionChannel channel() const;
  std::optional<Marking> marking() const;
  Aspect aspect() const;
  double time() const;
  std::uint64_t firings() const noexcept { return firings_.load(); }
  std::vector<ActSpec> notifications() const;
  /// World state after each tick, called on the cycling thread with the lock held.
  void set_tick_observer(std::function<void(const WorldState&)> observer);

  /// {world, marking, aspect, events}; aspect is computed from the marking shown.
  nlohmann::json snapshot(std::size_t last_events = 50) const;

 private:
  struct PendingRecord {
    std::string kind;
    nlohmann::json detail;
  };

  void receive(const QueuedRequest& request, std::uint64_t dequeued_at);
  void handle_actspec(const ActSpec& spec);
  void start_move(const std::string& goal, double speed);
  void redirect(const std::string& goal, double speed, bool implicit);
  void mark_control(const std::vector<PlaceId>& places);
  void mark(const PlaceId& place, std::string by);
  void on_firing();
  void drain_runner_events();
  void on_proximity(const ProximityEvent& ev);
  void notify(std::string topic, std::string message, std::optional<ReportedObject> object, bool rejection);
  void set_operation(MotionChannel& ch, ChannelOp op);
  void apply_to_world(const MotionChannel& ch);
  std::vector<PlaceUpdate> hook(const HookCall& call, ChannelOp op);
  std::optional<std::string> resolve_goal(const ObjectDescriptor& goal) const;
  double speed_of(Speed speed) const;
  Aspect aspect_locked() const;
  void record(std::string kind, nlohmann::json detail);

  SolverConfig config_;
  double dt_;  // from the world definition
  mutable std::mutex mutex_;

  WorldState world_;
  WorldModel model_;
  std::uint64_t tick_ = 0;

  MotionChannel channel_;
  std::vector<Vec2> plan_;
  std::string goal_;
  std::unique_ptr<Runner> runner_;
  std::vector<std::unique_ptr<Runner>> retired_;
  std::optional<EventStream> runner_events_;
  std::vector<PendingRecord> pending_records_;

  bool moved_this_cycle_ = false;
  bool arrival_requested_ = false;
  bool arrival_seen_ = false;

  std::vector<ActSpec> notifications_;
  std::uint64_t notification_sequence_ = 0;
  std::function<void(const WorldState&)> tick_observer_;

  std::atomic<std::uint64_t> firings_{0};
  RequestQueue queue_{[this] { return firings_.load(); }};
  EventLog log_;

  std::jthread driver_;
};

}  // namespace xnet
