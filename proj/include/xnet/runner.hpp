#pragma once

#include <any>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "xnet/petri.hpp"
#include "xnet/pnml.hpp"

namespace xnet {

enum class RunnerEventKind { execution_started, execution_stopped, transition_fired, place_marking_changed };

std::string_view to_string(RunnerEventKind kind);

struct RunnerEvent {
  RunnerEventKind kind;
  std::optional<TransitionId> transition;  // transition_fired only
  std::optional<PlaceId> place;            // place_marking_changed only
  std::optional<TokenCount> new_count;     // place_marking_changed only
  Ticks tick = 0;

  bool operator==(const RunnerEvent&) const = default;
};

namespace detail {

struct EventQueue {
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<RunnerEvent> events;
  bool closed = false;
};

}  // namespace detail

/// Ordered per-subscriber event queue. Unbounded: a subscriber that never
/// reads keeps every event in memory.
class EventStream {
 public:
  explicit EventStream(std::shared_ptr<detail::EventQueue> queue) : queue_(std::move(queue)) {}

  std::optional<RunnerEvent> try_next();
  std::optional<RunnerEvent> next(std::chrono::milliseconds timeout);
  std::vector<RunnerEvent> drain();

 private:
  std::shared_ptr<detail::EventQueue> queue_;
};

/// Token delivery requested by a hook; applied like mark_place.
struct PlaceUpdate {
  PlaceId place;
  TokenCount tokens;
};

/// What an external transition's hook sees: the net, the marking right after
/// the firing, and the context object handed to Runner::load.
struct HookCall {
  const PetriNet& net;
  const Marking& marking;
  const TransitionId& transition;
  Ticks tick;
  std::any& context;
};

using Hook = std::function<std::vector<PlaceUpdate>(const HookCall&)>;

class HookRegistry {
 public:
  HookRegistry& bind(std::string name, Hook hook);
  const Hook* find(std::string_view name) const;
  /// Hook names referenced by external transitions of `net` but not bound here.
  std::vector<std::string> missing_for(const PetriNet& net) const;

 private:
  std::map<std::string, Hook, std::less<>> hooks_;
};

struct RunnerOptions {
  /// Wall-clock pacing in ticks per second for threaded execution; 0 runs unpaced.
  double pace = 0.0;
};

enum class ExecutionMode {
  threaded,  // the runner owns a loop thread
  stepped,   // the caller drives execution through step()
};

/// Executes one net. The firing loop is single-threaded; mark_place,
/// drain_place and stop may be called from any thread and take effect at the
/// next firing boundary. Hooks and the firing observer run on the loop and
/// must not block indefinitely.
class Runner {
 public:
  /// Loads the document's net (several nets are merged through their merge
  /// places). Throws ConfigurationError naming unbound hooks.
  static std::unique_ptr<Runner> load(const PnmlDocument& doc, HookRegistry hooks, std::any context = {},
                                      RunnerOptions options = {});
  static std::unique_ptr<Runner> create(PetriNet net, Marking initial, HookRegistry hooks, std::any context = {},
                                        RunnerOptions options = {});

  Runner(const Runner&) = delete;
  Runner& operator=(const Runner&) = delete;
  ~Runner();

  void start(ExecutionMode mode = ExecutionMode::threaded);
  void stop();

  /// Stepped mode: performs one scheduling step. Returns false when nothing
  /// was enabled (quiescent); a step either fires one transition or lets one
  /// tick pass while a timed transition waits out its delay.
  bool step();
  /// Steps until quiescent or `max_steps` steps; returns the number of steps taken.
  std::size_t run_until_quiescent(std::size_t max_steps);

  void mark_place(std::string_view place, TokenCount tokens);
  /// Removes every token from an external input place (stale-input reset).
  void drain_place(std::string_view place);

  EventStream subscribe_place(std::string_view place);
  EventStream subscribe_events();
  /// Synchronous callback run on the loop after each firing, once the hook
  /// (if any) has returned and before the next transition is chosen.
  void set_firing_observer(std::function<void(const RunnerEvent&)> observer);

  const PetriNet& net() const noexcept { return net_; }
  Marking marking() const;
  Ticks tick() const;
  std::uint64_t fired_count() const;
  bool running() const;
  bool quiescent() const;
  std::any& context() noexcept { return context_; }

  /// Threaded mode: waits until the loop parks with nothing enabled.
  bool wait_quiescent(std::chrono::milliseconds timeout) const;

  /// Exception thrown by a hook or a malformed hook update; the loop stops on it.
  std::exception_ptr error() const;

 private:
  Runner(PetriNet net, Marking initial, HookRegistry hooks, std::any context, RunnerOptions options);

  struct InputOp {
    PlaceId place;
    TokenCount tokens;  // 0 drains the place
  };

  enum class State { stopped, running_threaded, running_stepped };

  struct StepOutcome {
    bool progressed = false;
    std::optional<RunnerEvent> fired;
  };

  StepOutcome step_once();
  void apply_inputs_locked(std::vector<RunnerEvent>& events);
  void loop(std::stop_token token);
  void publish(const std::vector<RunnerEvent>& events);
  void check_input_place(std::string_view place) const;
  void finish_stop();

  const PetriNet net_;
  HookRegistry hooks_;
  std::any context_;
  RunnerOptions options_;

  mutable std::mutex mutex_;
  mutable std::condition_variable wake_;
  mutable std::condition_variable idle_;
  Marking marking_;
  std::deque<InputOp> pending_;
  std::map<TransitionId, Ticks, std::less<>> enabled_since_;
  Ticks tick_ = 0;
  std::uint64_t fired_ = 0;
  State state_ = State::stopped;
  bool quiescent_ = false;
  bool stop_requested_ = false;
  std::exception_ptr error_;
  std::function<void(const RunnerEvent&)> observer_;

  std::mutex subscribers_mutex_;
  struct Subscriber {
    std::optional<PlaceId> place;
    std::shared_ptr<detail::EventQueue> queue;
  };
  std::vector<Subscriber> subscribers_;

  std::jthread thread_;
};

}  // namespace xnet
