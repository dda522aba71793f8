#include "xnet/runner.hpp"

#include <algorithm>

#include "xnet/errors.hpp"

namespace xnet {

std::string_view to_string(RunnerEventKind kind) {
  switch (kind) {
    case RunnerEventKind::execution_started: return "execution-started";
    case RunnerEventKind::execution_stopped: return "execution-stopped";
    case RunnerEventKind::transition_fired: return "transition-fired";
    case RunnerEventKind::place_marking_changed: return "place-marking-changed";
  }
  return "unknown";
}

std::optional<RunnerEvent> EventStream::try_next() {
  std::lock_guard lock(queue_->mutex);
  if (queue_->events.empty()) return std::nullopt;
  RunnerEvent ev = std::move(queue_->events.front());
  queue_->events.pop_front();
  return ev;
}

std::optional<RunnerEvent> EventStream::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(queue_->mutex);
  if (!queue_->ready.wait_for(lock, timeout, [&] { return !queue_->events.empty() || queue_->closed; }))
    return std::nullopt;
  if (queue_->events.empty()) return std::nullopt;
  RunnerEvent ev = std::move(queue_->events.front());
  queue_->events.pop_front();
  return ev;
}

std::vector<RunnerEvent> EventStream::drain() {
  std::lock_guard lock(queue_->mutex);
  std::vector<RunnerEvent> out(std::make_move_iterator(queue_->events.begin()),
                               std::make_move_iterator(queue_->events.end()));
  queue_->events.clear();
  return out;
}

HookRegistry& HookRegistry::bind(std::string name, Hook hook) {
  hooks_[std::move(name)] = std::move(hook);
  return *this;
}

const Hook* HookRegistry::find(std::string_view name) const {
  auto it = hooks_.find(name);
  return it == hooks_.end() ? nullptr : &it->second;
}

std::vector<std::string> HookRegistry::missing_for(const PetriNet& net) const {
  std::vector<std::string> missing;
  for (const auto& t : net.transitions()) {
    if (t.kind == TransitionKind::external && find(*t.hook) == nullptr &&
        std::find(missing.begin(), missing.end(), *t.hook) == missing.end())
      missing.push_back(*t.hook);
  }
  return missing;
}

std::unique_ptr<Runner> Runner::load(const PnmlDocument& doc, HookRegistry hooks, std::any context,
                                     RunnerOptions options) {
  if (doc.nets.empty()) throw ValidationError("document " + doc.source_name + " contains no net");
  if (doc.nets.size() == 1) {
    return create(doc.nets.front().net, doc.nets.front().initial, std::move(hooks), std::move(context), options);
  }
  std::vector<PetriNet> nets;
  std::vector<Marking> markings;
  for (const auto& entry : doc.nets) {
    nets.push_back(entry.net);
    markings.push_back(entry.initial);
  }
  return create(merge_nets(nets), merge_markings(nets, markings), std::move(hooks), std::move(context), options);
}

std::unique_ptr<Runner> Runner::create(PetriNet net, Marking initial, HookRegistry hooks, std::any context,
                                       RunnerOptions options) {
  if (auto missing = hooks.missing_for(net); !missing.empty()) {
    std::string names;
    for (const auto& name : missing) names += (names.empty() ? "" : ", ") + name;
    throw ConfigurationError("unbound external transition hooks: " + names, std::move(missing));
  }
  check_marking(net, initial);
  return std::unique_ptr<Runner>(
      new Runner(std::move(net), std::move(initial), std::move(hooks), std::move(context), options));
}

Runner::Runner(PetriNet net, Marking initial, HookRegistry hooks, std::any context, RunnerOptions options)
    : net_(std::move(net)),
      hooks_(std::move(hooks)),
      context_(std::move(context)),
      options_(options),
      marking_(std::move(initial)) {}

Runner::~Runner() {
  {
    std::lock_guard lock(mutex_);
    stop_requested_ = true;
  }
  wake_.notify_all();
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
  std::lock_guard lock(subscribers_mutex_);
  for (auto& sub : subscribers_) {
    std::lock_guard qlock(sub.queue->mutex);
    sub.queue->closed = true;
    sub.queue->ready.notify_all();
  }
}

void Runner::start(ExecutionMode mode) {
  Ticks now = 0;
  {
    std::lock_guard lock(mutex_);
    if (state_ != State::stopped) throw StateError("runner is already started");
    state_ = mode == ExecutionMode::threaded ? State::running_threaded : State::running_stepped;
    stop_requested_ = false;
    quiescent_ = false;
    error_ = nullptr;
    now = tick_;
  }
  publish({RunnerEvent{RunnerEventKind::execution_started, std::nullopt, std::nullopt, std::nullopt, now}});
  if (mode == ExecutionMode::threaded) {
    if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
    thread_ = std::jthread([this](std::stop_token token) { loop(token); });
  }
}

void Runner::stop() {
  bool threaded = false;
  {
    std::lock_guard lock(mutex_);
    if (state_ == State::stopped) throw StateError("runner is not started");
    threaded = state_ == State::running_threaded;
    if (threaded) stop_requested_ = true;
  }
  if (!threaded) {
    finish_stop();
    return;
  }
  wake_.notify_all();
  if (thread_.get_id() == std::this_thread::get_id()) return;  // the loop exits after this firing
  thread_.join();
}

void Runner::finish_stop() {
  Ticks now = 0;
  {
    std::lock_guard lock(mutex_);
    state_ = State::stopped;
    now = tick_;
  }
  idle_.notify_all();
  publish({RunnerEvent{RunnerEventKind::execution_stopped, std::nullopt, std::nullopt, std::nullopt, now}});
}

bool Runner::step() {
  {
    std::lock_guard lock(mutex_);
    if (state_ != State::running_stepped) throw StateError("step() requires a runner started in stepped mode");
  }
  const bool progressed = step_once().progressed;
  if (auto err = error()) {
    finish_stop();
    std::rethrow_exception(err);
  }
  return progressed;
}

std::size_t Runner::run_until_quiescent(std::size_t max_steps) {
  std::size_t steps = 0;
  while (steps < max_steps && step()) ++steps;
  return steps;
}

void Runner::check_input_place(std::string_view place) const {
  if (net_.place(place).kind != PlaceKind::external_input)
    throw InterfaceError("place '" + std::string(place) + "' is not an external input place");
}

void Runner::mark_place(std::string_view place, TokenCount tokens) {
  check_input_place(place);
  if (tokens == 0) throw InterfaceError("mark_place needs a positive token count");
  {
    std::lock_guard lock(mutex_);
    pending_.push_back({PlaceId(place), tokens});
  }
  wake_.notify_all();
}

void Runner::drain_place(std::string_view place) {
  check_input_place(place);
  {
    std::lock_guard lock(mutex_);
    pending_.push_back({PlaceId(place), 0});
  }
  wake_.notify_all();
}

EventStream Runner::subscribe_place(std::string_view place) {
  if (net_.place(place).kind != PlaceKind::external_output)
    throw InterfaceError("place '" + std::string(place) + "' is not an external output place");
  auto queue = std::make_shared<detail::EventQueue>();
  std::lock_guard lock(subscribers_mutex_);
  subscribers_.push_back({PlaceId(place), queue});
  return EventStream(queue);
}

EventStream Runner::subscribe_events() {
  auto queue = std::make_shared<detail::EventQueue>();
  std::lock_guard lock(subscribers_mutex_);
  subscribers_.push_back({std::nullopt, queue});
  return EventStream(queue);
}

void Runner::set_firing_observer(std::function<void(const RunnerEvent&)> observer) {
  std::lock_guard lock(mutex_);
  observer_ = std::move(observer);
}

Marking Runner::marking() const {
  std::lock_guard lock(mutex_);
  return marking_;
}

Ticks Runner::tick() const {
  std::lock_guard lock(mutex_);
  return tick_;
}

std::uint64_t Runner::fired_count() const {
  std::lock_guard lock(mutex_);
  return fired_;
}

bool Runner::running() const {
  std::lock_guard lock(mutex_);
  return state_ != State::stopped;
}

bool Runner::quiescent() const {
  std::lock_guard lock(mutex_);
  return quiescent_ && pending_.empty();
}

bool Runner::wait_quiescent(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return idle_.wait_for(lock, timeout,
                        [&] { return (quiescent_ && pending_.empty()) || state_ == State::stopped; });
}

std::exception_ptr Runner::error() const {
  std::lock_guard lock(mutex_);
  return error_;
}

void Runner::apply_inputs_locked(std::vector<RunnerEvent>& events) {
  while (!pending_.empty()) {
    InputOp op = std::move(pending_.front());
    pending_.pop_front();
    const TokenCount before = marking_[op.place];
    const TokenCount after = op.tokens == 0 ? 0 : before + op.tokens;
    if (after == before) continue;
    marking_.set(op.place, after);
    events.push_back({RunnerEventKind::place_marking_changed, std::nullopt, op.place, after, tick_});
  }
}

Runner::StepOutcome Runner::step_once() {
  std::vector<RunnerEvent> events;
  StepOutcome outcome;
  const Hook* hook = nullptr;
  Marking after_firing;
  TransitionId fired_id;
  Ticks fired_tick = 0;
  std::function<void(const RunnerEvent&)> observer;

  {
    std::lock_guard lock(mutex_);
    apply_inputs_locked(events);

    const auto enabled = enabled_set(net_, marking_);
    for (const auto& t : net_.transitions()) {
      if (t.kind != TransitionKind::timed) continue;
      if (std::binary_search(enabled.begin(), enabled.end(), t.id)) {
        enabled_since_.try_emplace(t.id, tick_);
      } else {
        enabled_since_.erase(t.id);
      }
    }

    const TransitionId* choice = nullptr;
    bool waiting = false;
    for (const auto& id : enabled) {
      const Transition& t = net_.transition(id);
      if (t.kind == TransitionKind::timed && tick_ - enabled_since_.at(id) < *t.delay) {
        waiting = true;
        continue;
      }
      choice = &id;
      break;
    }

    if (choice != nullptr) {
      const Transition& t = net_.transition(*choice);
      const Marking before = marking_;
      marking_ = fire(net_, marking_, t.id);
      ++fired_;
      RunnerEvent fired_event{RunnerEventKind::transition_fired, t.id, std::nullopt, std::nullopt, tick_};
      events.push_back(fired_event);
      for (const auto& p : net_.places()) {
        if (before[p.id] != marking_[p.id])
          events.push_back({RunnerEventKind::place_marking_changed, std::nullopt, p.id, marking_[p.id], tick_});
      }
      enabled_since_.erase(t.id);
      if (t.kind == TransitionKind::external) {
        hook = hooks_.find(*t.hook);
        after_firing = marking_;
        fired_id = t.id;
        fired_tick = tick_;
      }
      outcome = {true, fired_event};
      ++tick_;
    } else if (waiting) {
      outcome.progressed = true;
      ++tick_;
    }
    quiescent_ = !outcome.progressed;
    observer = observer_;
  }

  if (hook != nullptr) {
    try {
      auto updates = (*hook)(HookCall{net_, after_firing, fired_id, fired_tick, context_});
      for (const auto& u : updates) {
        check_input_place(u.place);
        if (u.tokens == 0) throw InterfaceError("hook '" + fired_id + "' requested zero tokens for " + u.place);
      }
      std::lock_guard lock(mutex_);
      for (auto& u : updates) pending_.push_back({std::move(u.place), u.tokens});
    } catch (...) {
      std::lock_guard lock(mutex_);
      error_ = std::current_exception();
      stop_requested_ = true;
    }
  }

  publish(events);
  if (!outcome.progressed) idle_.notify_all();
  if (outcome.fired && observer) observer(*outcome.fired);
  return outcome;
}

void Runner::loop(std::stop_token token) {
  using clock = std::chrono::steady_clock;
  auto deadline = clock::now();
  const auto period = options_.pace > 0 ? std::chrono::duration_cast<clock::duration>(
                                              std::chrono::duration<double>(1.0 / options_.pace))
                                        : clock::duration::zero();
  while (!token.stop_requested()) {
    {
      std::lock_guard lock(mutex_);
      if (stop_requested_) break;
    }
    StepOutcome outcome;
    try {
      outcome = step_once();
    } catch (...) {
      std::lock_guard lock(mutex_);
      error_ = std::current_exception();
      break;
    }
    std::unique_lock lock(mutex_);
    if (stop_requested_) break;
    if (!outcome.progressed) {
      wake_.wait(lock, [&] { return stop_requested_ || !pending_.empty(); });
      deadline = clock::now();
      continue;
    }
    if (period > clock::duration::zero()) {
      deadline += period;
      wake_.wait_until(lock, deadline, [&] { return stop_requested_; });
    }
  }
  finish_stop();
}

void Runner::publish(const std::vector<RunnerEvent>& events) {
  if (events.empty()) return;
  std::lock_guard lock(subscribers_mutex_);
  for (auto& sub : subscribers_) {
    std::lock_guard qlock(sub.queue->mutex);
    bool pushed = false;
    for (const auto& ev : events) {
      if (sub.place && !(ev.kind == RunnerEventKind::place_marking_changed && ev.place == sub.place)) continue;
      sub.queue->events.push_back(ev);
      pushed = true;
    }
    if (pushed) sub.queue->ready.notify_all();
  }
}

}  // namespace xnet
