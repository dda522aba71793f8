#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <vector>

#include "xnet/command.hpp"
#include "xnet/runner.hpp"

namespace xnet {

struct QueuedRequest {
  ActSpec spec;
  std::uint64_t enqueued_at = 0;  // stamp taken when the request entered the queue
};

/// FIFO of ActSpecs from the language side. Each push records a stamp (the
/// consumer's firing count, typically) under the same lock that drain takes,
/// so a drain that starts after a push always sees it.
class RequestQueue {
 public:
  explicit RequestQueue(std::function<std::uint64_t()> stamp) : stamp_(std::move(stamp)) {}

  void push(ActSpec spec) {
    std::lock_guard lock(mutex_);
    items_.push_back({std::move(spec), stamp_()});
  }

  std::vector<QueuedRequest> drain() {
    std::lock_guard lock(mutex_);
    std::vector<QueuedRequest> out(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
    items_.clear();
    return out;
  }

  bool empty() const {
    std::lock_guard lock(mutex_);
    return items_.empty();
  }

 private:
  std::function<std::uint64_t()> stamp_;
  mutable std::mutex mutex_;
  std::deque<QueuedRequest> items_;
};

/// Polls `queue` after every firing of `runner`, so a request never waits for
/// more than one further firing. `firings` is the count the queue stamps with;
/// it is advanced before polling. `before` runs first on each firing.
inline void attach_request_polling(Runner& runner, RequestQueue& queue, std::atomic<std::uint64_t>& firings,
                                   std::function<void(QueuedRequest, std::uint64_t dequeued_at)> handler,
                                   std::function<void()> before = {}) {
  runner.set_firing_observer([&queue, &firings, handler = std::move(handler), before = std::move(before)](
                                 const RunnerEvent&) {
    if (before) before();
    const std::uint64_t now = ++firings;
    for (auto& request : queue.drain()) handler(std::move(request), now);
  });
}

}  // namespace xnet
