#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace xnet {

struct LogRecord {
  std::uint64_t index = 0;
  std::uint64_t tick = 0;  // world ticks completed when the record was written
  double time = 0.0;       // simulated seconds
  std::string kind;
  nlohmann::json detail;

  nlohmann::json to_json() const;
};

/// Live feed of records appended after subscribing.
class LogSubscription {
 public:
  std::optional<LogRecord> next(std::chrono::milliseconds timeout);
  void close();

 private:
  friend class EventLog;
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<LogRecord> records_;
  bool closed_ = false;
};

/// Append-only structured log, written as JSON lines when a sink is set.
class EventLog {
 public:
  EventLog() = default;
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  ~EventLog();

  LogRecord append(std::uint64_t tick, double time, std::string kind, nlohmann::json detail);

  std::vector<LogRecord> records() const;
  std::vector<LogRecord> tail(std::size_t n) const;
  std::size_t size() const;

  std::shared_ptr<LogSubscription> subscribe();
  void set_sink(std::ostream* sink);

 private:
  mutable std::mutex mutex_;
  std::vector<LogRecord> records_;
  std::vector<std::weak_ptr<LogSubscription>> subscribers_;
  std::ostream* sink_ = nullptr;
};

}  // namespace xnet
