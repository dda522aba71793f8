#include "xnet/event_log.hpp"

#include <algorithm>

namespace xnet {

nlohmann::json LogRecord::to_json() const {
  return {{"index", index}, {"tick", tick}, {"time", time}, {"kind", kind}, {"detail", detail}};
}

std::optional<LogRecord> LogSubscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  ready_.wait_for(lock, timeout, [&] { return !records_.empty() || closed_; });
  if (records_.empty()) return std::nullopt;
  LogRecord r = std::move(records_.front());
  records_.pop_front();
  return r;
}

void LogSubscription::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

EventLog::~EventLog() {
  for (auto& weak : subscribers_) {
    if (auto sub = weak.lock()) sub->close();
  }
}

LogRecord EventLog::append(std::uint64_t tick, double time, std::string kind, nlohmann::json detail) {
  std::lock_guard lock(mutex_);
  records_.push_back({records_.size(), tick, time, std::move(kind), std::move(detail)});
  const LogRecord& record = records_.back();
  if (sink_ != nullptr) *sink_ << record.to_json().dump() << '\n' << std::flush;
  std::erase_if(subscribers_, [&](const std::weak_ptr<LogSubscription>& weak) {
    auto sub = weak.lock();
    if (!sub) return true;
    {
      std::lock_guard sub_lock(sub->mutex_);
      sub->records_.push_back(record);
    }
    sub->ready_.notify_all();
    return false;
  });
  return record;
}

std::vector<LogRecord> EventLog::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::vector<LogRecord> EventLog::tail(std::size_t n) const {
  std::lock_guard lock(mutex_);
  const std::size_t start = records_.size() > n ? records_.size() - n : 0;
  return {records_.begin() + static_cast<std::ptrdiff_t>(start), records_.end()};
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::shared_ptr<LogSubscription> EventLog::subscribe() {
  auto sub = std::make_shared<LogSubscription>();
  std::lock_guard lock(mutex_);
  subscribers_.push_back(sub);
  return sub;
}

void EventLog::set_sink(std::ostream* sink) {
  std::lock_guard lock(mutex_);
  sink_ = sink;
}

}  // namespace xnet
