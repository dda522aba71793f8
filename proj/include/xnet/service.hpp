#pragma once

#include <istream>
#include <memory>
#include <ostream>
#include <string>
#include <thread>

#include "json.hpp"
#include "xnet/command.hpp"
#include "xnet/solver.hpp"
#include "xnet/world.hpp"

namespace httplib {
class Server;
}

namespace xnet {

/// Outcome of submitting one line of operator text.
struct CommandResult {
  bool accepted = false;
  std::optional<ActSpec> actspec;
  std::string error;
  std::string hint;

  nlohmann::json to_json() const;
};

/// Parses `text` and, when it parses, queues the ActSpec on the solver.
CommandResult submit_text(Solver& solver, CommandParser& parser, const std::string& text);

/// HTTP front end over a live solver:
///   GET  /state   -> {world, marking, aspect, events}
///   POST /command -> {"text": "..."} in, CommandResult out (422 when it does not parse)
///   GET  /events  -> server-sent events, one log record per message
/// Handlers only read snapshots and enqueue; the solver's driver thread does
/// all mutation.
class Service {
 public:
  Service(const WorldDefinition& world, SolverConfig config = {}, double pace = 10.0);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and starts serving in the background; port 0 picks a free port.
  /// Returns the bound port. Throws InterfaceError on bind failure.
  int start(const std::string& host, int port);
  void stop();

  Solver& solver() noexcept { return *solver_; }

 private:
  std::unique_ptr<Solver> solver_;
  CommandParser parser_;
  std::mutex parser_mutex_;
  double pace_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

/// Line-oriented console: each input line is parsed and queued, diagnostics
/// and event-log records are written to `out`. At end of input it waits for
/// an ongoing motion to complete (suspended ones are left) and returns.
void run_interactive(const WorldDefinition& world, std::istream& in, std::ostream& out, SolverConfig config = {},
                     double pace = 10.0, std::ostream* log_sink = nullptr);

}  // namespace xnet
