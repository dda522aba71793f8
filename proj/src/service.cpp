#include "xnet/service.hpp"

#include <atomic>
#include <mutex>

#include "httplib.h"
#include "xnet/errors.hpp"

namespace xnet {

using nlohmann::json;

json CommandResult::to_json() const {
  json j{{"accepted", accepted}};
  if (actspec) j["actspec"] = xnet::to_json(*actspec);
  if (!error.empty()) j["error"] = error;
  if (!hint.empty()) j["hint"] = hint;
  return j;
}

CommandResult submit_text(Solver& solver, CommandParser& parser, const std::string& text) {
  CommandResult result;
  try {
    ActSpec spec = parser.parse(text);
    result.accepted = true;
    result.actspec = spec;
    solver.submit(std::move(spec));
  } catch (const CommandParseError& e) {
    result.error = e.what();
    result.hint = e.hint();
  } catch (const VocabularyError& e) {
    result.error = e.what();
  }
  return result;
}

Service::Service(const WorldDefinition& world, SolverConfig config, double pace)
    : solver_(std::make_unique<Solver>(world, std::move(config))), pace_(pace) {}

Service::~Service() { stop(); }

int Service::start(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  auto& server = *server_;
  // httplib's default also sets SO_REUSEPORT, which lets a second service
  // share a port silently.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });

  server.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(solver_->snapshot().dump(), "application/json");
  });

  server.Post("/command", [this](const httplib::Request& req, httplib::Response& res) {
    std::string text;
    try {
      text = json::parse(req.body).at("text").get<std::string>();
    } catch (const json::exception&) {
      res.status = 400;
      res.set_content(json{{"accepted", false}, {"error", "expected a JSON body {\"text\": ...}"}}.dump(),
                      "application/json");
      return;
    }
    CommandResult result;
    {
      std::lock_guard lock(parser_mutex_);
      result = submit_text(*solver_, parser_, text);
    }
    res.status = result.accepted ? 200 : 422;
    res.set_content(result.to_json().dump(), "application/json");
  });

  server.Get("/events", [this](const httplib::Request&, httplib::Response& res) {
    auto subscription = solver_->log().subscribe();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, subscription](std::size_t, httplib::DataSink& sink) {
          while (server_ && server_->is_running()) {
            if (!sink.is_writable()) return false;
            if (auto record = subscription->next(std::chrono::milliseconds(200))) {
              const std::string message = "event: " + record->kind + "\ndata: " + record->to_json().dump() + "\n\n";
              return sink.write(message.data(), message.size());
            }
            // Comment line as a keep-alive so dead clients are noticed.
            static const std::string keepalive = ": keep-alive\n\n";
            if (!sink.write(keepalive.data(), keepalive.size())) return false;
          }
          sink.done();
          return true;
        },
        [subscription](bool) { subscription->close(); });
  });

  const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    server_.reset();
    throw InterfaceError("cannot bind " + host + ":" + std::to_string(port));
  }
  solver_->start_live(pace_);
  thread_ = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return bound;
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
  solver_->stop_live();
}

void run_interactive(const WorldDefinition& world, std::istream& in, std::ostream& out, SolverConfig config,
                     double pace, std::ostream* log_sink) {
  Solver solver(world, std::move(config));
  if (log_sink != nullptr) solver.log().set_sink(log_sink);
  CommandParser parser;
  std::mutex out_mutex;
  auto subscription = solver.log().subscribe();
  std::atomic<bool> done{false};
  std::thread printer([&] {
    while (!done) {
      if (auto record = subscription->next(std::chrono::milliseconds(100))) {
        std::lock_guard lock(out_mutex);
        out << record->to_json().dump() << '\n' << std::flush;
      }
    }
    while (auto record = subscription->next(std::chrono::milliseconds(0))) {
      std::lock_guard lock(out_mutex);
      out << record->to_json().dump() << '\n';
    }
  });
  solver.start_live(pace);

  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const CommandResult result = submit_text(solver, parser, line);
    std::lock_guard lock(out_mutex);
    if (result.accepted) {
      out << "ok " << to_json(*result.actspec).dump() << '\n' << std::flush;
    } else {
      out << "error " << result.error << '\n' << std::flush;
    }
  }

  // Piped input ends before the robot does; let a running motion finish.
  std::this_thread::sleep_for(std::chrono::duration<double>(2.0 / pace));
  while (solver.aspect() == Aspect::ongoing || solver.aspect() == Aspect::impending) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  solver.stop_live();
  done = true;
  printer.join();
  out << std::flush;
}

}  // namespace xnet
