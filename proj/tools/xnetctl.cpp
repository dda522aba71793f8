// Command-line front end: scripted scenarios, the interactive console, the
// HTTP service, and fixture generation.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "xnet/actions.hpp"
#include "xnet/errors.hpp"
#include "xnet/scenario.hpp"
#include "xnet/service.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kAssertionFailure = 1;
constexpr int kUsageError = 2;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

std::pair<std::string, int> split_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) return {"127.0.0.1", std::stoi(address)};
  return {address.substr(0, colon), std::stoi(address.substr(colon + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run Move X-net scenarios, the interactive console, or the control service."};
  std::string world_file;
  std::string scenario_file;
  std::string serve_address;
  std::string log_file;
  std::string fixtures_dir;
  double pace = 10.0;
  app.add_option("--world", world_file, "World definition (JSON)");
  app.add_option("--scenario", scenario_file, "Run a scripted scenario and report its assertions");
  app.add_option("--serve", serve_address, "Serve the HTTP API on [host:]port (needs --world)");
  app.add_option("--pace", pace, "Live ticks per wall-clock second")->check(CLI::PositiveNumber);
  app.add_option("--log", log_file, "Write the event log as JSON lines");
  app.add_option("--emit-fixtures", fixtures_dir, "Write the canonical PNML fixtures into a directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsageError;
  }

  std::ofstream log_stream;
  if (!log_file.empty()) {
    log_stream.open(log_file);
    if (!log_stream) {
      std::cerr << "cannot write " << log_file << '\n';
      return kUsageError;
    }
  }

  try {
    if (!fixtures_dir.empty()) {
      xnet::write_canonical_fixtures(fixtures_dir);
      std::cout << "wrote fixtures to " << fixtures_dir << '\n';
      return kPass;
    }

    if (!scenario_file.empty()) {
      auto scenario = xnet::load_scenario_file(scenario_file);
      if (!world_file.empty()) scenario.world = xnet::load_world_file(world_file);
      const auto report = xnet::run_scenario(scenario, {}, log_file.empty() ? nullptr : &log_stream);
      report.print(std::cout);
      return report.passed() ? kPass : kAssertionFailure;
    }

    if (world_file.empty()) {
      std::cerr << "one of --scenario, --world or --emit-fixtures is required\n" << app.help();
      return kUsageError;
    }
    const auto world = xnet::load_world_file(world_file);

    if (!serve_address.empty()) {
      const auto [host, port] = split_address(serve_address);
      xnet::Service service(world, {}, pace);
      if (!log_file.empty()) service.solver().log().set_sink(&log_stream);
      const int bound = service.start(host, port);
      std::cout << "serving on " << host << ':' << bound << '\n' << std::flush;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      service.stop();
      return kPass;
    }

    xnet::run_interactive(world, std::cin, std::cout, {}, pace, log_file.empty() ? nullptr : &log_stream);
    return kPass;
  } catch (const std::invalid_argument&) {
    std::cerr << "bad address " << serve_address << '\n';
    return kUsageError;
  } catch (const xnet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
}
