// e2lite broker --port <p> --log <file>

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "oranlab/e2lite/tcp.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"E2-lite message broker"};
  app.require_subcommand(1);
  auto* broker_cmd = app.add_subcommand("broker", "run the broker until interrupted");
  int port = oranlab::e2lite::kDefaultPort;
  std::string log_path;
  std::size_t capacity = 65536;
  broker_cmd->add_option("--port", port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  broker_cmd->add_option("--log", log_path, "append every envelope to this file");
  broker_cmd->add_option("--queue-capacity", capacity, "per-subscriber queue bound")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    oranlab::e2lite::Broker broker({capacity});
    oranlab::e2lite::TcpBrokerServer server(broker, static_cast<std::uint16_t>(port), log_path);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on port " << server.port() << std::endl;
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    auto s = broker.stats();
    std::cout << "published " << s.reports_published << " delivered " << s.reports_delivered
              << " controls " << s.controls_forwarded << " errors " << s.errors_sent
              << " dropped " << s.dropped_unknown_style + s.dropped_malformed << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "e2lite: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
