// ransim run --config <file> --seed <n> --duration-s <t> [--broker host:port]

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "oranlab/e2lite/tcp.hpp"
#include "oranlab/ransim/simulator.hpp"

using namespace oranlab;

namespace {

ransim::SimConfig load_config(const std::string& path) {
  ransim::SimConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + " is not valid JSON");
  // Scenario files keep the simulator section under "sim".
  if (j.contains("sim")) j = j["sim"];
  ransim::from_json(j, cfg);
  return cfg;
}

void write_outputs(const ransim::RanSimulator& sim, const std::string& dir) {
  std::ofstream pings(dir + "/pings.csv");
  pings << "seq,rtt_ms,delivered\n";
  for (const auto& p : sim.pings())
    pings << p.seq << ',' << (p.delivered ? std::to_string(p.rtt_ms) : std::string("inf")) << ','
          << (p.delivered ? 1 : 0) << '\n';
  std::ofstream access(dir + "/access.csv");
  access << "ts_us,ue,ta,rejected\n";
  for (const auto& a : sim.access_log())
    access << a.ts_us << ',' << a.ue_id << ',' << a.ta << ',' << (a.rejected ? 1 : 0) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-cell E2 node simulator"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "simulate and write pings.csv / access.csv");
  std::string config_path, broker, out_dir = ".", trace_path;
  std::optional<std::uint64_t> seed;
  double duration_s = 60.0;
  double pace = 1.0;
  run->add_option("--config", config_path, "simulator JSON (missing keys take defaults)");
  run->add_option("--seed", seed, "overrides the config seed");
  run->add_option("--duration-s", duration_s, "virtual seconds to simulate")->check(CLI::PositiveNumber);
  run->add_option("--broker", broker, "host:port of an e2lite broker");
  run->add_option("--pace", pace, "virtual seconds per wall second; 0 runs unthrottled")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--out-dir", out_dir, "directory for the CSV outputs");
  run->add_option("--trace", trace_path, "also write every DL transport block (ts_us,ue,slot,mcs,ack)");
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    ransim::RanSimulator sim(cfg);
    std::unique_ptr<e2lite::TcpClient> client;
    if (!broker.empty()) {
      client = std::make_unique<e2lite::TcpClient>(e2lite::parse_endpoint(broker));
      client->send(e2lite::make_subscribe("ransim", std::string(e2lite::style::kE2Setup)));
      auto ack = client->receive(5000);
      if (!ack || ack->service != e2lite::Service::kSubscribeAck)
        throw DeliveryFailed("broker did not acknowledge e2_setup");
    }
    std::ofstream trace;
    if (!trace_path.empty()) {
      trace.open(trace_path);
      if (!trace) throw ConfigError("cannot write " + trace_path);
      trace << "ts_us,ue,slot,mcs,ack\n";
    }

    const auto end_slot = static_cast<std::int64_t>(duration_s * 1000.0);
    const auto wall_start = std::chrono::steady_clock::now();
    std::uint64_t policies = 0;
    while (sim.now_slot() < end_slot) {
      std::int64_t k = std::min(sim.quiet_slots(), end_slot - sim.now_slot());
      if (pace > 0) k = std::min<std::int64_t>(k, 10);
      sim.run(k, [&](e2lite::E2Envelope&& e) {
        if (trace.is_open())
          if (const auto* tb = std::get_if<e2lite::TbReport>(&e.payload))
            trace << e.ts_us << ',' << tb->ue_id << ',' << tb->slot << ',' << tb->mcs << ','
                  << (tb->ack ? 1 : 0) << '\n';
        if (client) client->send_with_retry(e);
      });
      while (client) {
        auto env = client->receive(0);
        if (!env) break;
        if (env->service == e2lite::Service::kControl) {
          auto res = sim.apply_policy(*env);
          ++policies;
          std::cerr << "t=" << sim.now_us() << "us " << env->style << ": " << res.reason << '\n';
          client->send_with_retry(e2lite::make_report(
              sim.now_us(), e2lite::ControlReceipt{env->msg_id, res.accepted, res.reason}));
        } else if (env->service == e2lite::Service::kError) {
          const auto& err = std::get<e2lite::ErrorInfo>(env->payload);
          std::cerr << "broker error " << err.code << ": " << err.reason << '\n';
        }
      }
      if (client && client->disconnected()) throw DeliveryFailed("broker closed the connection");
      if (pace > 0) {
        auto due = wall_start + std::chrono::duration<double>(sim.now_us() / 1e6 / pace);
        std::this_thread::sleep_until(due);
      }
    }
    if (client) client->finish();
    std::filesystem::create_directories(out_dir);
    write_outputs(sim, out_dir);
    std::cout << "simulated " << duration_s << " s, " << sim.pings().size() << " pings, "
              << sim.access_log().size() << " access requests, " << policies << " policies\n";
  } catch (const std::exception& e) {
    std::cerr << "ransim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
