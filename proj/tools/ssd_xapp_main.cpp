// ssd-xapp --broker <addr> --gamma <f> --interval-s 60 --train-s 3600 --profile <file>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "oranlab/e2lite/tcp.hpp"
#include "oranlab/ssd/xapp.hpp"

using namespace oranlab;

namespace {
volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signaling-storm detection and mitigation xApp"};
  std::string broker = "127.0.0.1:36422", profile_path, events_path = "ssd_events.csv",
              unseen = "zero_profile";
  ssd::SsdConfig cfg;
  std::optional<std::int64_t> ttl;
  app.add_option("--broker", broker, "host:port of the e2lite broker");
  app.add_option("--gamma", cfg.gamma, "anomaly threshold");
  app.add_option("--interval-s", cfg.interval_s, "counting interval")->check(CLI::PositiveNumber);
  app.add_option("--train-s", cfg.training_duration_s, "training phase length")
      ->check(CLI::PositiveNumber);
  app.add_option("--std-floor", cfg.std_floor, "lower bound of the profile deviation")
      ->check(CLI::PositiveNumber);
  app.add_option("--unseen", unseen, "zero_profile or ignore");
  app.add_option("--ttl-ms", ttl, "block lifetime; permanent when omitted");
  app.add_option("--profile", profile_path,
                 "profile file: loaded when it exists, otherwise written after training");
  app.add_option("--events", events_path, "output CSV of scored requests");
  CLI11_PARSE(app, argc, argv);

  try {
    if (unseen == "zero_profile")
      cfg.unseen_ta_mode = ssd::UnseenTaMode::kZeroProfile;
    else if (unseen == "ignore")
      cfg.unseen_ta_mode = ssd::UnseenTaMode::kIgnore;
    else
      throw ConfigError("--unseen must be zero_profile or ignore");
    cfg.block_ttl_ms = ttl;
    auto log = [](const std::string& m) { std::cerr << "ssd: " << m << '\n'; };

    std::optional<ssd::SsdXapp> xapp;
    bool have_profile = !profile_path.empty() && std::filesystem::exists(profile_path);
    if (have_profile)
      xapp.emplace(cfg, ssd::load_profile(profile_path), log);
    else
      xapp.emplace(cfg, log);
    bool saved = have_profile;

    e2lite::TcpClient client(e2lite::parse_endpoint(broker));
    for (const auto& s : ssd::SsdXapp::subscriptions()) client.send(s);
    std::ofstream events(events_path);
    events << "ts_us,ta,count,z,blocked\n";
    std::size_t written = 0;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop && !client.disconnected()) {
      auto env = client.receive(500);
      if (!env) continue;
      if (env->service == e2lite::Service::kError) {
        const auto& err = std::get<e2lite::ErrorInfo>(env->payload);
        std::cerr << "ssd: broker error " << err.code << ": " << err.reason << '\n';
        continue;
      }
      for (const auto& ctl : xapp->on_envelope(*env)) client.send_with_retry(ctl);
      if (!saved && !xapp->training() && !profile_path.empty()) {
        ssd::save_profile(*xapp->profile(), profile_path);
        saved = true;
      }
      const auto& ev = xapp->events();
      for (; written < ev.size(); ++written) {
        const auto& e = ev[written];
        events << e.ts_us << ',' << e.ta << ',' << e.count << ',' << e.z << ','
               << (e.blocked ? 1 : 0) << '\n';
      }
      events.flush();
    }
    std::cout << "blocks " << xapp->blocks().size() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "ssd-xapp: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
