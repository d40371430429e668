// jd-xapp --broker <addr> --beta <f> --n <int> --cap fixed:1|min-observed
//         --pfa-target <f> --calibrate <trace-file>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oranlab/e2lite/tcp.hpp"
#include "oranlab/jd/calibration.hpp"
#include "oranlab/jd/xapp.hpp"

using namespace oranlab;

namespace {

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

// Reads the "ack" column of a CSV trace (ransim run --trace).
std::vector<std::uint8_t> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw InsufficientData(path + " is empty");
  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string f; std::getline(hs, f, ',');) header.push_back(f);
  auto col = std::find(header.begin(), header.end(), "ack");
  if (col == header.end()) throw ConfigError(path + " has no ack column");
  auto idx = static_cast<std::size_t>(col - header.begin());
  std::vector<std::uint8_t> nacks;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string f;
    for (std::size_t i = 0; i <= idx && std::getline(ls, f, ','); ++i) {
    }
    if (f != "0" && f != "1") throw ConfigError("bad ack value '" + f + "' in " + path);
    nacks.push_back(f == "0" ? 1 : 0);
  }
  return nacks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jamming detection and mitigation xApp"};
  std::string broker, cap = "fixed:1", trace_path, events_path = "jd_events.csv",
                      calibration_path = "calibration.csv";
  std::optional<double> beta;
  std::size_t n = 10000;
  double pfa_target = 0.01;
  int release = 3;
  app.add_option("--broker", broker, "host:port of the e2lite broker");
  app.add_option("--beta", beta, "detection threshold in (0, 1)");
  app.add_option("--n", n, "BLER window length")->check(CLI::PositiveNumber);
  app.add_option("--cap", cap, "fixed:<mcs> or min-observed");
  app.add_option("--pfa-target", pfa_target, "false-alarm target for calibration")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--calibrate", trace_path, "jam-free trace CSV with an ack column");
  app.add_option("--release-windows", release, "clean windows before the cap is lifted")
      ->check(CLI::PositiveNumber);
  app.add_option("--events", events_path, "output CSV of detector events");
  app.add_option("--calibration-out", calibration_path, "output CSV of calibrated pairs");
  CLI11_PARSE(app, argc, argv);

  try {
    if (!trace_path.empty()) {
      auto nacks = read_trace(trace_path);
      std::vector<std::size_t> grid;
      for (auto g : jd::default_window_grid())
        if (g <= nacks.size()) grid.push_back(g);
      if (std::find(grid.begin(), grid.end(), n) == grid.end() && n <= nacks.size())
        grid.push_back(n);
      if (grid.empty()) throw InsufficientData("trace shorter than the smallest window");
      auto pairs = jd::calibrate(nacks, pfa_target, grid);
      std::ofstream out(calibration_path);
      out << "n,beta,pfa,windows\n";
      for (const auto& p : pairs) out << p.n << ',' << p.beta << ',' << p.pfa << ',' << p.windows << '\n';
      for (auto g : grid)
        if (auto b = jd::select_beta(pairs, g))
          std::cout << "N=" << g << " beta=" << b->beta << " pfa=" << b->pfa << '\n';
      if (!beta) {
        auto b = jd::select_beta(pairs, n);
        if (!b) throw InsufficientData("no beta meets the target at N = " + std::to_string(n));
        beta = b->beta;
      }
    }
    if (broker.empty()) return 0;
    if (!beta) throw ConfigError("--beta or --calibrate is required");

    jd::JdConfig cfg;
    cfg.beta = *beta;
    cfg.n_window = n;
    cfg.cap_mode = jd::parse_cap_mode(cap);
    cfg.release_windows = release;
    jd::JdXapp xapp(cfg, [](const std::string& m) { std::cerr << "jd: " << m << '\n'; });

    e2lite::TcpClient client(e2lite::parse_endpoint(broker));
    for (const auto& s : jd::JdXapp::subscriptions()) client.send(s);
    std::ofstream events(events_path);
    events << "ts_us,bler,detected,policy_value\n";
    std::size_t written = 0;
    auto flush_events = [&] {
      const auto& ev = xapp.events();
      for (; written < ev.size(); ++written) {
        const auto& e = ev[written];
        events << e.ts_us << ',' << e.bler << ',' << (e.detected ? 1 : 0) << ','
               << (e.policy_value ? std::to_string(*e.policy_value) : std::string()) << '\n';
      }
      events.flush();
    };
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop && !client.disconnected()) {
      auto env = client.receive(500);
      if (!env) continue;
      if (env->service == e2lite::Service::kError) {
        const auto& err = std::get<e2lite::ErrorInfo>(env->payload);
        std::cerr << "jd: broker error " << err.code << ": " << err.reason << '\n';
        continue;
      }
      for (const auto& ctl : xapp.on_envelope(*env)) client.send_with_retry(ctl);
      flush_events();
    }
    flush_events();
    std::cout << "policies " << xapp.policies_sent() << " releases " << xapp.releases_sent() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "jd-xapp: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
