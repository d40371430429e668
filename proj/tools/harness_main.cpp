// harness run|roc|compare <scenario.cfg> [--thresholds ...] [--assert]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oranlab/harness/report.hpp"

using namespace oranlab;
using namespace oranlab::harness;

namespace {

struct Checks {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

// Optional "expect" block of the scenario file: max_p95_ms, min_p_d,
// max_p_fa, max_collateral.
nlohmann::json read_expect(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.contains("expect")) return nlohmann::json::object();
  return j["expect"];
}

void check_report(const MetricsReport& r, const nlohmann::json& expect, Checks& c) {
  c.expect(!r.failed, "run failed: " + r.failure);
  for (std::size_t i = 1; i < r.cdf.size(); ++i)
    c.expect(r.cdf[i].fraction >= r.cdf[i - 1].fraction, "CDF decreases");
  auto in01 = [](const std::optional<double>& v) { return !v || (*v >= 0 && *v <= 1); };
  c.expect(in01(r.p_d) && in01(r.p_fa), "probability outside [0, 1]");
  if (auto v = expect.find("max_p95_ms"); v != expect.end())
    c.expect(r.p95_rtt_ms && *r.p95_rtt_ms <= v->get<double>(), "P95 above max_p95_ms");
  if (auto v = expect.find("min_p_d"); v != expect.end())
    c.expect(r.p_d && *r.p_d >= v->get<double>(), "P_d below min_p_d");
  if (auto v = expect.find("max_p_fa"); v != expect.end())
    c.expect(r.p_fa && *r.p_fa < v->get<double>(), "P_fa not below max_p_fa");
  if (auto v = expect.find("max_collateral"); v != expect.end())
    c.expect(r.collateral_rejection_rate && *r.collateral_rejection_rate <= v->get<double>(),
             "collateral above max_collateral");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiment harness"};
  app.require_subcommand(1);
  std::string path, out_dir = ".";
  std::vector<double> thresholds;
  bool assert_mode = false;
  std::optional<std::uint64_t> seed;
  for (auto* cmd : {app.add_subcommand("run", "run one scenario"),
                    app.add_subcommand("roc", "sweep detection thresholds"),
                    app.add_subcommand("compare", "paired runs without and with the xApp")}) {
    cmd->add_option("scenario", path, "scenario JSON file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", out_dir, "directory for report.json, cdf.csv, roc.csv");
    cmd->add_option("--seed", seed, "overrides the scenario seed");
    cmd->add_flag("--assert", assert_mode, "exit nonzero when a check fails");
    if (cmd->get_name() == "roc")
      cmd->add_option("--thresholds", thresholds, "gamma values (MMTC_SS) or window sizes (URLLC_JAM)")
          ->delimiter(',');
  }
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    auto cfg = load_scenario(path);
    if (seed) {
      cfg.seed = *seed;
      cfg.sim.seed = *seed;
    }
    auto expect = read_expect(path);
    Checks checks;
    const std::string cmd = app.get_subcommands().front()->get_name();

    if (cmd == "run") {
      auto r = run_scenario(cfg);
      write_file(out_dir + "/report.json", report_to_json(r).dump(2) + "\n");
      write_file(out_dir + "/cdf.csv", kCdfHeader + cdf_rows("run", r.cdf));
      check_report(r, expect, checks);
      std::cout << "P95 " << number_or_null(r.p95_rtt_ms).dump() << " ms  P_d "
                << number_or_null(r.p_d).dump() << "  P_fa " << number_or_null(r.p_fa).dump()
                << "  hash " << r.config_hash << '\n';
    } else if (cmd == "compare") {
      auto r = compare_mitigation(cfg);
      write_file(out_dir + "/report.json", compare_to_json(r).dump(2) + "\n");
      write_file(out_dir + "/cdf.csv", std::string(kCdfHeader) +
                                            cdf_rows("without_xapp", r.without_xapp.cdf) +
                                            cdf_rows("with_xapp", r.with_xapp.cdf));
      check_report(r.without_xapp, nlohmann::json::object(), checks);
      check_report(r.with_xapp, nlohmann::json::object(), checks);
      double floor = 0.9;  // jammer off: mitigation must not hurt
      if (cfg.sim.jammer.mode == ransim::JammerMode::kPermanent) floor = 1.2;
      if (cfg.sim.jammer.mode == ransim::JammerMode::kKeyed) floor = 2.0;
      checks.expect(r.reduction_ratio && *r.reduction_ratio >= floor,
                    "reduction ratio below " + format_number(floor));
      std::cout << "P95 without " << number_or_null(r.without_xapp.p95_rtt_ms).dump()
                << " ms, with " << number_or_null(r.with_xapp.p95_rtt_ms).dump()
                << " ms, ratio " << number_or_null(r.reduction_ratio).dump() << '\n';
    } else {
      if (thresholds.empty()) thresholds = cfg.thresholds;
      auto rows = roc_sweep(cfg, thresholds);
      write_file(out_dir + "/roc.csv", roc_csv(rows));
      nlohmann::ordered_json j = {{"scenario", to_string(cfg.scenario)},
                                  {"seed", cfg.seed},
                                  {"config_hash", config_hash(cfg)},
                                  {"rows", nlohmann::ordered_json::array()}};
      for (const auto& row : rows)
        j["rows"].push_back({{"threshold", row.threshold},
                             {"p_d", number_or_null(row.p_d)},
                             {"p_fa", row.p_fa},
                             {"beta", number_or_null(row.beta)}});
      write_file(out_dir + "/report.json", j.dump(2) + "\n");
      for (std::size_t i = 1; i < rows.size(); ++i) {
        auto pd0 = rows[i - 1].p_d.value_or(0), pd1 = rows[i].p_d.value_or(0);
        if (cfg.scenario == ScenarioKind::kMmtcSs) {
          checks.expect(rows[i].threshold < rows[i - 1].threshold ||
                            (pd1 <= pd0 && rows[i].p_fa <= rows[i - 1].p_fa),
                        "P_d or P_fa increases with gamma");
        } else {
          checks.expect(rows[i].threshold < rows[i - 1].threshold || pd1 >= pd0,
                        "P_d decreases with N");
        }
      }
      std::cout << roc_csv(rows);
    }

    for (const auto& f : checks.failures) std::cerr << "check failed: " << f << '\n';
    if (assert_mode && !checks.failures.empty()) return 2;
  } catch (const std::exception& e) {
    std::cerr << "harness: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
