#include <gtest/gtest.h>

#include "oranlab/harness/report.hpp"

using namespace oranlab;
using namespace oranlab::harness;

namespace {

ScenarioConfig short_urllc(const char* mode) {
  return scenario_from_json({{"scenario", "URLLC_JAM"},
                             {"duration_s", 20},
                             {"jammer", {{"mode", mode}, {"start_ms", 2000}}},
                             {"jd", {{"beta", 0.25}, {"n_window", 1000}}}});
}

}  // namespace

TEST(Cdf, NearestRank) {
  EXPECT_DOUBLE_EQ(percentile({10, 20, 30, 40}, 0.5), 20);
  EXPECT_DOUBLE_EQ(percentile({10, 20, 30, 40}, 0.95), 40);
  EXPECT_DOUBLE_EQ(percentile({40, 10, 30, 20}, 0.25), 10);
  EXPECT_DOUBLE_EQ(percentile({5}, 0.95), 5);
  EXPECT_THROW(percentile({}, 0.5), EmptySamples);
  EXPECT_THROW(percentile({1, 2}, 0.0), ConfigError);
}

TEST(Cdf, InfinityInTail) {
  std::vector<double> xs(19, 10.0);
  xs.push_back(kInf);
  EXPECT_DOUBLE_EQ(percentile(xs, 0.95), 10.0);
  xs.push_back(kInf);
  EXPECT_TRUE(std::isinf(percentile(xs, 0.95)));
  auto pts = cdf(xs).points();
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_DOUBLE_EQ(pts.back().fraction, 1.0);
  EXPECT_EQ(number_or_null(pts.back().value), "inf");
}

TEST(Cdf, PointsAreMonotone) {
  auto pts = cdf({3, 1, 2, 2, 5, 1}).points();
  std::vector<CdfPoint> expect{{1, 2.0 / 6}, {2, 4.0 / 6}, {3, 5.0 / 6}, {5, 1.0}};
  EXPECT_EQ(pts, expect);
}

TEST(Scenario, DefaultsAndOverrides) {
  auto c = scenario_from_json({{"scenario", "MMTC_SS"}, {"seed", 4}, {"ssd", {{"train_s", 1800}}}});
  EXPECT_EQ(c.scenario, ScenarioKind::kMmtcSs);
  EXPECT_EQ(c.sim.seed, 4u);
  EXPECT_TRUE(c.sim.access.enabled);
  EXPECT_TRUE(c.sim.ues.empty());
  EXPECT_DOUBLE_EQ(c.sim.access.traffic.attack_start_s, 1800);

  auto u = scenario_from_json({{"jammer", {{"mode", "keyed"}, {"on_ms", 50}}}});
  EXPECT_EQ(u.sim.jammer.mode, ransim::JammerMode::kKeyed);
  EXPECT_EQ(u.sim.jammer.on_ms, 50);
  EXPECT_EQ(u.sim.jammer.off_ms, 100);

  EXPECT_THROW(scenario_from_json({{"scenario", "EMBB"}}), ConfigError);
  EXPECT_THROW(scenario_from_json({{"duration_s", -1}}), ConfigError);
  EXPECT_THROW(scenario_from_json({{"jd", {{"cap", "max"}}}}), ConfigError);
  EXPECT_THROW(scenario_from_json({{"jammer", {{"mode", 3}}}}), ConfigError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST(Scenario, HashTracksContent) {
  auto a = default_scenario(ScenarioKind::kUrllcJam);
  auto b = a;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.sim.jammer.sjr_db += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  auto back = scenario_from_json(to_json(a));
  EXPECT_EQ(config_hash(back), config_hash(a));
}

TEST(Runner, UrllcReportIsDeterministic) {
  auto c = short_urllc("permanent");
  auto a = report_to_json(run_scenario(c)).dump();
  auto b = report_to_json(run_scenario(c)).dump();
  EXPECT_EQ(a, b);
  auto r = run_scenario(c);
  EXPECT_FALSE(r.failed) << r.failure;
  ASSERT_TRUE(r.p95_rtt_ms);
  EXPECT_GT(r.pings, 150u);
  EXPECT_GE(r.policies_sent, 1u);
  EXPECT_DOUBLE_EQ(*r.beta, 0.25);
  EXPECT_GT(r.broker.controls_forwarded, 0u);
}

TEST(Runner, InvalidConfigGivesFailedReport) {
  auto c = default_scenario(ScenarioKind::kUrllcJam);
  c.duration_s = 0;
  auto r = run_scenario(c);
  EXPECT_TRUE(r.failed);
  EXPECT_FALSE(r.failure.empty());
  auto j = report_to_json(r);
  EXPECT_TRUE(j["p95_rtt_ms"].is_null());
  EXPECT_TRUE(j.contains("p_fa"));
}

TEST(Runner, ShortMmtcRun) {
  auto c = scenario_from_json({{"scenario", "MMTC_SS"}, {"duration_s", 3 * 3600}, {"ssd", {{"gamma", 4}}}});
  auto r = run_scenario(c);
  ASSERT_FALSE(r.failed) << r.failure;
  EXPECT_EQ(r.profile_tas, 3u);
  ASSERT_TRUE(r.p_d);
  EXPECT_GT(r.attacks, 10u);
  EXPECT_GT(*r.p_d, 0.5);
  EXPECT_EQ(report_to_json(r).dump(), report_to_json(run_scenario(c)).dump());
}

TEST(Runner, CompareArmsShareSeed) {
  auto cmp = compare_mitigation(short_urllc("off"));
  EXPECT_FALSE(cmp.without_xapp.xapp_enabled);
  EXPECT_TRUE(cmp.with_xapp.xapp_enabled);
  EXPECT_EQ(cmp.without_xapp.pings, cmp.with_xapp.pings);
  ASSERT_TRUE(cmp.reduction_ratio);
}

TEST(Roc, EmptyThresholds) {
  EXPECT_TRUE(roc_sweep(default_scenario(ScenarioKind::kUrllcJam), {}).empty());
  auto csv = roc_csv({{1.0, std::nullopt, 0.5, std::nullopt}});
  EXPECT_EQ(csv, "threshold,p_d,p_fa,beta\n1,,0.5,\n");
}
