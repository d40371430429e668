#include <gtest/gtest.h>

#include <cmath>

#include "oranlab/ransim/simulator.hpp"

using namespace oranlab;
using namespace oranlab::ransim;

namespace {

struct Counts {
  std::size_t tbs = 0, nacks = 0, assignments = 0, rars = 0;
};

Counts count(const std::vector<e2lite::E2Envelope>& envs) {
  Counts c;
  for (const auto& e : envs) {
    if (const auto* tb = std::get_if<e2lite::TbReport>(&e.payload)) {
      ++c.tbs;
      c.nacks += tb->ack ? 0 : 1;
    } else if (std::holds_alternative<e2lite::McsAssignment>(e.payload)) {
      ++c.assignments;
    } else if (std::holds_alternative<e2lite::RarEvent>(e.payload)) {
      ++c.rars;
    }
  }
  return c;
}

}  // namespace

TEST(LinkModel, LogisticShape) {
  LinkModelParams p;
  for (int m = 0; m <= p.mcs_max; ++m) {
    double theta = -2.0 + m;
    EXPECT_NEAR(tb_outcome(theta, m, p), 0.5, 1e-12);
    EXPECT_NEAR(tb_outcome(theta + 1.0, m, p), 1.0 / (1.0 + std::exp(-2.0)), 1e-12);
    EXPECT_LT(tb_outcome(theta - 0.5, m, p), tb_outcome(theta + 0.5, m, p));
  }
  EXPECT_THROW(tb_outcome(0.0, 28, p), ConfigError);
  EXPECT_THROW(tb_outcome(0.0, -1, p), ConfigError);
}

TEST(LinkModel, SelectMcsMatchesClosedForm) {
  LinkModelParams p;
  for (double s = -5.0; s <= 30.0; s += 0.37) {
    // BLER <= 0.1  <=>  theta0 + m <= s - ln(9) / k
    int expect = static_cast<int>(std::floor(s - std::log(9.0) / 2.0 + 2.0));
    expect = std::clamp(expect, 0, p.mcs_max);
    LinkState l{1, 0.0, 0, s};
    EXPECT_EQ(adapt_mcs(l, p), expect) << s;
    EXPECT_EQ(adapt_mcs(l, p, 3), std::min(expect, 3));
  }
}

TEST(LinkModel, EffectiveSinr) {
  EXPECT_DOUBLE_EQ(effective_sinr_db(20.0, std::nullopt), 20.0);
  EXPECT_NEAR(effective_sinr_db(20.0, 20.0), 20.0 - 10.0 * std::log10(2.0), 1e-12);
  EXPECT_LT(effective_sinr_db(25.0, 0.0), 0.0);
}

TEST(Jammer, KeyedDutyCycle) {
  JammerConfig j{JammerMode::kKeyed, 100, 100, 0.0, 50, std::nullopt};
  int on = 0;
  for (int t = 50; t < 50 + 2000; ++t) on += jam_active(j, t);
  EXPECT_EQ(on, 1000);
  EXPECT_FALSE(jam_active(j, 49));
  EXPECT_TRUE(jam_active(j, 50));
  EXPECT_FALSE(jam_active(j, 150));
  j.stop_ms = 120;
  EXPECT_FALSE(jam_active(j, 130));
  EXPECT_THROW(jammer_mode_from_string("pulsed"), ConfigError);
}

TEST(Simulator, DeterministicForSeed) {
  SimConfig c;
  c.jammer.mode = JammerMode::kKeyed;
  RanSimulator a(c), b(c);
  EXPECT_EQ(a.step(3000), b.step(3000));
  c.seed = 1;
  RanSimulator d(c);
  EXPECT_NE(RanSimulator(SimConfig{}).step(3000), d.step(3000));
}

TEST(Simulator, OneTbReportPerSlotAndAssignmentsOnAdaptation) {
  SimConfig c;
  c.channel.fading_sd_db = 0.0;
  RanSimulator sim(c);
  auto n = count(sim.step(1000));
  EXPECT_EQ(n.tbs, 1000u);
  // Without fading the SINR never changes, so only the initial assignment
  // plus one per adaptation period.
  EXPECT_EQ(n.assignments, 10u);
  EXPECT_EQ(sim.link(1).current_mcs, adapt_mcs(LinkState{1, 45, 0, 25.0}, c.link));
}

TEST(Simulator, JammingRaisesBler) {
  SimConfig off, jam;
  jam.jammer.mode = JammerMode::kPermanent;
  jam.jammer.sjr_db = 0.0;
  auto a = count(RanSimulator(off).step(20000));
  auto b = count(RanSimulator(jam).step(20000));
  double bo = static_cast<double>(a.nacks) / a.tbs, bj = static_cast<double>(b.nacks) / b.tbs;
  EXPECT_LT(bo, 0.2);
  EXPECT_GT(bj, bo + 0.1);
}

TEST(Simulator, CapPolicy) {
  SimConfig c;
  RanSimulator sim(c);
  sim.step(50);
  auto res = sim.apply(e2lite::McsCapPolicy{1, 2, std::nullopt});
  EXPECT_TRUE(res.accepted);
  EXPECT_EQ(sim.cap_of(1), 2);
  auto envs = sim.step(200);
  bool saw = false;
  for (const auto& e : envs) {
    if (const auto* m = std::get_if<e2lite::McsAssignment>(&e.payload)) {
      EXPECT_LE(m->mcs, 2);
      saw = true;
    }
    if (const auto* tb = std::get_if<e2lite::TbReport>(&e.payload)) {
      EXPECT_LE(tb->mcs, 2);
    }
  }
  EXPECT_TRUE(saw);
  EXPECT_TRUE(sim.apply(e2lite::McsCapPolicy{1, std::nullopt, std::nullopt}).accepted);
  EXPECT_FALSE(sim.cap_of(1));
  EXPECT_FALSE(sim.apply(e2lite::McsCapPolicy{9, 1, std::nullopt}).accepted);
  EXPECT_FALSE(sim.apply(e2lite::McsCapPolicy{1, 28, std::nullopt}).accepted);
}

TEST(Simulator, CapTtlExpires) {
  RanSimulator sim(SimConfig{});
  EXPECT_TRUE(sim.apply(e2lite::McsCapPolicy{1, 1, 100}).accepted);
  sim.step(99);
  EXPECT_EQ(sim.cap_of(1), 1);
  sim.step(2);
  EXPECT_FALSE(sim.cap_of(1));
}

TEST(Simulator, PingsComplete) {
  SimConfig c;
  RanSimulator sim(c);
  sim.step(10000);
  ASSERT_GE(sim.pings().size(), 95u);
  for (const auto& p : sim.pings()) {
    EXPECT_TRUE(p.delivered);
    EXPECT_GE(p.rtt_ms, static_cast<double>(c.ping.pre_dl_min_ms + c.ping.post_dl_ms));
  }
}

TEST(Access, TaJitterMapping) {
  AccessDevice d{1, 10, false, {0.15, 0.7, 0.15}};
  EXPECT_EQ(ta_of(d, 0.0), 9);
  EXPECT_EQ(ta_of(d, 0.149), 9);
  EXPECT_EQ(ta_of(d, 0.15), 10);
  EXPECT_EQ(ta_of(d, 0.849), 10);
  EXPECT_EQ(ta_of(d, 0.85), 11);
  d.base_ta = 0;
  EXPECT_EQ(ta_of(d, 0.0), 0);
}

TEST(Access, RatesAndBursts) {
  AccessConfig a;
  a.enabled = true;
  AccessGenerator g(a, 3);
  std::size_t legit = 0, attack = 0;
  const std::int64_t hours = 20;
  g.generate_until(hours * 3600 * 1000000LL, [&](const AccessRequest& r) {
    (r.attacker ? attack : legit) += 1;
  });
  double per_min = static_cast<double>(legit) / (hours * 60.0);
  EXPECT_NEAR(per_min, 3.0, 0.15);
  double per_hour = static_cast<double>(g.attacks().size()) / hours;
  EXPECT_NEAR(per_hour, 15.0, 2.0);
  EXPECT_NEAR(static_cast<double>(attack), 12.0 * g.attacks().size(), 12.0);
  for (const auto& w : g.attacks()) EXPECT_EQ(w.end_us - w.start_us, 22000000);
}

TEST(Simulator, TaRejectPolicy) {
  SimConfig c;
  c.ues.clear();
  c.access.enabled = true;
  c.access.devices = {AccessDevice{100, 10, false, {0.0, 1.0, 0.0}}};
  c.access.traffic.legit_rate_per_min = 60;
  RanSimulator sim(c);
  EXPECT_TRUE(sim.apply(e2lite::TaRejectPolicy{{10}, std::nullopt}).accepted);
  EXPECT_FALSE(sim.apply(e2lite::TaRejectPolicy{{-1}, std::nullopt}).accepted);
  sim.step(60000);
  ASSERT_FALSE(sim.access_log().empty());
  EXPECT_EQ(sim.rejected_count(), sim.access_log().size());
}

TEST(Config, JsonRoundtripAndValidation) {
  SimConfig c;
  c.jammer.mode = JammerMode::kKeyed;
  c.jammer.stop_ms = 5000;
  c.ues.push_back(UeConfig{2, 50.0, false, true});
  json j = c;
  SimConfig back;
  from_json(j, back);
  EXPECT_EQ(json(back).dump(), j.dump());

  SimConfig alias;
  from_json(json::parse(R"({"jammer":{"jam_power_rel_db":3.5,"sjr_db":9}})"), alias);
  EXPECT_DOUBLE_EQ(alias.jammer.sjr_db, 3.5);

  SimConfig bad;
  bad.ues.push_back(UeConfig{});
  EXPECT_THROW(validate(bad), ConfigError);
  bad = SimConfig{};
  bad.access.devices[0].jitter.p_zero = 0.5;
  EXPECT_THROW(validate(bad), ConfigError);
}
