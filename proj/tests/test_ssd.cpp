#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oranlab/ssd/roc.hpp"

using namespace oranlab;
using namespace oranlab::ssd;

namespace {

constexpr std::int64_t kMin = 60000000;

e2lite::E2Envelope rar(std::int64_t ts_us, int ta) {
  return e2lite::make_report(ts_us, e2lite::RarEvent{1, ts_us, ta});
}

}  // namespace

TEST(Profile, ConstantRate) {
  ProfileBuilder b(60.0);
  for (int k = 0; k < 60; ++k)
    for (int i = 0; i < 3; ++i) b.add(k * kMin + i * 1000000, 10);
  auto p = b.finish(60 * kMin);
  ASSERT_EQ(p.tas.size(), 1u);
  EXPECT_DOUBLE_EQ(p.tas[10].mean, 3.0);
  EXPECT_DOUBLE_EQ(p.tas[10].std, 0.0);
  EXPECT_EQ(p.tas[10].samples, 60);
  EXPECT_DOUBLE_EQ(p.combined_mean(), 3.0);
}

TEST(Profile, MatchesTwoPassWithZeroFill) {
  std::mt19937_64 rng(11);
  std::poisson_distribution<int> pois(2.5);
  const int intervals = 500;
  std::map<int, std::vector<double>> counts;
  ProfileBuilder b(60.0);
  for (int k = 0; k < intervals; ++k) {
    for (int ta : {9, 10, 11, 25}) {
      // TA 25 only appears in the second half.
      int n = (ta == 25 && k < intervals / 2) ? 0 : pois(rng);
      counts[ta].push_back(n);
      for (int i = 0; i < n; ++i) b.add(k * kMin + (i + 1) * 1000, ta);
    }
  }
  auto p = b.finish(intervals * kMin);
  for (auto& [ta, xs] : counts) {
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    double sd = std::sqrt(var / xs.size());
    ASSERT_TRUE(p.tas.count(ta));
    EXPECT_LT(std::abs(p.tas[ta].mean - mean) / mean, 1e-9) << ta;
    EXPECT_LT(std::abs(p.tas[ta].std - sd) / sd, 1e-9) << ta;
    EXPECT_EQ(p.tas[ta].samples, intervals);
  }
}

TEST(Profile, PartialIntervalDroppedAndEmpty) {
  ProfileBuilder b(60.0);
  b.add(10, 5);
  b.add(kMin + 10, 5);
  auto p = b.finish(kMin + 30 * 1000000);
  EXPECT_EQ(p.tas[5].samples, 1);
  EXPECT_THROW(ProfileBuilder(60.0).finish(10 * kMin), EmptyTraining);
}

TEST(Profile, JsonRoundtrip) {
  KpiProfile p;
  p.tas[10] = {1.25, 0.5, 60};
  p.tas[11] = {0.1, 0.3, 60};
  EXPECT_EQ(profile_from_json(profile_to_json(p)), p);
  auto path = ::testing::TempDir() + "profile.json";
  save_profile(p, path);
  EXPECT_EQ(load_profile(path), p);
  EXPECT_THROW(profile_from_json(nlohmann::json::parse(R"({"interval_s":60})")), ConfigError);
}

TEST(Score, Examples) {
  KpiProfile p;
  p.tas[10] = {3.0, 0.75, 60};
  p.tas[11] = {0.25, 0.1, 60};
  SsdConfig cfg;
  EXPECT_DOUBLE_EQ(anomaly_score(12, 10, p, cfg), 12.0);
  EXPECT_DOUBLE_EQ(anomaly_score(3, 10, p, cfg), 0.0);
  EXPECT_DOUBLE_EQ(anomaly_score(7, 11, p, cfg), 13.5);  // std floored at 0.5
  EXPECT_DOUBLE_EQ(anomaly_score(2, 40, p, cfg), 4.0);   // unseen: zero profile
  cfg.unseen_ta_mode = UnseenTaMode::kIgnore;
  EXPECT_DOUBLE_EQ(anomaly_score(2, 40, p, cfg), 0.0);
}

TEST(IntervalCounter, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> gap(1, 20000000);
  std::uniform_int_distribution<int> ta(0, 6);
  IntervalCounter c(60.0);
  std::vector<std::pair<std::int64_t, int>> seen;
  std::int64_t t = 0;
  for (int i = 0; i < 20000; ++i) {
    t += gap(rng);
    int x = ta(rng);
    seen.emplace_back(t, x);
    auto got = c.add(t, x);
    std::int64_t expect = 0;
    for (auto it = seen.rbegin(); it != seen.rend() && it->first > t - kMin; ++it)
      expect += it->second == x;
    ASSERT_EQ(got, expect) << i;
  }
  c.advance(t + kMin);
  EXPECT_TRUE(c.counts().empty());
}

TEST(SsdXapp, TrainsThenBlocksBurst) {
  SsdConfig cfg;
  cfg.training_duration_s = 600;
  SsdXapp app(cfg);
  for (int k = 0; k < 10; ++k)
    for (int i = 0; i < 3; ++i) EXPECT_TRUE(app.on_envelope(rar(k * kMin + i * 7000000, 10)).empty());
  EXPECT_TRUE(app.training());
  std::vector<e2lite::E2Envelope> out;
  for (int i = 0; i < 12; ++i) {
    auto r = app.on_envelope(rar(10 * kMin + i * 2000000, 20));
    out.insert(out.end(), r.begin(), r.end());
  }
  EXPECT_FALSE(app.training());
  EXPECT_EQ(app.profile()->tas.size(), 1u);
  ASSERT_EQ(out.size(), 1u);  // blocks are idempotent
  EXPECT_EQ(std::get<e2lite::TaRejectPolicy>(out[0].payload).tas, std::vector<int>{20});
  EXPECT_TRUE(app.is_blocked(20, 11 * kMin));
  EXPECT_FALSE(app.is_blocked(10, 11 * kMin));
}

TEST(SsdXapp, HugeGammaNeverBlocks) {
  SsdConfig cfg;
  cfg.gamma = 1e9;
  KpiProfile p;
  p.tas[10] = {3.0, 1.0, 60};
  SsdXapp app(cfg, p);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(app.on_envelope(rar(i * 1000, 20)).empty());
}

TEST(SsdXapp, BlockTtl) {
  SsdConfig cfg;
  cfg.block_ttl_ms = 1000;
  KpiProfile p;
  p.tas[10] = {1.0, 1.0, 60};
  SsdXapp app(cfg, p);
  EXPECT_EQ(app.on_envelope(rar(0, 30)).size(), 1u);
  EXPECT_TRUE(app.is_blocked(30, 999999));
  EXPECT_FALSE(app.is_blocked(30, 1000000));
  EXPECT_EQ(app.on_envelope(rar(2000000, 30)).size(), 1u);
}

TEST(Roc, UnlabeledTraceRejected) {
  LabeledTrace t;
  EXPECT_THROW(roc_point({}, t, 60.0), LabelError);
}

TEST(Roc, PerfectSeparation) {
  LabeledTrace t;
  t.attacks = std::vector<AttackLabel>{{10 * kMin, 10 * kMin + 22000000, 20},
                                       {30 * kMin, 30 * kMin + 22000000, 20}};
  t.start_us = 0;
  t.end_us = 60 * kMin;
  std::vector<BlockRecord> blocks{{10 * kMin + 2000000, 20, std::nullopt}};
  auto r = roc_point(blocks, t, 60.0, 1.0);
  EXPECT_DOUBLE_EQ(*r.p_d, 1.0);  // a permanent block covers the second attack too
  EXPECT_DOUBLE_EQ(r.p_fa, 0.0);
  EXPECT_EQ(r.intervals, 60u);
}

TEST(Roc, FalseBlocksAndMisses) {
  LabeledTrace t;
  t.attacks = std::vector<AttackLabel>{{10 * kMin, 10 * kMin + 22000000, 20},
                                       {30 * kMin, 30 * kMin + 22000000, 20}};
  t.end_us = 60 * kMin;
  std::vector<BlockRecord> blocks{
      {10 * kMin + 1000, 21, 10 * kMin + 5000},  // neighbour TA during an attack: not false
      {40 * kMin, 10, std::nullopt},             // false
      {50 * kMin, 20, std::nullopt},             // after both attacks: false, detects nothing
  };
  auto r = roc_point(blocks, t, 60.0);
  EXPECT_DOUBLE_EQ(*r.p_d, 0.0);
  EXPECT_EQ(r.false_blocks, 2u);
  EXPECT_DOUBLE_EQ(r.p_fa, 2.0 / 60.0);

  t.attacks->clear();
  EXPECT_FALSE(roc_point(blocks, t, 60.0).p_d);
}
