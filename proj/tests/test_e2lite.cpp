#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "oranlab/e2lite/broker.hpp"
#include "oranlab/e2lite/codec.hpp"

using namespace oranlab;
using namespace oranlab::e2lite;

namespace {

E2Envelope random_envelope(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_int_distribution<std::int32_t> small(0, 1000);
  std::uniform_int_distribution<std::int64_t> big(0, std::int64_t{1} << 50);
  E2Envelope e;
  switch (kind(rng)) {
    case 0:
      e = make_report(big(rng), TbReport{small(rng), big(rng), small(rng) % 28, rng() % 2 == 0,
                                         rng() % 2 ? Direction::kDl : Direction::kUl});
      break;
    case 1: e = make_report(big(rng), McsAssignment{small(rng), big(rng), small(rng) % 28}); break;
    case 2: e = make_report(big(rng), RarEvent{small(rng), big(rng), small(rng)}); break;
    case 3: {
      McsCapPolicy p{small(rng), std::nullopt, std::nullopt};
      if (rng() % 2) p.cap = small(rng) % 28;
      if (rng() % 2) p.ttl_ms = big(rng);
      e = make_control(big(rng), p);
      break;
    }
    case 4: {
      TaRejectPolicy p;
      for (int i = 0, n = small(rng) % 5; i < n; ++i) p.tas.push_back(small(rng));
      if (rng() % 2) p.ttl_ms = big(rng);
      e = make_control(big(rng), p);
      break;
    }
    default:
      e = make_report(big(rng), ControlReceipt{static_cast<std::uint64_t>(big(rng)),
                                               rng() % 2 == 0, "reason \"q\" " + std::to_string(rng())});
  }
  e.msg_id = static_cast<std::uint64_t>(big(rng));
  return e;
}

struct Node {
  Broker& b;
  ConnectionId id;
  explicit Node(Broker& broker, const char* name = "node") : b(broker), id(broker.open(name)) {}
  std::vector<E2Envelope> drain() { return b.drain(id); }
};

}  // namespace

TEST(Codec, RoundtripRandomEnvelopes) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 20000; ++i) {
    auto e = random_envelope(rng);
    auto line = encode(e);
    ASSERT_EQ(line.back(), '\n');
    ASSERT_EQ(line.find('\n'), line.size() - 1);
    ASSERT_EQ(decode(line), e) << line;
  }
}

TEST(Codec, WireExample) {
  auto e = decode(R"({"msg_id":7,"service":"REPORT","style":"tb_report","ts_us":12000,)"
                  R"("payload":{"ue_id":1,"slot":12,"mcs":9,"ack":true,"direction":"DL"}})");
  EXPECT_EQ(e.msg_id, 7u);
  EXPECT_EQ(e.service, Service::kReport);
  EXPECT_EQ(std::get<TbReport>(e.payload), (TbReport{1, 12, 9, true, Direction::kDl}));
}

TEST(Codec, TruncatedLineIsParseError) {
  auto line = encode(make_report(5, RarEvent{1, 5, 3}));
  EXPECT_THROW(decode(line.substr(0, line.size() / 2)), ParseError);
  EXPECT_THROW(decode("not json"), ParseError);
  EXPECT_THROW(decode(R"({"msg_id":1,"service":"REPORT","style":"rar_event","ts_us":0})"), ParseError);
  EXPECT_THROW(decode(R"({"msg_id":-1,"service":"REPORT","style":"rar_event","ts_us":0,)"
                      R"("payload":{"ue_id":1,"ts_us":0,"ta":1}})"),
               ParseError);
}

TEST(Codec, UnknownStyleIsDistinct) {
  EXPECT_THROW(decode(R"({"msg_id":1,"service":"REPORT","style":"cqi_report","ts_us":0,"payload":{}})"),
               UnknownStyle);
  E2Envelope e = make_report(0, RarEvent{});
  e.style = "cqi_report";
  EXPECT_THROW(encode(e), EncodeError);
}

TEST(Codec, ReservedServicesRejected) {
  E2Envelope e = make_report(0, RarEvent{});
  e.service = Service::kInsert;
  EXPECT_THROW(encode(e), EncodeError);
  EXPECT_THROW(decode(R"({"msg_id":1,"service":"QUERY","style":"rar_event","ts_us":0,"payload":{}})"),
               ParseError);
}

TEST(Codec, PayloadServiceMismatch) {
  E2Envelope e = make_control(0, McsCapPolicy{1, 3, std::nullopt});
  e.service = Service::kReport;
  EXPECT_THROW(encode(e), EncodeError);
}

TEST(Broker, FifoToSingleSubscriber) {
  Broker b;
  Node node(b), app(b, "app");
  b.submit(node.id, make_subscribe("ran", std::string(style::kE2Setup)));
  b.submit(app.id, make_subscribe("jd", "tb_report"));
  ASSERT_EQ(app.drain().size(), 1u);  // ACK
  for (int i = 0; i < 3; ++i) b.submit(node.id, make_report(i, TbReport{1, i, 5, true, Direction::kDl}));
  auto got = app.drain();
  ASSERT_EQ(got.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(std::get<TbReport>(got[i].payload).slot, i);
    EXPECT_EQ(got[i].msg_id, static_cast<std::uint64_t>(i + 2));
  }
}

TEST(Broker, SubscribeIsIdempotent) {
  Broker b;
  Node node(b), app(b, "app");
  b.submit(node.id, make_subscribe("ran", std::string(style::kE2Setup)));
  b.submit(app.id, make_subscribe("jd", "tb_report"));
  b.submit(app.id, make_subscribe("jd", "tb_report"));
  EXPECT_EQ(b.subscriptions().size(), 1u);
  app.drain();
  b.submit(node.id, make_report(0, TbReport{}));
  EXPECT_EQ(app.drain().size(), 1u);
}

TEST(Broker, UeFilter) {
  Broker b;
  Node node(b), app(b, "app");
  b.submit(node.id, make_subscribe("ran", std::string(style::kE2Setup)));
  b.submit(app.id, make_subscribe("jd", "tb_report", std::vector<std::int32_t>{2}));
  app.drain();
  b.submit(node.id, make_report(0, TbReport{1, 0, 5, true, Direction::kDl}));
  b.submit(node.id, make_report(0, TbReport{2, 0, 5, true, Direction::kDl}));
  auto got = app.drain();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(std::get<TbReport>(got[0].payload).ue_id, 2);
}

TEST(Broker, ControlRoundtripWithReceipt) {
  Broker b;
  Node node(b), app(b, "app");
  b.submit(node.id, make_subscribe("ran", std::string(style::kE2Setup)));
  node.drain();
  auto ctl = make_control(10, McsCapPolicy{1, 1, std::nullopt});
  ctl.msg_id = 77;
  ASSERT_EQ(send_control(b, app.id, ctl), SubmitStatus::kOk);
  auto at_node = node.drain();
  ASSERT_EQ(at_node.size(), 1u);
  EXPECT_EQ(std::get<McsCapPolicy>(at_node[0].payload), (McsCapPolicy{1, 1, std::nullopt}));
  b.submit(node.id, make_report(11, ControlReceipt{at_node[0].msg_id, true, "ok"}));
  auto at_app = app.drain();
  ASSERT_EQ(at_app.size(), 1u);
  EXPECT_EQ(std::get<ControlReceipt>(at_app[0].payload).ref_msg_id, 77u);
}

TEST(Broker, ControlWithoutNodeFails) {
  Broker b;
  Node app(b, "app");
  EXPECT_EQ(b.submit(app.id, make_control(0, McsCapPolicy{1, 1, std::nullopt})),
            SubmitStatus::kDeliveryFailed);
  auto got = app.drain();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(std::get<ErrorInfo>(got[0].payload).code, "DeliveryFailed");
}

TEST(Broker, DirectionViolations) {
  Broker b;
  Node node(b), app(b, "app");
  b.submit(node.id, make_subscribe("ran", std::string(style::kE2Setup)));
  node.drain();
  EXPECT_EQ(b.submit(app.id, make_report(0, TbReport{})), SubmitStatus::kRejected);
  EXPECT_EQ(b.submit(node.id, make_control(0, McsCapPolicy{1, 1, std::nullopt})),
            SubmitStatus::kRejected);
  EXPECT_EQ(std::get<ErrorInfo>(app.drain().at(0).payload).code, "DirectionViolation");
  EXPECT_EQ(std::get<ErrorInfo>(node.drain().at(0).payload).code, "DirectionViolation");
}

TEST(Broker, ReservedServiceAnsweredWithError) {
  Broker b;
  Node app(b, "app");
  E2Envelope e = make_report(0, RarEvent{});
  e.service = Service::kPolicy;
  EXPECT_EQ(b.submit(app.id, e), SubmitStatus::kRejected);
  auto got = app.drain();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].service, Service::kError);
}

TEST(Broker, OverflowDisconnects) {
  Broker b(BrokerOptions{4});
  Node node(b), app(b, "app");
  b.submit(node.id, make_subscribe("ran", std::string(style::kE2Setup)));
  b.submit(app.id, make_subscribe("jd", "rar_event"));
  for (int i = 0; i < 10; ++i) b.submit(node.id, make_report(i, RarEvent{1, i, 1}));
  EXPECT_FALSE(b.is_open(app.id));
  auto got = app.drain();
  ASSERT_EQ(got.size(), 5u);
  EXPECT_EQ(std::get<ErrorInfo>(got.back().payload).code, "QueueOverflow");
  EXPECT_EQ(b.stats().overflow_disconnects, 1u);
  EXPECT_TRUE(b.subscriptions().empty());
}

TEST(Broker, ConcurrentFanOutKeepsOrder) {
  Broker b;
  Node node(b);
  b.submit(node.id, make_subscribe("ran", std::string(style::kE2Setup)));
  constexpr int kSubs = 4, kMsgs = 20000;
  std::vector<ConnectionId> apps;
  for (int s = 0; s < kSubs; ++s) {
    apps.push_back(b.open("app"));
    b.submit(apps.back(), make_subscribe("s" + std::to_string(s), "rar_event"));
    b.drain(apps.back());
  }
  std::vector<std::vector<std::int64_t>> seen(kSubs);
  std::atomic<bool> done{false};
  std::vector<std::thread> readers;
  for (int s = 0; s < kSubs; ++s)
    readers.emplace_back([&, s] {
      while (seen[s].size() < kMsgs) {
        for (auto& e : b.drain(apps[s], 512)) seen[s].push_back(std::get<RarEvent>(e.payload).ts_us);
        if (done && b.pending(apps[s]) == 0 && seen[s].size() < kMsgs) std::this_thread::yield();
      }
    });
  for (int i = 0; i < kMsgs; ++i) b.submit(node.id, make_report(i, RarEvent{1, i, 3}));
  done = true;
  for (auto& t : readers) t.join();
  for (int s = 0; s < kSubs; ++s) {
    ASSERT_EQ(seen[s].size(), static_cast<std::size_t>(kMsgs));
    for (int i = 0; i < kMsgs; ++i) ASSERT_EQ(seen[s][i], i);
  }
  EXPECT_EQ(b.stats().reports_delivered, static_cast<std::uint64_t>(kSubs * kMsgs));
}
