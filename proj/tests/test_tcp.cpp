#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "oranlab/e2lite/tcp.hpp"

using namespace oranlab;
using namespace oranlab::e2lite;

namespace {

void raw_send(std::uint16_t port, const std::string& text, std::string* reply = nullptr) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_port = htons(port);
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::connect(fd, reinterpret_cast<sockaddr*>(&a), sizeof a), 0);
  ASSERT_TRUE(detail::write_all(fd, text));
  if (reply) {
    detail::LineReader r(fd);
    if (auto line = r.next(2000)) *reply = *line;
  }
  ::close(fd);
}

}  // namespace

TEST(Endpoint, Parse) {
  auto e = parse_endpoint("10.0.0.1:9000");
  EXPECT_EQ(e.host, "10.0.0.1");
  EXPECT_EQ(e.port, 9000);
  EXPECT_EQ(parse_endpoint(":5").port, 5);
  EXPECT_EQ(parse_endpoint("36422").host, "127.0.0.1");
  EXPECT_THROW(parse_endpoint("host:port"), ConfigError);
}

TEST(Tcp, ReportsAndControlsFlow) {
  Broker broker;
  std::string log = ::testing::TempDir() + "e2lite_tcp.log";
  std::remove(log.c_str());
  TcpBrokerServer server(broker, 0, log);
  Endpoint ep{"127.0.0.1", server.port()};
  TcpClient node(ep), app(ep);

  node.send(make_subscribe("ran", std::string(style::kE2Setup)));
  ASSERT_EQ(node.receive(2000)->service, Service::kSubscribeAck);
  app.send(make_subscribe("jd", "tb_report"));
  ASSERT_EQ(app.receive(2000)->service, Service::kSubscribeAck);

  for (int i = 0; i < 100; ++i) node.send(make_report(i, TbReport{1, i, 9, i % 3 != 0, Direction::kDl}));
  for (int i = 0; i < 100; ++i) {
    auto e = app.receive(2000);
    ASSERT_TRUE(e);
    EXPECT_EQ(std::get<TbReport>(e->payload).slot, i);
  }

  auto id = app.send_with_retry(make_control(100, McsCapPolicy{1, 1, std::nullopt}));
  auto ctl = node.receive(2000);
  ASSERT_TRUE(ctl);
  EXPECT_EQ(ctl->style, style::kMcsCapPolicy);
  node.send(make_report(101, ControlReceipt{ctl->msg_id, true, "cap installed"}));
  auto rc = app.receive(2000);
  ASSERT_TRUE(rc);
  EXPECT_EQ(std::get<ControlReceipt>(rc->payload).ref_msg_id, id);

  server.stop();
  std::ifstream in(log);
  std::string first;
  ASSERT_TRUE(std::getline(in, first));
  EXPECT_NE(first.find("e2_setup"), std::string::npos);
}

TEST(Tcp, MalformedLineGetsErrorUnknownStyleDropped) {
  Broker broker;
  TcpBrokerServer server(broker, 0);
  std::string reply;
  raw_send(server.port(), "{\"msg_id\":1,\n", &reply);
  EXPECT_NE(reply.find("ParseError"), std::string::npos);
  raw_send(server.port(),
           R"({"msg_id":1,"service":"REPORT","style":"cqi","ts_us":0,"payload":{}})"
           "\n");
  for (int i = 0; i < 100 && broker.stats().dropped_unknown_style == 0; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  EXPECT_EQ(broker.stats().dropped_unknown_style, 1u);
  EXPECT_EQ(broker.stats().dropped_malformed, 1u);
}

TEST(Tcp, ConnectFailureIsDeliveryFailed) {
  std::uint16_t port;
  {
    Broker b;
    TcpBrokerServer s(b, 0);
    port = s.port();
  }
  EXPECT_THROW(TcpClient(Endpoint{"127.0.0.1", port}), DeliveryFailed);
}

TEST(Tcp, FinishDeliversEverythingInFlight) {
  Broker broker;
  TcpBrokerServer server(broker, 0);
  Endpoint ep{"127.0.0.1", server.port()};
  TcpClient app(ep);
  app.send(make_subscribe("ssd", "rar_event"));
  app.receive(2000);
  {
    TcpClient node(ep);
    node.send(make_subscribe("ran", std::string(style::kE2Setup)));
    for (int i = 0; i < 20000; ++i) node.send(make_report(i, RarEvent{1, i, 4}));
    // Unread inbound data at close would otherwise trigger a reset.
    node.finish();
  }
  int got = 0;
  while (got < 20000 && app.receive(2000)) ++got;
  EXPECT_EQ(got, 20000);
  EXPECT_EQ(broker.stats().reports_published, 20000u);
}
