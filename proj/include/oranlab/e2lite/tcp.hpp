#pragma once

// TCP transport for the E2-lite broker: newline-delimited envelopes over
// plain stream sockets (POSIX).

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "oranlab/e2lite/broker.hpp"
#include "oranlab/e2lite/codec.hpp"
#include "oranlab/error.hpp"

namespace oranlab::e2lite {

inline constexpr std::uint16_t kDefaultPort = 36422;

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;
};

// Accepts "host:port", ":port" or "port".
inline Endpoint parse_endpoint(const std::string& text) {
  Endpoint ep;
  auto colon = text.rfind(':');
  std::string port = text;
  if (colon != std::string::npos) {
    if (colon > 0) ep.host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range(port);
    ep.port = static_cast<std::uint16_t>(p);
  } catch (const std::exception&) {
    throw ConfigError("bad endpoint '" + text + "'");
  }
  return ep;
}

namespace detail {

inline bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

// Splits a byte stream into lines.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  // Returns the next line without its terminator; nullopt on EOF/error or
  // when timeout_ms elapses (timeout_ms < 0 blocks).
  std::optional<std::string> next(int timeout_ms = -1) {
    for (;;) {
      if (auto pos = buf_.find('\n'); pos != std::string::npos) {
        std::string line = buf_.substr(0, pos);
        buf_.erase(0, pos + 1);
        return line;
      }
      if (eof_) return std::nullopt;
      pollfd pfd{fd_, POLLIN, 0};
      int r = ::poll(&pfd, 1, timeout_ms);
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) return std::nullopt;
      char chunk[65536];
      ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        eof_ = true;
        return std::nullopt;
      }
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  bool eof() const { return eof_; }

 private:
  int fd_;
  std::string buf_;
  bool eof_ = false;
};

}  // namespace detail

class TcpBrokerServer {
 public:
  TcpBrokerServer(Broker& broker, std::uint16_t port, std::string log_path = {})
      : broker_(broker) {
    if (!log_path.empty()) {
      log_.open(log_path, std::ios::app);
      if (!log_) throw ConfigError("cannot open log file '" + log_path + "'");
    }
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw ConfigError(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
        ::listen(listen_fd_, 64) < 0) {
      std::string err = std::strerror(errno);
      ::close(listen_fd_);
      throw ConfigError("cannot listen on port " + std::to_string(port) + ": " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  ~TcpBrokerServer() { stop(); }

  TcpBrokerServer(const TcpBrokerServer&) = delete;
  TcpBrokerServer& operator=(const TcpBrokerServer&) = delete;

  std::uint16_t port() const { return port_; }

  void stop() {
    if (stopping_.exchange(true)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
    std::list<std::shared_ptr<Session>> sessions;
    {
      std::lock_guard lock(sessions_mu_);
      sessions.swap(sessions_);
    }
    for (auto& s : sessions) s->shutdown();
    for (auto& s : sessions) s->join();
  }

 private:
  struct Session : std::enable_shared_from_this<Session> {
    TcpBrokerServer* server = nullptr;
    int fd = -1;
    ConnectionId conn = 0;
    std::mutex mu;
    std::condition_variable cv;
    bool wake = false;
    std::atomic<bool> done{false};
    std::thread reader, writer;

    void shutdown() {
      done = true;
      ::shutdown(fd, SHUT_RDWR);
      {
        std::lock_guard lock(mu);
        wake = true;
      }
      cv.notify_all();
    }
    void join() {
      if (reader.joinable()) reader.join();
      if (writer.joinable()) writer.join();
      ::close(fd);
    }
  };

  void log_line(ConnectionId conn, char dir, std::string_view line) {
    if (!log_.is_open()) return;
    std::lock_guard lock(log_mu_);
    log_ << conn << ' ' << dir << ' ' << line;
    if (line.empty() || line.back() != '\n') log_ << '\n';
    log_.flush();
  }

  void accept_loop() {
    while (!stopping_) {
      int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR) continue;
        return;
      }
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      auto s = std::make_shared<Session>();
      s->server = this;
      s->fd = fd;
      std::weak_ptr<Session> weak = s;
      s->conn = broker_.open("tcp:" + std::to_string(fd), [weak] {
        if (auto sp = weak.lock()) {
          {
            std::lock_guard lock(sp->mu);
            sp->wake = true;
          }
          sp->cv.notify_one();
        }
      });
      s->reader = std::thread([this, s] { read_loop(*s); });
      s->writer = std::thread([this, s] { write_loop(*s); });
      std::lock_guard lock(sessions_mu_);
      sessions_.push_back(std::move(s));
    }
  }

  void read_loop(Session& s) {
    detail::LineReader reader(s.fd);
    while (!s.done) {
      auto line = reader.next(200);
      if (!line) {
        if (reader.eof()) break;
        continue;
      }
      log_line(s.conn, '>', *line);
      try {
        broker_.submit(s.conn, decode(*line));
      } catch (const UnknownStyle&) {
        broker_.note_dropped(true);
      } catch (const ParseError& e) {
        broker_.note_dropped(false);
        broker_.send_error(s.conn, "ParseError", e.what());
      }
    }
    broker_.close(s.conn);
    s.shutdown();
  }

  void write_loop(Session& s) {
    for (;;) {
      {
        std::unique_lock lock(s.mu);
        s.cv.wait_for(lock, std::chrono::milliseconds(200), [&] { return s.wake; });
        s.wake = false;
      }
      auto batch = broker_.drain(s.conn, 4096);
      std::string out;
      for (const auto& env : batch) {
        std::string line = encode(env);
        log_line(s.conn, '<', line);
        out += line;
      }
      if (!out.empty() && !detail::write_all(s.fd, out)) break;
      if (!batch.empty()) continue;
      if (s.done || !broker_.is_open(s.conn)) break;
    }
    ::shutdown(s.fd, SHUT_WR);
  }

  Broker& broker_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex sessions_mu_;
  std::list<std::shared_ptr<Session>> sessions_;
  std::mutex log_mu_;
  std::ofstream log_;
};

// Blocking client used by the simulator and xApp processes.
class TcpClient {
 public:
  explicit TcpClient(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res) != 0 ||
        !res)
      throw DeliveryFailed("cannot resolve " + ep.host);
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    int rc = fd_ < 0 ? -1 : ::connect(fd_, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc < 0) {
      std::string err = std::strerror(errno);
      if (fd_ >= 0) ::close(fd_);
      throw DeliveryFailed("cannot connect to " + ep.host + ":" + std::to_string(ep.port) +
                           ": " + err);
    }
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    reader_ = std::make_unique<detail::LineReader>(fd_);
  }

  ~TcpClient() {
    if (fd_ >= 0) ::close(fd_);
  }

  TcpClient(const TcpClient&) = delete;
  TcpClient& operator=(const TcpClient&) = delete;

  // Stamps the next outbound msg_id and sends. Returns the id used.
  std::uint64_t send(E2Envelope env) {
    env.msg_id = next_msg_id_++;
    if (!detail::write_all(fd_, encode(env))) throw DeliveryFailed("broker connection lost");
    return env.msg_id;
  }

  // send() with bounded exponential backoff between attempts.
  std::uint64_t send_with_retry(const E2Envelope& env, int attempts = 4, int backoff_ms = 50) {
    for (int i = 1;; ++i) {
      try {
        return send(env);
      } catch (const DeliveryFailed&) {
        if (i >= attempts) throw;
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms << (i - 1)));
      }
    }
  }

  // Next decodable envelope; lines with unknown styles are skipped and
  // counted. nullopt on timeout or disconnect.
  std::optional<E2Envelope> receive(int timeout_ms = -1) {
    for (;;) {
      auto line = reader_->next(timeout_ms);
      if (!line) return std::nullopt;
      try {
        return decode(*line);
      } catch (const UnknownStyle&) {
        ++dropped_;
      }
    }
  }

  // Half-closes the connection and reads until the broker closes its side,
  // so nothing in flight is lost to a reset. Returns what arrived meanwhile.
  std::vector<E2Envelope> finish(int timeout_ms = 2000) {
    ::shutdown(fd_, SHUT_WR);
    std::vector<E2Envelope> rest;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (!reader_->eof()) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) break;
      if (auto e = receive(static_cast<int>(left.count()))) rest.push_back(std::move(*e));
    }
    return rest;
  }

  bool disconnected() const { return reader_->eof(); }
  std::uint64_t dropped() const { return dropped_; }

 private:
  int fd_ = -1;
  std::unique_ptr<detail::LineReader> reader_;
  std::uint64_t next_msg_id_ = 1;
  std::uint64_t dropped_ = 0;
};

}  // namespace oranlab::e2lite
