#pragma once

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <thread>

#include "fridge/broker/broker.hpp"
#include "fridge/net/socket.hpp"

namespace fridge::broker {

struct ServerOptions {
  net::Endpoint listen{"0.0.0.0", 1884};
  BrokerConfig broker;
  /// A peer that stops reading is dropped once a send blocks this long.
  std::chrono::milliseconds send_timeout{5000};
};

/// TCP front end for a Broker. Each connection gets a reader thread that
/// decodes and applies frames and a writer thread that drains the session's
/// outbound queue to the socket.
class BrokerServer {
 public:
  explicit BrokerServer(ServerOptions options);
  ~BrokerServer();
  BrokerServer(const BrokerServer&) = delete;
  BrokerServer& operator=(const BrokerServer&) = delete;

  /// Binds and starts accepting. Throws net::SocketError when the bind fails.
  void start();
  /// Closes every connection and joins all threads. Idempotent.
  void stop();

  /// The bound port; meaningful after start().
  [[nodiscard]] std::uint16_t port() const noexcept { return port_; }
  [[nodiscard]] Broker& broker() noexcept { return broker_; }

 private:
  struct Connection;

  void accept_loop();
  void reap_finished();
  void serve_reads(Connection& conn);
  void serve_writes(Connection& conn);

  ServerOptions options_;
  Broker broker_;
  net::Listener listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex connections_mutex_;
  std::list<std::unique_ptr<Connection>> connections_;
};

}  // namespace fridge::broker
