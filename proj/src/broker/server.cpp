#include "fridge/broker/server.hpp"

#include <array>

#include <spdlog/spdlog.h>

namespace fridge::broker {

using namespace std::chrono_literals;

struct BrokerServer::Connection {
  net::Socket socket;
  std::shared_ptr<Session> session;
  std::atomic<int> threads_done{0};
  std::thread reader;
  std::thread writer;

  [[nodiscard]] bool finished() const { return threads_done.load() == 2; }
  void join() {
    if (reader.joinable()) reader.join();
    if (writer.joinable()) writer.join();
  }
};

BrokerServer::BrokerServer(ServerOptions options) : options_(std::move(options)), broker_(options_.broker) {}

BrokerServer::~BrokerServer() { stop(); }

void BrokerServer::start() {
  listener_ = net::Listener::bind(options_.listen);
  port_ = listener_.port();
  spdlog::info("event=listen address={}:{} queue_capacity={} keepalive_s={}", options_.listen.host, port_,
               options_.broker.queue_capacity, options_.broker.keepalive.count());
  acceptor_ = std::thread([this] { accept_loop(); });
}

void BrokerServer::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  listener_.close();
  std::list<std::unique_ptr<Connection>> connections;
  {
    std::lock_guard lock(connections_mutex_);
    connections.swap(connections_);
  }
  for (auto& conn : connections) {
    broker_.close_session(conn->session->id());
    conn->socket.shutdown();
  }
  for (auto& conn : connections) conn->join();
}

void BrokerServer::accept_loop() {
  while (!stopping_.load()) {
    auto socket = listener_.accept(100ms);
    reap_finished();
    if (!socket) continue;
    socket->set_send_timeout(options_.send_timeout);
    auto conn = std::make_unique<Connection>();
    conn->socket = std::move(*socket);
    conn->session = broker_.open_session();
    auto* raw = conn.get();
    {
      std::lock_guard lock(connections_mutex_);
      connections_.push_back(std::move(conn));
    }
    raw->reader = std::thread([this, raw] { serve_reads(*raw); });
    raw->writer = std::thread([this, raw] { serve_writes(*raw); });
  }
}

void BrokerServer::reap_finished() {
  std::list<std::unique_ptr<Connection>> done;
  {
    std::lock_guard lock(connections_mutex_);
    for (auto it = connections_.begin(); it != connections_.end();) {
      if ((*it)->finished()) {
        done.push_back(std::move(*it));
        it = connections_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& conn : done) conn->join();
}

void BrokerServer::serve_reads(Connection& conn) {
  const auto id = conn.session->id();
  wire::FrameReader frames;
  std::array<std::uint8_t, 64 * 1024> buffer{};
  auto last_activity = std::chrono::steady_clock::now();
  std::string reason = "peer closed";
  try {
    bool open = true;
    while (open && !stopping_.load()) {
      const auto n = conn.socket.receive(buffer, 250ms);
      if (!n) {
        if (std::chrono::steady_clock::now() - last_activity > options_.broker.keepalive) {
          reason = "keepalive timeout";
          break;
        }
        continue;
      }
      if (*n == 0) break;
      last_activity = std::chrono::steady_clock::now();
      frames.feed(std::span(buffer.data(), *n));
      while (open) {
        auto result = frames.next();
        if (!result) break;
        if (!result->ok()) {
          reason = std::string("protocol error ") + wire::to_string(result->error());
          open = false;
          break;
        }
        for (const auto& action : broker_.handle_frame(*conn.session, result->frame())) {
          if (action.kind == ActionKind::close) {
            reason = action.reason;
            open = false;
          }
        }
      }
    }
  } catch (const std::exception& e) {
    reason = e.what();
  }
  spdlog::debug("event=close session={} reason=\"{}\"", id, reason);
  // Closing the session closes its queue; the writer flushes what is left
  // (a refusal CONNACK, say) and then shuts the socket down.
  broker_.close_session(id);
  conn.threads_done.fetch_add(1);
}

void BrokerServer::serve_writes(Connection& conn) {
  auto& queue = conn.session->outbound();
  try {
    while (true) {
      auto message = queue.pop(250ms);
      if (!message) {
        if (queue.closed()) break;
        continue;
      }
      conn.socket.send_all(**message);
    }
  } catch (const std::exception& e) {
    spdlog::debug("event=write_failed session={} error=\"{}\"", conn.session->id(), e.what());
  }
  broker_.close_session(conn.session->id());
  conn.socket.shutdown();
  conn.threads_done.fetch_add(1);
}

}  // namespace fridge::broker
