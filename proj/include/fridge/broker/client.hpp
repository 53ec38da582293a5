#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>

#include "fridge/net/socket.hpp"
#include "fridge/wire/frame.hpp"

namespace fridge::broker {

class ClientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClientOptions {
  std::string client_id;
  /// A PINGREQ goes out whenever nothing was sent for half of this.
  std::chrono::seconds keepalive{60};
  std::chrono::milliseconds ack_timeout{5000};
};

/// Blocking pub-sub client. Incoming PUBLISH frames are handed to the
/// message handler on the client's own reader thread.
class PubSubClient {
 public:
  using MessageHandler = std::function<void(const std::string& topic, const wire::Bytes& body)>;

  /// Connects and waits for the CONNACK. Throws ClientError when the broker
  /// refuses the client id or does not answer in time.
  PubSubClient(const net::Endpoint& broker, ClientOptions options, MessageHandler on_message = {});
  ~PubSubClient();
  PubSubClient(const PubSubClient&) = delete;
  PubSubClient& operator=(const PubSubClient&) = delete;

  /// Waits for the SUBACK; throws ClientError when the filter is rejected.
  void subscribe(const std::string& filter);
  void publish(const std::string& topic, std::span<const std::uint8_t> body);
  void publish(const std::string& topic, std::string_view body);

  /// Sends DISCONNECT and closes the socket. Idempotent.
  void disconnect();
  [[nodiscard]] bool connected() const noexcept { return connected_.load(); }
  [[nodiscard]] const std::string& client_id() const noexcept { return options_.client_id; }

 private:
  void send(const wire::Frame& frame);
  wire::Frame await_ack(wire::FrameKind kind);
  void read_loop();

  ClientOptions options_;
  MessageHandler on_message_;
  net::Socket socket_;
  std::mutex send_mutex_;
  std::chrono::steady_clock::time_point last_send_;
  std::mutex subscribe_mutex_;
  std::mutex ack_mutex_;
  std::condition_variable ack_ready_;
  std::deque<wire::Frame> acks_;
  std::atomic<bool> connected_{false};
  std::atomic<bool> stopping_{false};
  std::thread reader_;
};

}  // namespace fridge::broker
