#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace fridge::net {

class SocketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "host:port"; throws std::invalid_argument on a malformed string.
  static Endpoint parse(const std::string& text);
  [[nodiscard]] std::string to_string() const;
};

/// Owning TCP socket file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  [[nodiscard]] bool valid() const noexcept { return fd_ >= 0; }
  [[nodiscard]] int fd() const noexcept { return fd_; }
  int release() noexcept;

  /// Writes every byte or throws SocketError.
  void send_all(std::span<const std::uint8_t> data) const;

  /// Bytes read, 0 on orderly shutdown by the peer, nullopt when nothing
  /// arrived within `timeout`. Throws SocketError on failure.
  std::optional<std::size_t> receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) const;

  void set_send_timeout(std::chrono::milliseconds timeout) const;
  /// Wakes any thread blocked on this socket; the descriptor stays open.
  void shutdown() const noexcept;
  void close() noexcept;

 private:
  int fd_ = -1;
};

Socket connect_tcp(const Endpoint& endpoint);

class Listener {
 public:
  /// Port 0 picks an ephemeral port; see port().
  static Listener bind(const Endpoint& endpoint);

  [[nodiscard]] std::uint16_t port() const noexcept { return port_; }
  /// Connected socket, or nullopt when nothing arrived within `timeout`.
  std::optional<Socket> accept(std::chrono::milliseconds timeout) const;
  void close() noexcept { socket_.close(); }

 private:
  Socket socket_;
  std::uint16_t port_ = 0;
};

}  // namespace fridge::net
