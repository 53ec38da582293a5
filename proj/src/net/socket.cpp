#include "fridge/net/socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <fmt/format.h>

namespace fridge::net {
namespace {

[[noreturn]] void fail(const std::string& what) {
  throw SocketError(fmt::format("{}: {}", what, std::strerror(errno)));
}

sockaddr_in resolve(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const auto port = std::to_string(endpoint.port);
  if (const int rc = ::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw SocketError(fmt::format("resolve {}: {}", endpoint.to_string(), ::gai_strerror(rc)));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, found->ai_addr, sizeof(addr));
  ::freeaddrinfo(found);
  return addr;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw std::invalid_argument("expected host:port, got '" + text + "'");
  }
  Endpoint e;
  e.host = text.substr(0, colon);
  const auto port = std::stoul(text.substr(colon + 1));
  if (port > 65535) throw std::invalid_argument("port out of range in '" + text + "'");
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

std::string Endpoint::to_string() const { return fmt::format("{}:{}", host, port); }

Socket::~Socket() { close(); }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.release();
  }
  return *this;
}

int Socket::release() noexcept {
  const int fd = fd_;
  fd_ = -1;
  return fd;
}

void Socket::send_all(std::span<const std::uint8_t> data) const {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const auto n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send");
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::optional<std::size_t> Socket::receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) const {
  pollfd pfd{fd_, POLLIN, 0};
  int rc = 0;
  do {
    rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  } while (rc < 0 && errno == EINTR);
  if (rc < 0) fail("poll");
  if (rc == 0) return std::nullopt;
  ssize_t n = 0;
  do {
    n = ::recv(fd_, buffer.data(), buffer.size(), 0);
  } while (n < 0 && errno == EINTR);
  if (n < 0) fail("recv");
  return static_cast<std::size_t>(n);
}

void Socket::set_send_timeout(std::chrono::milliseconds timeout) const {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

void Socket::shutdown() const noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Socket connect_tcp(const Endpoint& endpoint) {
  const auto addr = resolve(endpoint);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) fail("socket");
  if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    fail("connect " + endpoint.to_string());
  }
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return s;
}

Listener Listener::bind(const Endpoint& endpoint) {
  const auto addr = resolve(endpoint);
  Listener l;
  l.socket_ = Socket(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!l.socket_.valid()) fail("socket");
  const int one = 1;
  ::setsockopt(l.socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(l.socket_.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    fail("bind " + endpoint.to_string());
  }
  if (::listen(l.socket_.fd(), 128) < 0) fail("listen");
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(l.socket_.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
  l.port_ = ntohs(bound.sin_port);
  return l;
}

std::optional<Socket> Listener::accept(std::chrono::milliseconds timeout) const {
  pollfd pfd{socket_.fd(), POLLIN, 0};
  const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc <= 0) return std::nullopt;
  const int fd = ::accept4(socket_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) return std::nullopt;
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(fd);
}

}  // namespace fridge::net
