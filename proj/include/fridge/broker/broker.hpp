#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "fridge/wire/frame.hpp"
#include "fridge/wire/topic.hpp"

namespace fridge::broker {

struct BrokerConfig {
  std::size_t queue_capacity = 1024;
  std::chrono::seconds keepalive{60};
};

/// An encoded frame shared between every queue it was fanned out to.
using OutboundMessage = std::shared_ptr<const wire::Bytes>;

/// Bounded FIFO feeding one session's socket writer. push() never blocks:
/// when the queue is full the oldest entry is discarded.
class OutboundQueue {
 public:
  explicit OutboundQueue(std::size_t capacity);

  /// Returns false when the message was refused because the queue is closed.
  bool push(OutboundMessage message);
  /// Blocks up to `timeout`. nullopt on timeout, or once closed and drained.
  std::optional<OutboundMessage> pop(std::chrono::milliseconds timeout);
  /// Further pushes are refused; queued messages can still be popped.
  void close();

  [[nodiscard]] bool closed() const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] std::uint64_t drop_count() const noexcept { return drops_.load(); }

 private:
  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<OutboundMessage> items_;
  bool closed_ = false;
  std::atomic<std::uint64_t> drops_{0};
};

using SessionId = std::uint64_t;

class Session {
 public:
  Session(SessionId id, std::size_t queue_capacity) : id_(id), outbound_(queue_capacity) {}

  [[nodiscard]] SessionId id() const noexcept { return id_; }
  [[nodiscard]] OutboundQueue& outbound() noexcept { return outbound_; }
  [[nodiscard]] const OutboundQueue& outbound() const noexcept { return outbound_; }
  [[nodiscard]] std::uint64_t drop_count() const noexcept { return outbound_.drop_count(); }

 private:
  friend class Broker;

  const SessionId id_;
  OutboundQueue outbound_;
  // The fields below are guarded by Broker::registry_mutex_.
  std::string client_id_;
  bool connected_ = false;
  std::vector<wire::TopicFilter> filters_;
};

enum class ActionKind {
  reply,  // a frame was queued back to the same session
  route,  // a PUBLISH was fanned out
  close,  // the connection must be torn down after its queue drains
};

struct Action {
  ActionKind kind;
  std::optional<wire::Frame> frame;  // reply only
  std::size_t deliveries = 0;        // route only
  std::string reason;                // close only
};

/// Registry of live sessions and their subscriptions. Thread-safe; routing
/// takes a shared lock, (un)registration an exclusive one.
class Broker {
 public:
  explicit Broker(BrokerConfig config = {});

  [[nodiscard]] const BrokerConfig& config() const noexcept { return config_; }

  /// A fresh, not yet connected session.
  std::shared_ptr<Session> open_session();

  /// Applies one client frame. Replies are queued on the session's own
  /// outbound queue; the returned actions describe what happened.
  std::vector<Action> handle_frame(Session& session, const wire::Frame& frame);

  /// Queues one copy of the PUBLISH on every session holding a matching
  /// filter, and returns the ids of those sessions.
  std::vector<SessionId> route_publish(std::string_view topic, std::span<const std::uint8_t> body);

  /// Forgets the session and releases its client id. Idempotent.
  void close_session(SessionId id);

  [[nodiscard]] std::size_t session_count() const;
  [[nodiscard]] std::optional<std::string> client_id(SessionId id) const;
  [[nodiscard]] std::vector<std::string> subscriptions(SessionId id) const;

 private:
  void reply(Session& session, const wire::Frame& frame);

  BrokerConfig config_;
  mutable std::shared_mutex registry_mutex_;
  std::map<SessionId, std::shared_ptr<Session>> sessions_;
  std::set<std::string, std::less<>> client_ids_;
  std::atomic<SessionId> next_id_{1};
};

}  // namespace fridge::broker
