#include "fridge/broker/broker.hpp"

#include <algorithm>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace fridge::broker {

OutboundQueue::OutboundQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("queue capacity must be positive");
}

bool OutboundQueue::push(OutboundMessage message) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return false;
    if (items_.size() == capacity_) {
      items_.pop_front();
      drops_.fetch_add(1);
    }
    items_.push_back(std::move(message));
  }
  ready_.notify_one();
  return true;
}

std::optional<OutboundMessage> OutboundQueue::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  ready_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; });
  if (items_.empty()) return std::nullopt;
  auto message = std::move(items_.front());
  items_.pop_front();
  return message;
}

void OutboundQueue::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

bool OutboundQueue::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::size_t OutboundQueue::size() const {
  std::lock_guard lock(mutex_);
  return items_.size();
}

Broker::Broker(BrokerConfig config) : config_(config) {
  if (config_.queue_capacity == 0) throw std::invalid_argument("queue capacity must be positive");
}

std::shared_ptr<Session> Broker::open_session() {
  auto session = std::make_shared<Session>(next_id_.fetch_add(1), config_.queue_capacity);
  std::unique_lock lock(registry_mutex_);
  sessions_.emplace(session->id(), session);
  return session;
}

void Broker::reply(Session& session, const wire::Frame& frame) {
  session.outbound().push(std::make_shared<const wire::Bytes>(wire::encode_frame(frame)));
}

std::vector<Action> Broker::handle_frame(Session& session, const wire::Frame& frame) {
  std::vector<Action> actions;
  const auto close = [&](std::string reason) {
    actions.push_back(Action{ActionKind::close, std::nullopt, 0, std::move(reason)});
  };
  const auto respond = [&](wire::Frame f) {
    reply(session, f);
    actions.push_back(Action{ActionKind::reply, std::move(f), 0, {}});
  };

  bool connected = false;
  {
    std::shared_lock lock(registry_mutex_);
    connected = session.connected_;
  }

  if (const auto* connect = std::get_if<wire::Connect>(&frame)) {
    if (connected) {
      close("second CONNECT on one connection");
      return actions;
    }
    if (connect->client_id.empty()) {
      respond(wire::Connack{wire::ConnackCode::bad_client_id});
      close("empty client id");
      return actions;
    }
    bool accepted = false;
    {
      std::unique_lock lock(registry_mutex_);
      if (sessions_.count(session.id()) != 0 && client_ids_.insert(connect->client_id).second) {
        session.client_id_ = connect->client_id;
        session.connected_ = true;
        accepted = true;
      }
    }
    if (!accepted) {
      spdlog::warn("event=connect_refused session={} client_id={} reason=client_id_in_use", session.id(),
                   connect->client_id);
      respond(wire::Connack{wire::ConnackCode::client_id_in_use});
      close("client id in use");
      return actions;
    }
    spdlog::info("event=connect session={} client_id={}", session.id(), connect->client_id);
    respond(wire::Connack{wire::ConnackCode::accepted});
    return actions;
  }

  if (!connected) {
    close(std::string(wire::to_string(wire::kind_of(frame))) + " before CONNECT");
    return actions;
  }

  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, wire::Subscribe>) {
          auto filter = wire::TopicFilter::parse(f.filter);
          if (!filter) {
            respond(wire::Suback{wire::SubackCode::rejected});
            return;
          }
          {
            std::unique_lock lock(registry_mutex_);
            auto& filters = session.filters_;
            if (std::find(filters.begin(), filters.end(), *filter) == filters.end()) {
              filters.push_back(std::move(*filter));
            }
          }
          respond(wire::Suback{wire::SubackCode::granted});
        } else if constexpr (std::is_same_v<T, wire::Publish>) {
          const auto delivered = route_publish(f.topic, f.body);
          actions.push_back(Action{ActionKind::route, std::nullopt, delivered.size(), {}});
        } else if constexpr (std::is_same_v<T, wire::PingReq>) {
          respond(wire::PingResp{});
        } else if constexpr (std::is_same_v<T, wire::Disconnect>) {
          close("client DISCONNECT");
        } else {
          close(std::string("unexpected ") + wire::to_string(wire::kind_of(frame)) + " from client");
        }
      },
      frame);
  return actions;
}

std::vector<SessionId> Broker::route_publish(std::string_view topic, std::span<const std::uint8_t> body) {
  std::vector<SessionId> delivered;
  OutboundMessage message;
  std::shared_lock lock(registry_mutex_);
  for (const auto& [id, session] : sessions_) {
    if (!session->connected_) continue;
    const bool matches = std::any_of(session->filters_.begin(), session->filters_.end(),
                                     [&](const wire::TopicFilter& f) { return wire::topic_matches(f, topic); });
    if (!matches) continue;
    if (!message) {
      message = std::make_shared<const wire::Bytes>(
          wire::encode_frame(wire::Publish{std::string(topic), wire::Bytes(body.begin(), body.end())}));
    }
    const auto drops_before = session->drop_count();
    if (session->outbound().push(message)) delivered.push_back(id);
    const auto drops = session->drop_count();
    // One line for the first drop and then every hundredth, so a stuck
    // subscriber cannot flood the log.
    if (drops != drops_before && (drops == 1 || drops % 100 == 0)) {
      spdlog::warn("event=drop session={} client_id={} drop_count={}", id, session->client_id_, drops);
    }
  }
  return delivered;
}

void Broker::close_session(SessionId id) {
  std::shared_ptr<Session> session;
  std::string client_id;
  bool was_connected = false;
  {
    std::unique_lock lock(registry_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return;
    session = it->second;
    sessions_.erase(it);
    was_connected = session->connected_;
    client_id = session->client_id_;
    if (was_connected) client_ids_.erase(client_id);
  }
  session->outbound().close();
  if (was_connected) {
    spdlog::info("event=disconnect session={} client_id={} drop_count={}", id, client_id, session->drop_count());
  }
}

std::size_t Broker::session_count() const {
  std::shared_lock lock(registry_mutex_);
  return sessions_.size();
}

std::optional<std::string> Broker::client_id(SessionId id) const {
  std::shared_lock lock(registry_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end() || !it->second->connected_) return std::nullopt;
  return it->second->client_id_;
}

std::vector<std::string> Broker::subscriptions(SessionId id) const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> out;
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return out;
  for (const auto& f : it->second->filters_) out.push_back(f.text());
  return out;
}

}  // namespace fridge::broker
