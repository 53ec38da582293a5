#include "fridge/broker/client.hpp"

#include <array>

#include <spdlog/spdlog.h>

namespace fridge::broker {

using namespace std::chrono_literals;

PubSubClient::PubSubClient(const net::Endpoint& broker, ClientOptions options, MessageHandler on_message)
    : options_(std::move(options)), on_message_(std::move(on_message)), socket_(net::connect_tcp(broker)) {
  connected_ = true;
  reader_ = std::thread([this] { read_loop(); });
  try {
    send(wire::Connect{options_.client_id});
    const auto ack = std::get<wire::Connack>(await_ack(wire::FrameKind::connack));
    if (ack.code != wire::ConnackCode::accepted) {
      throw ClientError("broker refused client id '" + options_.client_id + "' (code " +
                        std::to_string(static_cast<int>(ack.code)) + ")");
    }
  } catch (...) {
    stopping_ = true;
    socket_.shutdown();
    reader_.join();
    throw;
  }
}

PubSubClient::~PubSubClient() { disconnect(); }

void PubSubClient::disconnect() {
  if (stopping_.exchange(true)) return;
  if (connected_.load()) {
    try {
      send(wire::Disconnect{});
    } catch (const std::exception&) {
    }
  }
  socket_.shutdown();
  if (reader_.joinable()) reader_.join();
  connected_ = false;
}

void PubSubClient::send(const wire::Frame& frame) {
  const auto bytes = wire::encode_frame(frame);
  std::lock_guard lock(send_mutex_);
  if (!connected_.load()) throw ClientError("not connected");
  socket_.send_all(bytes);
  last_send_ = std::chrono::steady_clock::now();
}

wire::Frame PubSubClient::await_ack(wire::FrameKind kind) {
  std::unique_lock lock(ack_mutex_);
  const bool arrived =
      ack_ready_.wait_for(lock, options_.ack_timeout, [&] { return !acks_.empty() || !connected_.load(); });
  if (!arrived || acks_.empty()) {
    throw ClientError(std::string("no ") + wire::to_string(kind) + " from broker");
  }
  auto frame = std::move(acks_.front());
  acks_.pop_front();
  if (wire::kind_of(frame) != kind) {
    throw ClientError(std::string("expected ") + wire::to_string(kind) + ", got " +
                      wire::to_string(wire::kind_of(frame)));
  }
  return frame;
}

void PubSubClient::subscribe(const std::string& filter) {
  // SUBACKs carry no identifier, so at most one SUBSCRIBE is in flight.
  std::lock_guard lock(subscribe_mutex_);
  send(wire::Subscribe{filter});
  const auto ack = std::get<wire::Suback>(await_ack(wire::FrameKind::suback));
  if (ack.code != wire::SubackCode::granted) throw ClientError("subscription to '" + filter + "' rejected");
}

void PubSubClient::publish(const std::string& topic, std::span<const std::uint8_t> body) {
  send(wire::Publish{topic, wire::Bytes(body.begin(), body.end())});
}

void PubSubClient::publish(const std::string& topic, std::string_view body) {
  publish(topic, std::span(reinterpret_cast<const std::uint8_t*>(body.data()), body.size()));
}

void PubSubClient::read_loop() {
  wire::FrameReader frames;
  std::array<std::uint8_t, 64 * 1024> buffer{};
  const auto ping_after = std::chrono::duration_cast<std::chrono::milliseconds>(options_.keepalive) / 2;
  try {
    while (!stopping_.load()) {
      const auto n = socket_.receive(buffer, 250ms);
      if (!n) {
        bool idle = false;
        {
          std::lock_guard lock(send_mutex_);
          idle = std::chrono::steady_clock::now() - last_send_ > ping_after;
        }
        if (idle) send(wire::PingReq{});
        continue;
      }
      if (*n == 0) break;
      frames.feed(std::span(buffer.data(), *n));
      while (auto result = frames.next()) {
        if (!result->ok()) throw ClientError(std::string("bad frame from broker: ") + wire::to_string(result->error()));
        auto& frame = result->frame();
        if (auto* publish = std::get_if<wire::Publish>(&frame)) {
          if (on_message_) {
            try {
              on_message_(publish->topic, publish->body);
            } catch (const std::exception& e) {
              spdlog::error("event=handler_failed client_id={} topic={} error=\"{}\"", options_.client_id,
                            publish->topic, e.what());
            }
          }
        } else if (std::holds_alternative<wire::Connack>(frame) || std::holds_alternative<wire::Suback>(frame)) {
          {
            std::lock_guard lock(ack_mutex_);
            acks_.push_back(std::move(frame));
          }
          ack_ready_.notify_all();
        }
      }
    }
  } catch (const std::exception& e) {
    if (!stopping_.load()) spdlog::warn("event=client_read_failed client_id={} error=\"{}\"", options_.client_id, e.what());
  }
  {
    std::lock_guard lock(send_mutex_);
    connected_ = false;
  }
  ack_ready_.notify_all();
}

}  // namespace fridge::broker
