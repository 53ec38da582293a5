#include "fridge/device/runner.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

namespace fridge::device {

DeviceRunner::DeviceRunner(const DeviceConfig& config, std::shared_ptr<const trainer::TrainedModel> model,
                           std::optional<calib::Temperature> temperature, RunnerOptions options)
    : state_(make_device(config)),
      model_(std::move(model)),
      temperature_(std::move(temperature)),
      options_(options) {
  if (options_.cadence_seconds < 1) throw std::invalid_argument("cadence must be at least one second");
  if (!model_) throw std::invalid_argument("device runner needs a model");
  if (model_->class_names() != state_.class_names) {
    throw ClassMismatch("model classes differ from the device's classes");
  }
}

DeviceRunner::~DeviceRunner() { disconnect(); }

void DeviceRunner::connect(const net::Endpoint& broker) {
  broker::ClientOptions opts;
  opts.client_id = state_.device_id;
  opts.keepalive = options_.keepalive;
  client_ = std::make_unique<broker::PubSubClient>(
      broker, opts, [this](const std::string&, const wire::Bytes& body) {
        deliver_settings(std::string(body.begin(), body.end()));
      });
  client_->subscribe(settings_topic(state_.device_id));
  spdlog::info("event=device_online device={} broker={}", state_.device_id, broker.to_string());
}

void DeviceRunner::disconnect() {
  if (client_) {
    client_->disconnect();
    client_.reset();
  }
}

void DeviceRunner::deliver_settings(std::string body) {
  ++settings_received_;
  std::lock_guard lock(pending_mutex_);
  pending_settings_.push_back(std::move(body));
}

void DeviceRunner::apply_pending_settings() {
  std::vector<std::string> pending;
  {
    std::lock_guard lock(pending_mutex_);
    pending.swap(pending_settings_);
  }
  for (const auto& body : pending) {
    try {
      apply_settings(state_, parse_body(body));
      spdlog::info("event=setpoints device={} temperature_target={} humidity_target={}", state_.device_id,
                   state_.setpoints.temperature_target_c, state_.setpoints.humidity_target_pct);
    } catch (const SchemaError& e) {
      ++settings_rejected_;
      spdlog::warn("event=settings_rejected device={} reason=\"{}\"", state_.device_id, e.what());
    }
  }
}

void DeviceRunner::tick() {
  apply_pending_settings();
  step_inventory(state_);
  auto reading = step_env(state_, static_cast<double>(options_.cadence_seconds));
  auto detection = emit_detection(state_, *model_, temperature_);
  if (client_ && client_->connected()) {
    client_->publish(detections_topic(state_.device_id), to_json(detection).dump());
    client_->publish(env_topic(state_.device_id), to_json(reading).dump());
  }
  last_detection_ = std::move(detection);
  last_reading_ = std::move(reading);
  ++ticks_;
}

void DeviceRunner::run_ticks(long ticks, const std::atomic<bool>* stop) {
  using clock = std::chrono::steady_clock;
  const bool paced = options_.acceleration > 0.0;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(options_.cadence_seconds / std::max(options_.acceleration, 1e-9)));
  auto next = clock::now();
  for (long i = 0; ticks < 0 || i < ticks; ++i) {
    if (stop && stop->load()) return;
    tick();
    if (paced) {
      next += period;
      // Sleep in short slices so a stop request is noticed promptly.
      while (clock::now() < next) {
        if (stop && stop->load()) return;
        std::this_thread::sleep_for(std::min<clock::duration>(next - clock::now(), std::chrono::milliseconds(100)));
      }
    }
  }
}

}  // namespace fridge::device
