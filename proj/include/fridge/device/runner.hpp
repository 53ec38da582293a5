#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "fridge/broker/client.hpp"
#include "fridge/device/simulator.hpp"

namespace fridge::device {

struct RunnerOptions {
  /// Simulated seconds per wall-clock second; 0 runs ticks back to back.
  double acceleration = 0.0;
  /// Simulated seconds between ticks. Inventory probabilities apply per tick.
  int cadence_seconds = 60;
  std::chrono::seconds keepalive{60};
};

/// Drives one simulated fridge: every tick advances the simulated clock by
/// the cadence and produces one DetectionEvent and one SensorReading. Settings received from the
/// broker are queued and applied at the start of the next tick.
class DeviceRunner {
 public:
  DeviceRunner(const DeviceConfig& config, std::shared_ptr<const trainer::TrainedModel> model,
               std::optional<calib::Temperature> temperature = std::nullopt, RunnerOptions options = {});
  ~DeviceRunner();

  /// Connects with the device id as client id and subscribes to the
  /// device's settings topic. Without a connection ticks still run but
  /// publish nothing.
  void connect(const net::Endpoint& broker);
  void disconnect();

  void tick();
  /// Paced by the acceleration factor; returns early when `stop` is set.
  /// A negative count runs until `stop` is set.
  void run_ticks(long ticks, const std::atomic<bool>* stop = nullptr);

  /// Queues a settings body as if it had arrived on the settings topic.
  void deliver_settings(std::string body);

  [[nodiscard]] const DeviceState& state() const noexcept { return state_; }
  [[nodiscard]] const std::optional<DetectionEvent>& last_detection() const noexcept { return last_detection_; }
  [[nodiscard]] const std::optional<SensorReading>& last_reading() const noexcept { return last_reading_; }
  [[nodiscard]] std::size_t settings_received() const noexcept { return settings_received_.load(); }
  [[nodiscard]] std::size_t settings_rejected() const noexcept { return settings_rejected_.load(); }
  [[nodiscard]] std::size_t ticks() const noexcept { return ticks_; }

 private:
  void apply_pending_settings();

  DeviceState state_;
  std::shared_ptr<const trainer::TrainedModel> model_;
  std::optional<calib::Temperature> temperature_;
  RunnerOptions options_;
  std::unique_ptr<broker::PubSubClient> client_;
  std::mutex pending_mutex_;
  std::vector<std::string> pending_settings_;
  std::atomic<std::size_t> settings_received_{0};
  std::atomic<std::size_t> settings_rejected_{0};
  std::optional<DetectionEvent> last_detection_;
  std::optional<SensorReading> last_reading_;
  std::size_t ticks_ = 0;
};

}  // namespace fridge::device
