#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fridge/device/runner.hpp"

namespace fridge::app {

/// The detector model every simulated device runs.
struct DeployedModel {
  std::shared_ptr<const trainer::TrainedModel> model;
  std::optional<calib::Temperature> temperature;
};

/// Loads `path` when given (no temperature). Otherwise trains the focal model
/// on the default dataset for `seed` and fits a temperature on its
/// validation split.
DeployedModel deploy_model(const std::optional<std::filesystem::path>& path, std::uint64_t seed,
                           int epochs = 50);

struct FleetOptions {
  int devices = 2;
  std::uint64_t seed = 7;
  device::RunnerOptions runner;
};

/// "fridge-1", "fridge-2", ...
std::string fleet_device_id(int index);

/// N device runners sharing one model, each run on its own thread.
class Fleet {
 public:
  Fleet(const FleetOptions& options, const DeployedModel& model);
  ~Fleet();
  Fleet(const Fleet&) = delete;
  Fleet& operator=(const Fleet&) = delete;

  void connect(const net::Endpoint& broker);
  void disconnect();

  /// Runs `ticks` ticks on every device concurrently and returns when all
  /// are done or `stop` is set. A negative count runs until `stop`.
  void run(long ticks, const std::atomic<bool>* stop = nullptr);

  [[nodiscard]] std::size_t size() const noexcept { return runners_.size(); }
  [[nodiscard]] device::DeviceRunner& device(std::size_t i) { return *runners_.at(i); }

 private:
  std::vector<std::unique_ptr<device::DeviceRunner>> runners_;
};

}  // namespace fridge::app
