#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "fridge/calib/types.hpp"
#include "fridge/device/messages.hpp"
#include "fridge/trainer/trainer.hpp"

namespace fridge::device {

struct ThermalConfig {
  double k_per_minute = 0.1;
  double sigma_temp_c = 0.05;     // per simulated minute
  double sigma_humidity_pct = 0.2;
};

struct InventoryConfig {
  double p_add = 0.05;     // per simulated minute
  double p_remove = 0.05;
};

/// Shelf slots form a grid; items take free slots while any remain.
struct ShelfGrid {
  int rows = 4;
  int cols = 6;
};

/// Everything that determines a device's event stream.
struct DeviceConfig {
  std::string device_id = "fridge-1";
  std::uint64_t seed = 7;
  std::vector<std::string> class_names;
  std::map<std::string, int> initial_inventory;
  double initial_temp_c = 8.0;
  double initial_humidity_pct = 50.0;
  Setpoints setpoints;
  ThermalConfig thermal;
  InventoryConfig inventory;
  ShelfGrid grid;
  /// Feature noise for detections; nullopt uses the model's dataset noise.
  std::optional<double> detection_sigma;
  Timestamp start_time = 1735689600;  // 2025-01-01T00:00:00Z
};

/// Default classes from the trainer's dataset and a few items of each.
DeviceConfig default_device_config(const std::string& device_id, std::uint64_t seed);

struct DeviceState {
  std::string device_id;
  std::vector<std::string> class_names;
  std::map<std::string, int> inventory;
  std::vector<ShelfItem> shelf_layout;
  double temp_c = 0.0;
  double humidity_pct = 0.0;
  Setpoints setpoints;
  Timestamp sim_clock = 0;
  ThermalConfig thermal;
  InventoryConfig inventory_config;
  ShelfGrid grid;
  std::optional<double> detection_sigma;
  // Independent streams so that, for example, changing the inventory rates
  // does not perturb the thermal noise.
  std::mt19937_64 env_rng;
  std::mt19937_64 inventory_rng;
  std::mt19937_64 detection_rng;

  /// Every bbox in the unit square, inventory equal to the layout tally,
  /// humidity within [0, 100].
  [[nodiscard]] bool invariants_hold() const;
};

/// Seeds the RNG streams and places the initial inventory.
DeviceState make_device(const DeviceConfig& config);

/// Advances the clock by dt and relaxes temperature and humidity toward the
/// setpoints: v <- v + min(1, k dt) (target - v) + sigma sqrt(dt) e, with dt
/// in minutes and e standard normal. Humidity is clamped to [0, 100].
/// Throws std::invalid_argument unless dt > 0.
SensorReading step_env(DeviceState& state, double dt_seconds);

struct InventoryChange {
  std::optional<std::string> added;
  std::optional<std::string> removed;
  [[nodiscard]] int mutations() const noexcept { return (added ? 1 : 0) + (removed ? 1 : 0); }
};

/// One simulated minute of shopping and eating: with probability p_add an
/// item of a uniformly chosen class is put on the shelf, and with
/// probability p_remove a uniformly chosen shelf item is taken out.
InventoryChange step_inventory(DeviceState& state);

class ClassMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Runs the model on a synthetic feature vector for every shelf item. Counts
/// come from the predicted classes, so misdetections show up as miscounts.
/// Throws ClassMismatch when the model's classes differ from the device's.
DetectionEvent emit_detection(DeviceState& state, const trainer::TrainedModel& model,
                              const std::optional<calib::Temperature>& temperature = std::nullopt);

/// Replaces the setpoints from a settings message. Throws SchemaError and
/// leaves the state untouched when the message is malformed or out of range.
void apply_settings(DeviceState& state, const nlohmann::json& settings);

}  // namespace fridge::device
