#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fridge/common/time.hpp"

namespace fridge::device {

/// Body of a message that does not follow its topic's schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normalized [x, y, w, h]; the box lies inside the unit square.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  [[nodiscard]] bool inside_unit_square() const noexcept;
  [[nodiscard]] bool overlaps(const BBox& other) const noexcept;
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Setpoints {
  double temperature_target_c = 4.0;
  double humidity_target_pct = 45.0;

  friend bool operator==(const Setpoints&, const Setpoints&) = default;
};

inline constexpr double kMinTemperatureTarget = -10.0;
inline constexpr double kMaxTemperatureTarget = 20.0;

/// Empty string when the setpoints are within bounds, else the reason.
std::string setpoints_problem(const Setpoints& s);

struct ShelfItem {
  std::string class_name;
  BBox bbox;
  friend bool operator==(const ShelfItem&, const ShelfItem&) = default;
};

struct DetectedItem {
  std::string class_name;
  double confidence = 0.0;
  BBox bbox;
  friend bool operator==(const DetectedItem&, const DetectedItem&) = default;
};

struct DetectionEvent {
  std::string device_id;
  Timestamp timestamp = 0;
  std::vector<DetectedItem> items;
  std::map<std::string, int> counts;
  std::vector<ShelfItem> scene;  // ground-truth layout, standing in for the camera frame

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct SensorReading {
  std::string device_id;
  Timestamp timestamp = 0;
  double temperature_c = 0.0;
  double humidity_pct = 0.0;
  Setpoints setpoints;

  friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

/// Per-class tally of detected items.
std::map<std::string, int> count_items(const std::vector<DetectedItem>& items);

std::string detections_topic(const std::string& device_id);
std::string env_topic(const std::string& device_id);
std::string settings_topic(const std::string& device_id);

// Wire bodies are JSON objects with camelCase keys:
//   detections: {deviceId, timestamp, items: [{class, confidence, bbox}], counts: {class: n}, scene: [{class, bbox}]}
//   env:        {deviceId, timestamp, temperature, humidity, setpoints: {temperatureTarget, humidityTarget}}
//   settings:   {temperatureTarget, humidityTarget}
// Timestamps are ISO-8601 UTC strings, bboxes [x, y, w, h] arrays.
// The parsers throw SchemaError for missing or mistyped fields, non-finite
// numbers, boxes outside the unit square, and counts that disagree with items.

nlohmann::json to_json(const BBox& b);
nlohmann::json to_json(const Setpoints& s);
nlohmann::json to_json(const ShelfItem& item);
nlohmann::json to_json(const DetectedItem& item);
nlohmann::json to_json(const DetectionEvent& e);
nlohmann::json to_json(const SensorReading& r);

BBox bbox_from_json(const nlohmann::json& j);
/// Also enforces the setpoint bounds.
Setpoints setpoints_from_json(const nlohmann::json& j);
std::vector<ShelfItem> scene_from_json(const nlohmann::json& j);
std::vector<DetectedItem> items_from_json(const nlohmann::json& j);
DetectionEvent detection_from_json(const nlohmann::json& j);
SensorReading reading_from_json(const nlohmann::json& j);

/// Parses raw bytes as JSON, mapping syntax errors to SchemaError.
nlohmann::json parse_body(std::string_view body);

}  // namespace fridge::device
