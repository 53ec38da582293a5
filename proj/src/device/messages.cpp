#include "fridge/device/messages.hpp"

#include <cmath>

#include <fmt/format.h>

namespace fridge::device {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw SchemaError("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(fmt::format("missing field '{}'", key));
  return *it;
}

double number(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw SchemaError(fmt::format("field '{}' must be a number", key));
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(fmt::format("field '{}' must be finite", key));
  return d;
}

std::string text(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw SchemaError(fmt::format("field '{}' must be a string", key));
  return v.get<std::string>();
}

std::string nonempty_text(const json& j, const char* key) {
  auto s = text(j, key);
  if (s.empty()) throw SchemaError(fmt::format("field '{}' must not be empty", key));
  return s;
}

Timestamp timestamp(const json& j) {
  const auto t = parse_timestamp(text(j, "timestamp"));
  if (!t) throw SchemaError("field 'timestamp' must be an ISO-8601 UTC time like 2025-01-01T00:00:00Z");
  return *t;
}

const json& array(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_array()) throw SchemaError(fmt::format("field '{}' must be an array", key));
  return v;
}

}  // namespace

bool BBox::inside_unit_square() const noexcept {
  const bool finite = std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h);
  return finite && x >= 0.0 && y >= 0.0 && w >= 0.0 && h >= 0.0 && x + w <= 1.0 && y + h <= 1.0;
}

bool BBox::overlaps(const BBox& o) const noexcept {
  return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
}

std::string setpoints_problem(const Setpoints& s) {
  if (!std::isfinite(s.temperature_target_c) || s.temperature_target_c < kMinTemperatureTarget ||
      s.temperature_target_c > kMaxTemperatureTarget) {
    return fmt::format("temperatureTarget must be within [{}, {}] degC", kMinTemperatureTarget,
                       kMaxTemperatureTarget);
  }
  if (!std::isfinite(s.humidity_target_pct) || s.humidity_target_pct < 0.0 || s.humidity_target_pct > 100.0) {
    return "humidityTarget must be within [0, 100] %RH";
  }
  return {};
}

std::map<std::string, int> count_items(const std::vector<DetectedItem>& items) {
  std::map<std::string, int> counts;
  for (const auto& item : items) ++counts[item.class_name];
  return counts;
}

std::string detections_topic(const std::string& device_id) { return "fridge/" + device_id + "/detections"; }
std::string env_topic(const std::string& device_id) { return "fridge/" + device_id + "/env"; }
std::string settings_topic(const std::string& device_id) { return "fridge/" + device_id + "/settings"; }

json to_json(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

json to_json(const Setpoints& s) {
  return {{"temperatureTarget", s.temperature_target_c}, {"humidityTarget", s.humidity_target_pct}};
}

json to_json(const ShelfItem& item) { return {{"class", item.class_name}, {"bbox", to_json(item.bbox)}}; }

json to_json(const DetectedItem& item) {
  return {{"class", item.class_name}, {"confidence", item.confidence}, {"bbox", to_json(item.bbox)}};
}

json to_json(const DetectionEvent& e) {
  json items = json::array();
  for (const auto& i : e.items) items.push_back(to_json(i));
  json scene = json::array();
  for (const auto& s : e.scene) scene.push_back(to_json(s));
  return {{"deviceId", e.device_id},
          {"timestamp", format_timestamp(e.timestamp)},
          {"items", std::move(items)},
          {"counts", e.counts},
          {"scene", std::move(scene)}};
}

json to_json(const SensorReading& r) {
  return {{"deviceId", r.device_id},
          {"timestamp", format_timestamp(r.timestamp)},
          {"temperature", r.temperature_c},
          {"humidity", r.humidity_pct},
          {"setpoints", to_json(r.setpoints)}};
}

BBox bbox_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw SchemaError("bbox must be an array [x, y, w, h]");
  for (const auto& v : j) {
    if (!v.is_number()) throw SchemaError("bbox entries must be numbers");
  }
  BBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.inside_unit_square()) throw SchemaError("bbox must lie inside the unit square");
  return b;
}

Setpoints setpoints_from_json(const json& j) {
  Setpoints s{number(j, "temperatureTarget"), number(j, "humidityTarget")};
  if (const auto problem = setpoints_problem(s); !problem.empty()) throw SchemaError(problem);
  return s;
}

std::vector<ShelfItem> scene_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("scene must be an array");
  std::vector<ShelfItem> scene;
  for (const auto& e : j) scene.push_back({nonempty_text(e, "class"), bbox_from_json(field(e, "bbox"))});
  return scene;
}

std::vector<DetectedItem> items_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("items must be an array");
  std::vector<DetectedItem> items;
  for (const auto& e : j) {
    const double c = number(e, "confidence");
    if (!(c > 0.0 && c < 1.0)) throw SchemaError("confidence must lie in (0, 1)");
    items.push_back({nonempty_text(e, "class"), c, bbox_from_json(field(e, "bbox"))});
  }
  return items;
}

DetectionEvent detection_from_json(const json& j) {
  DetectionEvent e;
  e.device_id = nonempty_text(j, "deviceId");
  e.timestamp = timestamp(j);
  e.items = items_from_json(array(j, "items"));
  e.scene = scene_from_json(array(j, "scene"));
  const auto& counts = field(j, "counts");
  if (!counts.is_object()) throw SchemaError("counts must be an object");
  for (const auto& [name, n] : counts.items()) {
    if (!n.is_number_integer() || n.get<double>() < 0.0 || n.get<double>() > 1e9) {
      throw SchemaError("counts must be non-negative integers");
    }
    e.counts[name] = n.get<int>();
  }
  auto derived = count_items(e.items);
  // Zero entries carry no information; compare the positive tallies only.
  std::erase_if(e.counts, [](const auto& kv) { return kv.second == 0; });
  if (derived != e.counts) throw SchemaError("counts do not match the grouped items");
  return e;
}

SensorReading reading_from_json(const json& j) {
  SensorReading r;
  r.device_id = nonempty_text(j, "deviceId");
  r.timestamp = timestamp(j);
  r.temperature_c = number(j, "temperature");
  r.humidity_pct = number(j, "humidity");
  if (r.humidity_pct < 0.0 || r.humidity_pct > 100.0) throw SchemaError("humidity must be within [0, 100]");
  const auto& sp = field(j, "setpoints");
  r.setpoints = Setpoints{number(sp, "temperatureTarget"), number(sp, "humidityTarget")};
  return r;
}

json parse_body(std::string_view body) {
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw SchemaError("body is not valid JSON");
  return j;
}

}  // namespace fridge::device
