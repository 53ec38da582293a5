#include "fridge/backend/records.hpp"

#include <fmt/format.h>

namespace fridge::backend {

using nlohmann::json;
using device::SchemaError;

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(fmt::format("missing field '{}'", key));
  return j.at(key);
}

std::string text(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw SchemaError(fmt::format("field '{}' must be a string", key));
  return v.get<std::string>();
}

Timestamp time_field(const json& j, const char* key) {
  const auto t = parse_timestamp(text(j, key));
  if (!t) throw SchemaError(fmt::format("field '{}' is not an ISO-8601 UTC time", key));
  return *t;
}

double number(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw SchemaError(fmt::format("field '{}' must be a number", key));
  return v.get<double>();
}

}  // namespace

const char* to_string(Collection c) {
  switch (c) {
    case Collection::images:
      return "images";
    case Collection::counts:
      return "counts";
    case Collection::fridgestats:
      return "fridgestats";
    case Collection::users:
      return "users";
    case Collection::settings:
      return "settings";
  }
  return "unknown";
}

Collection collection_from_string(const std::string& name) {
  for (const auto c : {Collection::images, Collection::counts, Collection::fridgestats, Collection::users,
                       Collection::settings}) {
    if (name == to_string(c)) return c;
  }
  throw std::invalid_argument("unknown collection '" + name + "'");
}

std::string record_id(Collection c, const std::string& device_id, Timestamp t) {
  const char* prefix = c == Collection::images ? "img" : c == Collection::counts ? "cnt" : "env";
  return fmt::format("{}:{}:{}", prefix, device_id, t);
}

json to_json(const ImageRecord& r) {
  json scene = json::array();
  for (const auto& s : r.scene) scene.push_back(device::to_json(s));
  json items = json::array();
  for (const auto& i : r.items) items.push_back(device::to_json(i));
  return {{"id", r.id},
          {"deviceId", r.device_id},
          {"timestamp", format_timestamp(r.timestamp)},
          {"scene", std::move(scene)},
          {"items", std::move(items)}};
}

json to_json(const CountRecord& r) {
  return {{"id", r.id},
          {"deviceId", r.device_id},
          {"timestamp", format_timestamp(r.timestamp)},
          {"counts", r.counts},
          {"imageId", r.image_id}};
}

json to_json(const FridgeStatRecord& r) {
  return {{"id", r.id},
          {"deviceId", r.device_id},
          {"timestamp", format_timestamp(r.timestamp)},
          {"temperature", r.temperature_c},
          {"humidity", r.humidity_pct},
          {"setpoints", device::to_json(r.setpoints)}};
}

json to_json(const UserRecord& r) {
  return {{"username", r.username}, {"passwordHash", r.password_hash}, {"createdAt", format_timestamp(r.created_at)}};
}

json to_json(const SettingsRecord& r) {
  auto j = device::to_json(r.setpoints);
  j["deviceId"] = r.device_id;
  j["updatedAt"] = format_timestamp(r.updated_at);
  return j;
}

ImageRecord image_from_json(const json& j) {
  return {text(j, "id"), text(j, "deviceId"), time_field(j, "timestamp"), device::scene_from_json(field(j, "scene")),
          device::items_from_json(field(j, "items"))};
}

CountRecord count_from_json(const json& j) {
  CountRecord r{text(j, "id"), text(j, "deviceId"), time_field(j, "timestamp"), {}, text(j, "imageId")};
  const auto& counts = field(j, "counts");
  if (!counts.is_object()) throw SchemaError("counts must be an object");
  for (const auto& [name, n] : counts.items()) {
    if (!n.is_number_integer() || n.get<int>() < 0) throw SchemaError("counts must be non-negative integers");
    r.counts[name] = n.get<int>();
  }
  return r;
}

FridgeStatRecord fridgestat_from_json(const json& j) {
  const auto& sp = field(j, "setpoints");
  return {text(j, "id"),
          text(j, "deviceId"),
          time_field(j, "timestamp"),
          number(j, "temperature"),
          number(j, "humidity"),
          {number(sp, "temperatureTarget"), number(sp, "humidityTarget")}};
}

UserRecord user_from_json(const json& j) {
  return {text(j, "username"), text(j, "passwordHash"), time_field(j, "createdAt")};
}

SettingsRecord settings_from_json(const json& j) {
  return {text(j, "deviceId"), {number(j, "temperatureTarget"), number(j, "humidityTarget")},
          time_field(j, "updatedAt")};
}

}  // namespace fridge::backend
