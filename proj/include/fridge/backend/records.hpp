#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fridge/common/time.hpp"
#include "fridge/device/messages.hpp"

namespace fridge::backend {

enum class Collection { images, counts, fridgestats, users, settings };

const char* to_string(Collection c);
/// Throws std::invalid_argument for an unknown name.
Collection collection_from_string(const std::string& name);

struct ImageRecord {
  std::string id;
  std::string device_id;
  Timestamp timestamp = 0;
  std::vector<device::ShelfItem> scene;
  std::vector<device::DetectedItem> items;
  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct CountRecord {
  std::string id;
  std::string device_id;
  Timestamp timestamp = 0;
  std::map<std::string, int> counts;
  std::string image_id;
  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

struct FridgeStatRecord {
  std::string id;
  std::string device_id;
  Timestamp timestamp = 0;
  double temperature_c = 0.0;
  double humidity_pct = 0.0;
  device::Setpoints setpoints;
  friend bool operator==(const FridgeStatRecord&, const FridgeStatRecord&) = default;
};

struct UserRecord {
  std::string username;
  std::string password_hash;  // see auth.hpp for the encoding
  Timestamp created_at = 0;
  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct SettingsRecord {
  std::string device_id;
  device::Setpoints setpoints;
  Timestamp updated_at = 0;
  friend bool operator==(const SettingsRecord&, const SettingsRecord&) = default;
};

/// Record ids are derived from the dedup key, e.g. "img:fridge-1:1735689660".
std::string record_id(Collection c, const std::string& device_id, Timestamp t);

// JSON documents as stored on disk and served over HTTP (camelCase keys,
// ISO-8601 timestamps). The parsers throw device::SchemaError.
nlohmann::json to_json(const ImageRecord& r);
nlohmann::json to_json(const CountRecord& r);
nlohmann::json to_json(const FridgeStatRecord& r);
nlohmann::json to_json(const UserRecord& r);
nlohmann::json to_json(const SettingsRecord& r);

ImageRecord image_from_json(const nlohmann::json& j);
CountRecord count_from_json(const nlohmann::json& j);
FridgeStatRecord fridgestat_from_json(const nlohmann::json& j);
UserRecord user_from_json(const nlohmann::json& j);
SettingsRecord settings_from_json(const nlohmann::json& j);

}  // namespace fridge::backend
