#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fridge/backend/records.hpp"

namespace fridge::backend {

struct StoreOptions {
  /// fdatasync after every line. Without it a record is durable against a
  /// process kill once write() returns, but not against power loss.
  bool sync = false;
};

/// What loading found on disk besides well-formed records.
struct LoadReport {
  std::size_t records = 0;
  std::size_t torn_tails = 0;       // incomplete last lines, truncated away
  std::size_t bad_lines = 0;        // complete lines that failed to parse
  std::size_t duplicate_lines = 0;  // same id written more than once
  std::size_t orphan_images = 0;    // image without its count record
  std::size_t dangling_counts = 0;  // count whose image is missing
};

/// An ingest that contradicts what is already stored, e.g. a timestamp
/// older than the device's latest record.
class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Record>
struct RangeResult {
  std::vector<Record> records;
  bool truncated = false;
};

struct PutResult {
  std::vector<std::string> ids;
  bool duplicate = false;
};

/// Append-only JSON-lines storage, one file per collection, with an
/// in-memory index rebuilt at startup. Writes serialize on one appender;
/// readers work on immutable snapshots and never wait for a write's I/O.
class Store {
 public:
  /// Creates `dir` if needed and loads it, repairing torn tails.
  explicit Store(std::filesystem::path dir, StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  [[nodiscard]] const LoadReport& load_report() const noexcept { return load_report_; }
  [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

  /// Writes the image line, then the count line, and only then makes both
  /// visible. A repeat of a stored (device, timestamp) is a no-op.
  /// Throws ConflictError when the timestamp is older than the latest.
  PutResult put_detection(const device::DetectionEvent& event);
  PutResult put_reading(const device::SensorReading& reading);

  /// False when the username is taken.
  bool add_user(const UserRecord& user);
  void put_settings(const SettingsRecord& settings);

  [[nodiscard]] std::optional<ImageRecord> latest_image(const std::string& device_id) const;
  [[nodiscard]] std::optional<CountRecord> latest_count(const std::string& device_id) const;
  [[nodiscard]] std::optional<FridgeStatRecord> latest_fridgestat(const std::string& device_id) const;

  /// Latest record of images, counts or fridgestats as JSON; throws
  /// std::invalid_argument for other collections.
  [[nodiscard]] std::optional<nlohmann::json> query_latest(Collection c, const std::string& device_id) const;

  /// Records with from <= timestamp <= to in ascending order, at most
  /// `limit` of them. Throws std::invalid_argument when from > to or limit < 1.
  [[nodiscard]] RangeResult<nlohmann::json> query_range(Collection c, const std::string& device_id, Timestamp from,
                                                        Timestamp to, std::size_t limit) const;

  [[nodiscard]] std::optional<UserRecord> find_user(const std::string& username) const;
  [[nodiscard]] std::optional<SettingsRecord> settings_for(const std::string& device_id) const;
  [[nodiscard]] std::vector<std::string> devices() const;
  [[nodiscard]] std::size_t size(Collection c) const;
  [[nodiscard]] std::size_t size(Collection c, const std::string& device_id) const;

 private:
  struct Snapshot;
  class AppendLog;

  void load();
  std::shared_ptr<const Snapshot> snapshot() const;
  void publish(std::shared_ptr<const Snapshot> next);

  std::filesystem::path dir_;
  StoreOptions options_;
  LoadReport load_report_;
  std::mutex write_mutex_;
  std::map<Collection, std::unique_ptr<AppendLog>> logs_;
  std::shared_ptr<const Snapshot> snapshot_;
};

}  // namespace fridge::backend
