#include "fridge/backend/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace fridge::backend {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename Record>
using Series = std::shared_ptr<const std::vector<Record>>;

template <typename Record>
using ByDevice = std::map<std::string, Series<Record>, std::less<>>;

constexpr Collection kCollections[] = {Collection::images, Collection::counts, Collection::fridgestats,
                                       Collection::users, Collection::settings};

fs::path file_for(const fs::path& dir, Collection c) { return dir / (std::string(to_string(c)) + ".jsonl"); }

template <typename Record>
const std::vector<Record>* series_of(const ByDevice<Record>& by_device, const std::string& device_id) {
  const auto it = by_device.find(device_id);
  return it == by_device.end() ? nullptr : it->second.get();
}

template <typename Record>
const Record* find_at(const ByDevice<Record>& by_device, const std::string& device_id, Timestamp t) {
  const auto* series = series_of(by_device, device_id);
  if (!series) return nullptr;
  const auto it = std::lower_bound(series->begin(), series->end(), t,
                                   [](const Record& r, Timestamp v) { return r.timestamp < v; });
  return it != series->end() && it->timestamp == t ? &*it : nullptr;
}

template <typename Record>
std::optional<Timestamp> latest_time(const ByDevice<Record>& by_device, const std::string& device_id) {
  const auto* series = series_of(by_device, device_id);
  if (!series || series->empty()) return std::nullopt;
  return series->back().timestamp;
}

// Copy-on-write append: only the touched device's series is copied.
template <typename Record>
void append_to(ByDevice<Record>& by_device, Record record) {
  const auto it = by_device.find(record.device_id);
  auto next = it == by_device.end() ? std::make_shared<std::vector<Record>>()
                                    : std::make_shared<std::vector<Record>>(*it->second);
  const auto key = record.device_id;
  next->push_back(std::move(record));
  by_device[key] = std::move(next);
}

template <typename Record>
void check_order(const ByDevice<Record>& by_device, const std::string& device_id, Timestamp t, Collection c) {
  if (const auto latest = latest_time(by_device, device_id); latest && t < *latest) {
    throw ConflictError(fmt::format("{} record for {} at {} is older than the latest one at {}", to_string(c),
                                    device_id, format_timestamp(t), format_timestamp(*latest)));
  }
}

template <typename Record>
RangeResult<json> range_of(const ByDevice<Record>& by_device, const std::string& device_id, Timestamp from,
                           Timestamp to, std::size_t limit) {
  RangeResult<json> out;
  const auto* series = series_of(by_device, device_id);
  if (!series) return out;
  auto it = std::lower_bound(series->begin(), series->end(), from,
                             [](const Record& r, Timestamp v) { return r.timestamp < v; });
  for (; it != series->end() && it->timestamp <= to; ++it) {
    if (out.records.size() == limit) {
      out.truncated = true;
      break;
    }
    out.records.push_back(to_json(*it));
  }
  return out;
}

template <typename Record>
ByDevice<Record> group_sorted(std::vector<Record> records) {
  std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
    return std::tie(a.device_id, a.timestamp) < std::tie(b.device_id, b.timestamp);
  });
  std::map<std::string, std::vector<Record>> grouped;
  for (auto& r : records) grouped[r.device_id].push_back(std::move(r));
  ByDevice<Record> out;
  for (auto& [device, series] : grouped) out[device] = std::make_shared<const std::vector<Record>>(std::move(series));
  return out;
}

}  // namespace

struct Store::Snapshot {
  ByDevice<ImageRecord> images;
  ByDevice<CountRecord> counts;
  ByDevice<FridgeStatRecord> fridgestats;
  std::shared_ptr<const std::map<std::string, UserRecord>> users = std::make_shared<std::map<std::string, UserRecord>>();
  std::shared_ptr<const std::map<std::string, SettingsRecord>> settings =
      std::make_shared<std::map<std::string, SettingsRecord>>();
};

/// One O_APPEND file; each record is a single write() of its line.
class Store::AppendLog {
 public:
  AppendLog(const fs::path& path, bool sync) : path_(path), sync_(sync) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw std::runtime_error(fmt::format("open {}: {}", path.string(), std::strerror(errno)));
  }
  ~AppendLog() {
    if (fd_ >= 0) ::close(fd_);
  }
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  void append(const json& record) {
    const auto line = record.dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      const auto n = ::write(fd_, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw std::runtime_error(fmt::format("write {}: {}", path_.string(), std::strerror(errno)));
      }
      written += static_cast<std::size_t>(n);
    }
    if (sync_ && ::fdatasync(fd_) != 0) {
      throw std::runtime_error(fmt::format("fdatasync {}: {}", path_.string(), std::strerror(errno)));
    }
  }

 private:
  fs::path path_;
  bool sync_;
  int fd_ = -1;
};

Store::Store(fs::path dir, StoreOptions options) : dir_(std::move(dir)), options_(options) {
  fs::create_directories(dir_);
  load();
  for (const auto c : kCollections) logs_[c] = std::make_unique<AppendLog>(file_for(dir_, c), options_.sync);
}

Store::~Store() = default;

std::shared_ptr<const Store::Snapshot> Store::snapshot() const { return std::atomic_load(&snapshot_); }

void Store::publish(std::shared_ptr<const Snapshot> next) { std::atomic_store(&snapshot_, std::move(next)); }

namespace {

// Complete lines of a collection file. An unterminated last line is a torn
// write from a crash; the file is cut back to the last newline.
std::vector<std::string> read_lines(const fs::path& path, LoadReport& report) {
  std::vector<std::string> lines;
  std::ifstream in(path, std::ios::binary);
  if (!in) return lines;
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  std::size_t start = 0;
  while (start < content.size()) {
    const auto nl = content.find('\n', start);
    if (nl == std::string::npos) {
      ++report.torn_tails;
      fs::resize_file(path, start);
      spdlog::warn("event=torn_tail file={} bytes_dropped={}", path.string(), content.size() - start);
      break;
    }
    if (nl > start) lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

template <typename Record, typename Parse>
std::vector<Record> parse_lines(const fs::path& path, Parse parse, LoadReport& report) {
  std::vector<Record> out;
  for (const auto& line : read_lines(path, report)) {
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const std::exception& e) {
      ++report.bad_lines;
      spdlog::warn("event=bad_line file={} error=\"{}\"", path.string(), e.what());
    }
  }
  return out;
}

template <typename Record>
std::vector<Record> unique_by_id(std::vector<Record> records, LoadReport& report) {
  std::set<std::string> seen;
  std::vector<Record> out;
  for (auto& r : records) {
    if (seen.insert(r.id).second) {
      out.push_back(std::move(r));
    } else {
      ++report.duplicate_lines;
    }
  }
  return out;
}

}  // namespace

void Store::load() {
  LoadReport report;
  auto images = unique_by_id(parse_lines<ImageRecord>(file_for(dir_, Collection::images), image_from_json, report),
                             report);
  auto counts = unique_by_id(parse_lines<CountRecord>(file_for(dir_, Collection::counts), count_from_json, report),
                             report);
  auto stats = unique_by_id(
      parse_lines<FridgeStatRecord>(file_for(dir_, Collection::fridgestats), fridgestat_from_json, report), report);
  const auto users = parse_lines<UserRecord>(file_for(dir_, Collection::users), user_from_json, report);
  const auto settings = parse_lines<SettingsRecord>(file_for(dir_, Collection::settings), settings_from_json, report);

  // A detection is visible only when both of its lines made it to disk.
  std::set<std::string> image_ids;
  for (const auto& r : images) image_ids.insert(r.id);
  std::set<std::string> linked;
  std::erase_if(counts, [&](const CountRecord& c) {
    if (image_ids.count(c.image_id) == 0) {
      ++report.dangling_counts;
      return true;
    }
    linked.insert(c.image_id);
    return false;
  });
  std::erase_if(images, [&](const ImageRecord& r) {
    if (linked.count(r.id) == 0) {
      ++report.orphan_images;
      return true;
    }
    return false;
  });

  auto snap = std::make_shared<Snapshot>();
  report.records = images.size() + counts.size() + stats.size() + users.size() + settings.size();
  snap->images = group_sorted(std::move(images));
  snap->counts = group_sorted(std::move(counts));
  snap->fridgestats = group_sorted(std::move(stats));
  auto user_map = std::make_shared<std::map<std::string, UserRecord>>();
  for (const auto& u : users) user_map->emplace(u.username, u);  // the first registration wins
  snap->users = std::move(user_map);
  auto settings_map = std::make_shared<std::map<std::string, SettingsRecord>>();
  for (const auto& s : settings) (*settings_map)[s.device_id] = s;  // the last update wins
  snap->settings = std::move(settings_map);
  publish(std::move(snap));
  load_report_ = report;
  spdlog::info(
      "event=store_loaded dir={} records={} torn_tails={} bad_lines={} orphan_images={} dangling_counts={}",
      dir_.string(), report.records, report.torn_tails, report.bad_lines, report.orphan_images,
      report.dangling_counts);
}

PutResult Store::put_detection(const device::DetectionEvent& event) {
  std::lock_guard lock(write_mutex_);
  const auto current = snapshot();
  const auto image_id = record_id(Collection::images, event.device_id, event.timestamp);
  const auto count_id = record_id(Collection::counts, event.device_id, event.timestamp);
  if (find_at(current->counts, event.device_id, event.timestamp)) return {{image_id, count_id}, true};
  check_order(current->images, event.device_id, event.timestamp, Collection::images);

  ImageRecord image{image_id, event.device_id, event.timestamp, event.scene, event.items};
  CountRecord count{count_id, event.device_id, event.timestamp, event.counts, image_id};
  logs_.at(Collection::images)->append(to_json(image));
  logs_.at(Collection::counts)->append(to_json(count));

  auto next = std::make_shared<Snapshot>(*current);
  append_to(next->images, std::move(image));
  append_to(next->counts, std::move(count));
  publish(std::move(next));
  return {{image_id, count_id}, false};
}

PutResult Store::put_reading(const device::SensorReading& reading) {
  std::lock_guard lock(write_mutex_);
  const auto current = snapshot();
  const auto id = record_id(Collection::fridgestats, reading.device_id, reading.timestamp);
  if (find_at(current->fridgestats, reading.device_id, reading.timestamp)) return {{id}, true};
  check_order(current->fridgestats, reading.device_id, reading.timestamp, Collection::fridgestats);

  FridgeStatRecord record{id, reading.device_id, reading.timestamp, reading.temperature_c, reading.humidity_pct,
                          reading.setpoints};
  logs_.at(Collection::fridgestats)->append(to_json(record));
  auto next = std::make_shared<Snapshot>(*current);
  append_to(next->fridgestats, std::move(record));
  publish(std::move(next));
  return {{id}, false};
}

bool Store::add_user(const UserRecord& user) {
  std::lock_guard lock(write_mutex_);
  const auto current = snapshot();
  if (current->users->count(user.username) != 0) return false;
  logs_.at(Collection::users)->append(to_json(user));
  auto users = std::make_shared<std::map<std::string, UserRecord>>(*current->users);
  users->emplace(user.username, user);
  auto next = std::make_shared<Snapshot>(*current);
  next->users = std::move(users);
  publish(std::move(next));
  return true;
}

void Store::put_settings(const SettingsRecord& settings) {
  std::lock_guard lock(write_mutex_);
  const auto current = snapshot();
  logs_.at(Collection::settings)->append(to_json(settings));
  auto map = std::make_shared<std::map<std::string, SettingsRecord>>(*current->settings);
  (*map)[settings.device_id] = settings;
  auto next = std::make_shared<Snapshot>(*current);
  next->settings = std::move(map);
  publish(std::move(next));
}

std::optional<ImageRecord> Store::latest_image(const std::string& device_id) const {
  const auto snap = snapshot();
  const auto* series = series_of(snap->images, device_id);
  if (!series || series->empty()) return std::nullopt;
  return series->back();
}

std::optional<CountRecord> Store::latest_count(const std::string& device_id) const {
  const auto snap = snapshot();
  const auto* series = series_of(snap->counts, device_id);
  if (!series || series->empty()) return std::nullopt;
  return series->back();
}

std::optional<FridgeStatRecord> Store::latest_fridgestat(const std::string& device_id) const {
  const auto snap = snapshot();
  const auto* series = series_of(snap->fridgestats, device_id);
  if (!series || series->empty()) return std::nullopt;
  return series->back();
}

std::optional<json> Store::query_latest(Collection c, const std::string& device_id) const {
  switch (c) {
    case Collection::images:
      if (auto r = latest_image(device_id)) return to_json(*r);
      return std::nullopt;
    case Collection::counts:
      if (auto r = latest_count(device_id)) return to_json(*r);
      return std::nullopt;
    case Collection::fridgestats:
      if (auto r = latest_fridgestat(device_id)) return to_json(*r);
      return std::nullopt;
    default:
      throw std::invalid_argument(std::string("no time series in collection ") + to_string(c));
  }
}

RangeResult<json> Store::query_range(Collection c, const std::string& device_id, Timestamp from, Timestamp to,
                                     std::size_t limit) const {
  if (from > to) throw std::invalid_argument("range start is after its end");
  if (limit < 1) throw std::invalid_argument("limit must be at least 1");
  const auto snap = snapshot();
  switch (c) {
    case Collection::images:
      return range_of(snap->images, device_id, from, to, limit);
    case Collection::counts:
      return range_of(snap->counts, device_id, from, to, limit);
    case Collection::fridgestats:
      return range_of(snap->fridgestats, device_id, from, to, limit);
    default:
      throw std::invalid_argument(std::string("no time series in collection ") + to_string(c));
  }
}

std::optional<UserRecord> Store::find_user(const std::string& username) const {
  const auto snap = snapshot();
  const auto it = snap->users->find(username);
  if (it == snap->users->end()) return std::nullopt;
  return it->second;
}

std::optional<SettingsRecord> Store::settings_for(const std::string& device_id) const {
  const auto snap = snapshot();
  const auto it = snap->settings->find(device_id);
  if (it == snap->settings->end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Store::devices() const {
  const auto snap = snapshot();
  std::set<std::string> ids;
  for (const auto& [id, _] : snap->images) ids.insert(id);
  for (const auto& [id, _] : snap->fridgestats) ids.insert(id);
  return {ids.begin(), ids.end()};
}

std::size_t Store::size(Collection c) const {
  const auto snap = snapshot();
  const auto total = [](const auto& by_device) {
    std::size_t n = 0;
    for (const auto& [_, series] : by_device) n += series->size();
    return n;
  };
  switch (c) {
    case Collection::images:
      return total(snap->images);
    case Collection::counts:
      return total(snap->counts);
    case Collection::fridgestats:
      return total(snap->fridgestats);
    case Collection::users:
      return snap->users->size();
    case Collection::settings:
      return snap->settings->size();
  }
  return 0;
}

std::size_t Store::size(Collection c, const std::string& device_id) const {
  const auto snap = snapshot();
  const auto count = [&](const auto& by_device) -> std::size_t {
    const auto* series = series_of(by_device, device_id);
    return series ? series->size() : 0;
  };
  switch (c) {
    case Collection::images:
      return count(snap->images);
    case Collection::counts:
      return count(snap->counts);
    case Collection::fridgestats:
      return count(snap->fridgestats);
    case Collection::settings:
      return snap->settings->count(device_id);
    case Collection::users:
      return 0;
  }
  return 0;
}

}  // namespace fridge::backend
