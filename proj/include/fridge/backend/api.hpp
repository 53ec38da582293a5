#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "fridge/backend/auth.hpp"
#include "fridge/backend/recipes.hpp"
#include "fridge/backend/store.hpp"

namespace fridge::backend {

/// Sends new setpoints to a device. Returns false when there is no broker
/// connection to send them over.
using SettingsPublisher = std::function<bool(const std::string& device_id, const device::Setpoints& setpoints)>;

struct ApiOptions {
  std::string host = "0.0.0.0";
  int port = 8080;  // 0 picks an ephemeral port
  /// Output directory of an `experiment` run, read by the calibration report endpoint.
  std::filesystem::path runs_dir;
  std::size_t default_range_limit = 1000;
  std::size_t max_range_limit = 100000;
};

/// JSON over HTTP for the dashboard:
///   POST /api/auth/register     {username, password}       201 | 409 | 422
///   POST /api/auth/login        {username, password}       200 {token, expiresAt} | 401
///   POST /api/auth/logout       Authorization: Bearer      204
///   GET  /api/latest/image?device=                         200 image record | 404
///   GET  /api/latest/counts?device=                        200 count record | 404
///   GET  /api/fridgestats?device=&from=&to=&limit=         200 {records, truncated}
///   POST /api/settings          Bearer; {device, temperatureTarget, humidityTarget}
///                                                          200 ack | 401 | 422 | 503
///   GET  /api/settings?device=                             200 | 404
///   GET  /api/recipes?device=                              200 {device, counts, recipes}
///   GET  /api/calibration/report?model=                    200 {model, report, ...} | 404
/// Errors are {"error": message}.
class ApiServer {
 public:
  ApiServer(Store& store, AuthService& auth, Catalog catalog, SettingsPublisher publisher, ApiOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and serves on a background thread. Throws std::runtime_error
  /// when the port cannot be bound.
  void start();
  void stop();
  [[nodiscard]] int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace fridge::backend
