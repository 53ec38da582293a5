#pragma once

#include <chrono>
#include <filesystem>
#include <memory>

#include "fridge/app/fleet.hpp"
#include "fridge/backend/service.hpp"
#include "fridge/broker/server.hpp"

namespace fridge::app {

struct AllInOneOptions {
  FleetOptions fleet;
  broker::ServerOptions broker;
  /// Its `broker` endpoint is replaced by the in-process broker.
  backend::BackendOptions backend;
  std::optional<std::filesystem::path> model_path;
};

/// Broker, backend and a device fleet in one process. The backend and the
/// devices talk to the broker over loopback TCP exactly as separate
/// processes would.
class AllInOne {
 public:
  explicit AllInOne(AllInOneOptions options);
  ~AllInOne();
  AllInOne(const AllInOne&) = delete;
  AllInOne& operator=(const AllInOne&) = delete;

  /// Starts the broker, then the backend, then connects the devices.
  void start();
  void stop();

  /// Runs every device for `ticks` ticks (negative: until `stop`).
  void run(long ticks, const std::atomic<bool>* stop = nullptr) { fleet_->run(ticks, stop); }

  /// Waits until the backend holds at least `per_device` detections and
  /// readings for every device. False on timeout.
  bool wait_ingested(std::size_t per_device, std::chrono::milliseconds timeout);

  [[nodiscard]] int broker_port() const noexcept { return broker_->port(); }
  [[nodiscard]] int http_port() const noexcept { return backend_->http_port(); }
  [[nodiscard]] backend::BackendService& backend() noexcept { return *backend_; }
  [[nodiscard]] Fleet& fleet() noexcept { return *fleet_; }

 private:
  AllInOneOptions options_;
  std::unique_ptr<broker::BrokerServer> broker_;
  std::unique_ptr<backend::BackendService> backend_;
  std::unique_ptr<Fleet> fleet_;
};

}  // namespace fridge::app
