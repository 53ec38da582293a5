#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "fridge/backend/api.hpp"
#include "fridge/backend/auth.hpp"
#include "fridge/backend/ingest.hpp"
#include "fridge/backend/store.hpp"
#include "fridge/broker/client.hpp"

namespace fridge::backend {

struct BackendOptions {
  std::filesystem::path data_dir = "data/store";
  std::filesystem::path catalog_path = "data/recipes.json";
  std::optional<net::Endpoint> broker = net::Endpoint{"127.0.0.1", 1884};
  std::string client_id = "backend";
  ApiOptions api;
  AuthOptions auth;
  StoreOptions store;
};

/// The whole backend: store, ingestion from the broker and the HTTP API.
class BackendService {
 public:
  /// Loads the store and the recipe catalog; throws std::runtime_error when
  /// the catalog is missing.
  explicit BackendService(BackendOptions options);
  ~BackendService();

  /// Subscribes to fridge/+/detections and fridge/+/env (when a broker is
  /// configured) and starts serving HTTP.
  void start();
  void stop();

  [[nodiscard]] int http_port() const noexcept { return api_->port(); }
  [[nodiscard]] Store& store() noexcept { return *store_; }
  [[nodiscard]] Ingestor& ingestor() noexcept { return *ingestor_; }
  [[nodiscard]] AuthService& auth() noexcept { return *auth_; }

 private:
  bool publish_settings(const std::string& device_id, const device::Setpoints& setpoints);

  BackendOptions options_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<Ingestor> ingestor_;
  std::unique_ptr<AuthService> auth_;
  std::unique_ptr<ApiServer> api_;
  std::mutex client_mutex_;
  std::unique_ptr<broker::PubSubClient> client_;
};

}  // namespace fridge::backend
