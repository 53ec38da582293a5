#include "fridge/backend/service.hpp"

#include <spdlog/spdlog.h>

namespace fridge::backend {

BackendService::BackendService(BackendOptions options) : options_(std::move(options)) {
  auto catalog = load_catalog(options_.catalog_path);
  store_ = std::make_unique<Store>(options_.data_dir, options_.store);
  ingestor_ = std::make_unique<Ingestor>(*store_);
  auth_ = std::make_unique<AuthService>(*store_, options_.auth);
  api_ = std::make_unique<ApiServer>(
      *store_, *auth_, std::move(catalog),
      [this](const std::string& device_id, const device::Setpoints& s) { return publish_settings(device_id, s); },
      options_.api);
}

BackendService::~BackendService() { stop(); }

void BackendService::start() {
  if (options_.broker) {
    auto on_message = [this](const std::string& topic, const wire::Bytes& body) {
      try {
        ingestor_->ingest(topic, std::string_view(reinterpret_cast<const char*>(body.data()), body.size()));
      } catch (const IngestError&) {
        // Already logged and counted by the ingestor; the message is dropped.
      }
    };
    broker::ClientOptions client_options;
    client_options.client_id = options_.client_id;
    auto client = std::make_unique<broker::PubSubClient>(*options_.broker, client_options, on_message);
    client->subscribe("fridge/+/detections");
    client->subscribe("fridge/+/env");
    std::lock_guard lock(client_mutex_);
    client_ = std::move(client);
  }
  api_->start();
}

void BackendService::stop() {
  if (api_) api_->stop();
  std::lock_guard lock(client_mutex_);
  if (client_) {
    client_->disconnect();
    client_.reset();
  }
}

bool BackendService::publish_settings(const std::string& device_id, const device::Setpoints& setpoints) {
  std::lock_guard lock(client_mutex_);
  if (!client_ || !client_->connected()) return false;
  try {
    client_->publish(device::settings_topic(device_id), device::to_json(setpoints).dump());
    return true;
  } catch (const std::exception& e) {
    spdlog::warn("event=settings_publish_failed device={} error=\"{}\"", device_id, e.what());
    return false;
  }
}

}  // namespace fridge::backend
