#include "fridge/app/all_in_one.hpp"

#include <thread>

#include <spdlog/spdlog.h>

namespace fridge::app {

AllInOne::AllInOne(AllInOneOptions options) : options_(std::move(options)) {
  fleet_ = std::make_unique<Fleet>(options_.fleet, deploy_model(options_.model_path, options_.fleet.seed));
}

AllInOne::~AllInOne() { stop(); }

void AllInOne::start() {
  broker_ = std::make_unique<broker::BrokerServer>(options_.broker);
  broker_->start();
  const net::Endpoint local{"127.0.0.1", broker_->port()};
  auto backend_options = options_.backend;
  backend_options.broker = local;
  backend_ = std::make_unique<backend::BackendService>(backend_options);
  backend_->start();
  fleet_->connect(local);
  spdlog::info("event=all_in_one_ready broker_port={} http_port={} devices={}", broker_->port(),
               backend_->http_port(), fleet_->size());
}

void AllInOne::stop() {
  if (fleet_) fleet_->disconnect();
  if (backend_) backend_->stop();
  if (broker_) broker_->stop();
}

bool AllInOne::wait_ingested(std::size_t per_device, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    bool done = true;
    for (std::size_t i = 0; i < fleet_->size(); ++i) {
      const auto id = fleet_->device(i).state().device_id;
      const auto& store = backend_->store();
      if (store.size(backend::Collection::counts, id) < per_device ||
          store.size(backend::Collection::fridgestats, id) < per_device) {
        done = false;
      }
    }
    if (done) return true;
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

}  // namespace fridge::app
