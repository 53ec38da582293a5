#include "fridge/app/fleet.hpp"

#include <thread>

#include <fmt/format.h>

#include "fridge/calib/temperature.hpp"
#include "fridge/trainer/model_io.hpp"

namespace fridge::app {

DeployedModel deploy_model(const std::optional<std::filesystem::path>& path, std::uint64_t seed, int epochs) {
  if (path) return {std::make_shared<const trainer::TrainedModel>(trainer::load_model(*path)), std::nullopt};
  const auto spec = trainer::default_dataset_spec(seed);
  const auto data = trainer::generate_dataset(spec);
  calib::LossConfig loss;
  loss.kind = calib::LossKind::focal;
  trainer::TrainOptions options;
  options.epochs = epochs;
  auto model = std::make_shared<const trainer::TrainedModel>(trainer::train(data, spec, loss, options));
  const auto val = trainer::evaluate(*model, data.val);
  return {model, calib::fit_temperature(val.logits, val.labels, calib::TemperatureMode::scalar)};
}

std::string fleet_device_id(int index) { return fmt::format("fridge-{}", index + 1); }

Fleet::Fleet(const FleetOptions& options, const DeployedModel& model) {
  if (options.devices < 1) throw std::invalid_argument("a fleet needs at least one device");
  for (int i = 0; i < options.devices; ++i) {
    runners_.push_back(std::make_unique<device::DeviceRunner>(
        device::default_device_config(fleet_device_id(i), options.seed), model.model, model.temperature,
        options.runner));
  }
}

Fleet::~Fleet() { disconnect(); }

void Fleet::connect(const net::Endpoint& broker) {
  for (auto& r : runners_) r->connect(broker);
}

void Fleet::disconnect() {
  for (auto& r : runners_) r->disconnect();
}

void Fleet::run(long ticks, const std::atomic<bool>* stop) {
  std::vector<std::thread> threads;
  threads.reserve(runners_.size());
  for (auto& r : runners_) threads.emplace_back([&runner = *r, ticks, stop] { runner.run_ticks(ticks, stop); });
  for (auto& t : threads) t.join();
}

}  // namespace fridge::app
