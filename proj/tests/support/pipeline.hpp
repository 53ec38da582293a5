#pragma once

// Whole-system run: broker, backend and two simulated fridges in one
// process, driven over the real HTTP API. Shared by the app tests and the
// acceptance binary.

#include <chrono>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "httplib.h"
#include "temp_dir.hpp"
#include "fridge/app/all_in_one.hpp"

namespace fridge::testing {

struct PipelineOutcome {
  std::size_t devices = 0;
  std::size_t minutes = 0;
  std::size_t total_images = 0;
  std::size_t total_counts = 0;
  std::size_t total_fridgestats = 0;
  double new_target = 0.0;
  double final_temperature = 0.0;  // device 1 after the settings change
  std::vector<std::string> violations;

  [[nodiscard]] bool ok() const { return devices > 0 && violations.empty(); }
};

/// Runs `before` simulated minutes, posts a new temperature target for
/// fridge-1 through POST /api/settings, runs `after` more minutes and checks
/// the stored records, the latest-record endpoints and the temperature.
inline PipelineOutcome run_pipeline(const std::filesystem::path& catalog, int before = 30, int after = 30,
                                    double new_target = 1.0) {
  PipelineOutcome out;
  out.new_target = new_target;
  const auto fail = [&](std::string what) { out.violations.push_back(std::move(what)); };
  TempDir dir("fridge-pipeline");

  app::AllInOneOptions options;
  options.fleet.devices = 2;
  options.fleet.seed = 7;
  options.fleet.runner.acceleration = 0.0;
  options.broker.listen = {"127.0.0.1", 0};
  options.backend.data_dir = dir.path() / "store";
  options.backend.catalog_path = catalog;
  options.backend.api.host = "127.0.0.1";
  options.backend.api.port = 0;
  options.backend.api.runs_dir = dir.path() / "run";
  app::AllInOne system(options);
  system.start();
  out.devices = system.fleet().size();
  out.minutes = static_cast<std::size_t>(before + after);

  system.run(before);
  if (!system.wait_ingested(static_cast<std::size_t>(before), std::chrono::seconds(10))) {
    fail("backend did not ingest the first phase");
  }

  httplib::Client http("127.0.0.1", system.http_port());
  http.set_read_timeout(10, 0);
  const auto post = [&](const std::string& path, const nlohmann::json& body, const std::string& token = {}) {
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    return http.Post(path, headers, body.dump(), "application/json");
  };
  const nlohmann::json credentials = {{"username", "operator"}, {"password", "cold-storage"}};
  const auto registered = post("/api/auth/register", credentials);
  if (!registered || registered->status != 201) fail("register failed");
  const auto login = post("/api/auth/login", credentials);
  std::string token;
  if (login && login->status == 200) token = nlohmann::json::parse(login->body).value("token", "");
  if (token.empty()) fail("login failed");

  auto& target_device = system.fleet().device(0);
  const auto settings = post(
      "/api/settings", {{"device", target_device.state().device_id}, {"temperatureTarget", new_target}, {"humidityTarget", 40.0}},
      token);
  if (!settings || settings->status != 200) {
    fail(fmt::format("POST /api/settings returned {}", settings ? settings->status : -1));
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
  while (target_device.settings_received() == 0 && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (target_device.settings_received() == 0) fail("settings never reached the device");

  system.run(after);
  const auto total = static_cast<std::size_t>(before + after);
  if (!system.wait_ingested(total, std::chrono::seconds(10))) fail("backend did not ingest the second phase");

  auto& store = system.backend().store();
  for (std::size_t i = 0; i < system.fleet().size(); ++i) {
    auto& runner = system.fleet().device(i);
    const auto id = runner.state().device_id;
    const auto images = store.size(backend::Collection::images, id);
    const auto counts = store.size(backend::Collection::counts, id);
    const auto stats = store.size(backend::Collection::fridgestats, id);
    out.total_images += images;
    out.total_counts += counts;
    out.total_fridgestats += stats;
    if (images != total || counts != total || stats != total) {
      fail(fmt::format("{} holds {} images, {} counts, {} readings; expected {}", id, images, counts, stats, total));
    }
    const auto all_images = store.query_range(backend::Collection::images, id, 0, runner.state().sim_clock, total + 1);
    const auto all_counts = store.query_range(backend::Collection::counts, id, 0, runner.state().sim_clock, total + 1);
    if (all_images.records.size() == all_counts.records.size()) {
      for (std::size_t k = 0; k < all_counts.records.size(); ++k) {
        if (all_counts.records[k]["imageId"] != all_images.records[k]["id"]) {
          fail(fmt::format("{} count {} is not linked to its image", id, k));
          break;
        }
      }
    }

    const auto& last = *runner.last_detection();
    const auto expected = device::to_json(last);
    const auto image = http.Get("/api/latest/image?device=" + id);
    const auto count = http.Get("/api/latest/counts?device=" + id);
    if (!image || image->status != 200 || !count || count->status != 200) {
      fail(fmt::format("latest endpoints failed for {}", id));
      continue;
    }
    const auto image_body = nlohmann::json::parse(image->body);
    const auto count_body = nlohmann::json::parse(count->body);
    if (image_body["timestamp"] != expected["timestamp"] || image_body["items"] != expected["items"] ||
        image_body["scene"] != expected["scene"]) {
      fail(fmt::format("latest image of {} differs from the simulator's final event", id));
    }
    if (count_body["counts"] != expected["counts"] || count_body["imageId"] != image_body["id"]) {
      fail(fmt::format("latest counts of {} differ from the simulator's final event", id));
    }
  }

  out.final_temperature = target_device.state().temp_c;
  if (std::abs(out.final_temperature - new_target) > 1.0) {
    fail(fmt::format("temperature {:.3f} is not within 1 degree of the new target {}", out.final_temperature,
                     new_target));
  }
  const auto stats = http.Get("/api/fridgestats?device=" + target_device.state().device_id + "&limit=1000");
  if (stats && stats->status == 200) {
    const auto records = nlohmann::json::parse(stats->body)["records"];
    if (records.empty() || records.back()["setpoints"]["temperatureTarget"] != new_target) {
      fail("stored readings do not carry the new setpoint");
    }
  } else {
    fail("GET /api/fridgestats failed");
  }
  system.stop();
  return out;
}

}  // namespace fridge::testing
