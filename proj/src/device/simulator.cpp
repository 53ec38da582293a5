#include "fridge/device/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "fridge/trainer/dataset.hpp"

namespace fridge::device {
namespace {

enum class Stream : std::uint64_t { env = 1, inventory = 2, detection = 3 };

std::mt19937_64 stream_rng(std::uint64_t seed, const std::string& device_id, Stream stream) {
  // FNV-1a, so that streams do not depend on the standard library's hash.
  std::uint64_t id_hash = 14695981039346656037ULL;
  for (const unsigned char c : device_id) id_hash = (id_hash ^ c) * 1099511628211ULL;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id_hash), static_cast<std::uint32_t>(id_hash >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

BBox slot_box(const ShelfGrid& grid, int slot) {
  const double cw = 1.0 / grid.cols;
  const double ch = 1.0 / grid.rows;
  const int row = slot / grid.cols;
  const int col = slot % grid.cols;
  return {col * cw + 0.1 * cw, row * ch + 0.1 * ch, 0.8 * cw, 0.8 * ch};
}

void place_item(DeviceState& state, const std::string& class_name) {
  const int slots = state.grid.rows * state.grid.cols;
  std::vector<int> free;
  for (int s = 0; s < slots; ++s) {
    const auto box = slot_box(state.grid, s);
    const bool taken = std::any_of(state.shelf_layout.begin(), state.shelf_layout.end(),
                                   [&](const ShelfItem& item) { return item.bbox == box; });
    if (!taken) free.push_back(s);
  }
  BBox box;
  if (!free.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    box = slot_box(state.grid, free[pick(state.inventory_rng)]);
  } else {
    // Grid full: stack the item somewhere on the shelf.
    const double w = 0.8 / state.grid.cols;
    const double h = 0.8 / state.grid.rows;
    std::uniform_real_distribution<double> ux(0.0, 1.0 - w);
    std::uniform_real_distribution<double> uy(0.0, 1.0 - h);
    const double x = ux(state.inventory_rng);
    box = {x, uy(state.inventory_rng), w, h};
  }
  state.shelf_layout.push_back({class_name, box});
  ++state.inventory[class_name];
}

double relax(double value, double target, double k_dt, double noise) {
  return value + std::min(1.0, k_dt) * (target - value) + noise;
}

}  // namespace

DeviceConfig default_device_config(const std::string& device_id, std::uint64_t seed) {
  DeviceConfig c;
  c.device_id = device_id;
  c.seed = seed;
  c.class_names = trainer::default_dataset_spec().class_names;
  const int initial[] = {3, 2, 4, 1, 2};
  for (std::size_t i = 0; i < c.class_names.size() && i < std::size(initial); ++i) {
    c.initial_inventory[c.class_names[i]] = initial[i];
  }
  return c;
}

bool DeviceState::invariants_hold() const {
  std::map<std::string, int> tally;
  for (const auto& item : shelf_layout) {
    if (!item.bbox.inside_unit_square()) return false;
    ++tally[item.class_name];
  }
  auto positive = inventory;
  std::erase_if(positive, [](const auto& kv) { return kv.second == 0; });
  return tally == positive && humidity_pct >= 0.0 && humidity_pct <= 100.0;
}

DeviceState make_device(const DeviceConfig& config) {
  if (config.device_id.empty() || config.device_id.find_first_of("/+#") != std::string::npos) {
    throw std::invalid_argument("device id must be non-empty and free of '/', '+' and '#'");
  }
  if (config.class_names.empty()) throw std::invalid_argument("device needs at least one class");
  if (const auto problem = setpoints_problem(config.setpoints); !problem.empty()) {
    throw std::invalid_argument(problem);
  }
  if (config.grid.rows < 1 || config.grid.cols < 1) throw std::invalid_argument("shelf grid must be non-empty");
  for (const double p : {config.inventory.p_add, config.inventory.p_remove}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("inventory probabilities must lie in [0, 1]");
  }
  if (!(config.thermal.k_per_minute >= 0.0) || !(config.thermal.sigma_temp_c >= 0.0) ||
      !(config.thermal.sigma_humidity_pct >= 0.0)) {
    throw std::invalid_argument("thermal constants must be non-negative");
  }

  DeviceState s;
  s.device_id = config.device_id;
  s.class_names = config.class_names;
  s.temp_c = config.initial_temp_c;
  s.humidity_pct = std::clamp(config.initial_humidity_pct, 0.0, 100.0);
  s.setpoints = config.setpoints;
  s.sim_clock = config.start_time;
  s.thermal = config.thermal;
  s.inventory_config = config.inventory;
  s.grid = config.grid;
  s.detection_sigma = config.detection_sigma;
  s.env_rng = stream_rng(config.seed, config.device_id, Stream::env);
  s.inventory_rng = stream_rng(config.seed, config.device_id, Stream::inventory);
  s.detection_rng = stream_rng(config.seed, config.device_id, Stream::detection);
  for (const auto& name : config.class_names) s.inventory[name] = 0;
  for (const auto& [name, count] : config.initial_inventory) {
    if (std::find(s.class_names.begin(), s.class_names.end(), name) == s.class_names.end()) {
      throw std::invalid_argument("initial inventory names unknown class '" + name + "'");
    }
    if (count < 0) throw std::invalid_argument("initial inventory counts must be non-negative");
    for (int i = 0; i < count; ++i) place_item(s, name);
  }
  return s;
}

SensorReading step_env(DeviceState& state, double dt_seconds) {
  if (!(dt_seconds > 0.0) || !std::isfinite(dt_seconds)) throw std::invalid_argument("dt must be positive");
  const double dt_min = dt_seconds / 60.0;
  const double k_dt = state.thermal.k_per_minute * dt_min;
  std::normal_distribution<double> normal(0.0, 1.0);
  // Both draws happen unconditionally so the stream does not depend on sigma.
  const double e_temp = normal(state.env_rng);
  const double e_hum = normal(state.env_rng);
  const double scale = std::sqrt(dt_min);
  state.temp_c = relax(state.temp_c, state.setpoints.temperature_target_c, k_dt,
                       state.thermal.sigma_temp_c * scale * e_temp);
  state.humidity_pct = std::clamp(relax(state.humidity_pct, state.setpoints.humidity_target_pct, k_dt,
                                        state.thermal.sigma_humidity_pct * scale * e_hum),
                                  0.0, 100.0);
  state.sim_clock += static_cast<Timestamp>(std::llround(dt_seconds));
  return {state.device_id, state.sim_clock, state.temp_c, state.humidity_pct, state.setpoints};
}

InventoryChange step_inventory(DeviceState& state) {
  InventoryChange change;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double add_draw = u(state.inventory_rng);
  const double remove_draw = u(state.inventory_rng);
  if (add_draw < state.inventory_config.p_add) {
    std::uniform_int_distribution<std::size_t> pick(0, state.class_names.size() - 1);
    const auto& name = state.class_names[pick(state.inventory_rng)];
    place_item(state, name);
    change.added = name;
  }
  if (remove_draw < state.inventory_config.p_remove && !state.shelf_layout.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, state.shelf_layout.size() - 1);
    const auto it = state.shelf_layout.begin() + static_cast<std::ptrdiff_t>(pick(state.inventory_rng));
    change.removed = it->class_name;
    --state.inventory[it->class_name];
    state.shelf_layout.erase(it);
  }
  return change;
}

DetectionEvent emit_detection(DeviceState& state, const trainer::TrainedModel& model,
                              const std::optional<calib::Temperature>& temperature) {
  if (model.class_names() != state.class_names) {
    throw ClassMismatch(fmt::format("model classes [{}] differ from device classes [{}]",
                                    fmt::join(model.class_names(), ", "), fmt::join(state.class_names, ", ")));
  }
  const auto& spec = model.dataset;
  const double sigma = state.detection_sigma.value_or(spec.noise_sigma);
  DetectionEvent event;
  event.device_id = state.device_id;
  event.timestamp = state.sim_clock;
  event.scene = state.shelf_layout;
  for (const auto& item : state.shelf_layout) {
    const auto x = trainer::sample_features(spec, spec.class_index(item.class_name), sigma, state.detection_rng);
    const auto logits = model.model.logits(x);
    const auto probs = trainer::predict_proba(model.output_mode(), logits, temperature);
    // A saturated probability is reported just below one so that every
    // confidence stays inside the open unit interval.
    const double confidence = std::clamp(probs.max(), std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
    event.items.push_back({state.class_names[probs.argmax()], confidence, item.bbox});
  }
  event.counts = count_items(event.items);
  return event;
}

void apply_settings(DeviceState& state, const nlohmann::json& settings) {
  state.setpoints = setpoints_from_json(settings);
}

}  // namespace fridge::device
