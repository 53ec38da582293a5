#pragma once

#include <filesystem>

#include "json.hpp"
#include "fridge/trainer/trainer.hpp"

namespace fridge::trainer {

inline constexpr int kModelFormatVersion = 1;

/// Versioned model document: weights, loss config, dataset parameters (which
/// carries the seed and class means), training options and curves.
nlohmann::json model_to_json(const TrainedModel& model);

/// Throws std::invalid_argument on an unknown format or version.
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

nlohmann::json curves_to_json(const std::vector<EpochRecord>& curves);

}  // namespace fridge::trainer
