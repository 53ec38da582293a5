#pragma once

#include <string>

#include "json.hpp"

#include "fridge/calib/types.hpp"

namespace fridge::calib {

enum class TableFormat { tsv, csv };

/// One header line, then one row per bin: lo, hi, count, avg_confidence, accuracy.
/// Empty bins print "-" in the two statistic columns.
std::string report_to_table(const CalibrationReport& report, TableFormat format = TableFormat::tsv);

nlohmann::json report_to_json(const CalibrationReport& report);
CalibrationReport report_from_json(const nlohmann::json& j);

nlohmann::json loss_config_to_json(const LossConfig& config);
LossConfig loss_config_from_json(const nlohmann::json& j);

nlohmann::json temperature_to_json(const Temperature& temperature);
Temperature temperature_from_json(const nlohmann::json& j);

}  // namespace fridge::calib
