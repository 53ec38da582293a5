#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "fridge/trainer/experiment.hpp"

namespace fridge::app {

/// Models written by an experiment, in output order.
inline const std::vector<std::string> kRunModels = {"bce", "focal", "adafocal"};

/// Writes exactly eight files into `out_dir` (created if missing):
///   model_<name>.json        for bce, focal, adafocal
///   reliability_<name>.tsv   test-split reliability table per model
///   temperature_fit.json     temperature fitted on the focal validation split
///   summary.json             options, per-model reports and the verdict
/// Content depends only on the result, so equal results give equal bytes.
/// Returns the paths written.
std::vector<std::filesystem::path> write_experiment(const trainer::ExperimentResult& result,
                                                    const std::filesystem::path& out_dir);

nlohmann::json temperature_fit_to_json(const trainer::ExperimentResult& result);

enum class ExportFormat { csv, tsv, json };

/// Parses "csv", "tsv" or "json"; throws std::invalid_argument otherwise.
ExportFormat export_format_from_string(const std::string& text);

/// Reads `run_dir`/summary.json and writes one report file per model into
/// `out_dir`: a table with one row per bin for csv and tsv, the report
/// object for json. Throws std::runtime_error when the run is incomplete.
std::vector<std::filesystem::path> export_reports(const std::filesystem::path& run_dir, ExportFormat format,
                                                  const std::filesystem::path& out_dir);

}  // namespace fridge::app
