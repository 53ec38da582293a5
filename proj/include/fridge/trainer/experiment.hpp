#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "fridge/calib/types.hpp"
#include "fridge/trainer/trainer.hpp"

namespace fridge::trainer {

struct ExperimentOptions {
  std::uint64_t seed = 7;
  int epochs = 50;
  double lr = 0.1;
  double focal_gamma = 2.0;
  double adafocal_lambda = 1.0;
  int n_bins = 15;
};

struct ModelRun {
  std::string name;  // "bce", "focal", "adafocal"
  TrainedModel model;
  Evaluation test;

  /// mean confidence - accuracy on the test split; negative means underconfident.
  [[nodiscard]] double confidence_gap() const { return test.report.mean_confidence - test.report.accuracy; }
};

/// The directional calibration comparison between the three losses.
struct Verdict {
  bool focal_underconfident = false;
  bool adafocal_underconfident = false;
  bool bce_gap_smaller_than_focal = false;
  double temperature_ece_reduction = 0.0;  // relative, on the focal model's test split

  [[nodiscard]] bool holds() const {
    return focal_underconfident && adafocal_underconfident && bce_gap_smaller_than_focal &&
           temperature_ece_reduction >= 0.2;
  }
};

struct ExperimentResult {
  ExperimentOptions options;
  DatasetSpec spec;
  std::vector<ModelRun> runs;  // bce, focal, adafocal
  calib::Temperature focal_temperature = calib::Temperature::scalar(1.0);
  calib::CalibrationReport focal_scaled_report;
  Verdict verdict;

  [[nodiscard]] const ModelRun& run(const std::string& name) const;
};

/// Trains BCE, FOCAL and ADAFOCAL on one default dataset, evaluates each on
/// the test split, fits a scalar temperature to the focal model's validation
/// logits and re-scores its test split.
ExperimentResult run_experiment(const ExperimentOptions& options);

/// Summary document: options, per-model gaps and reports, temperature and verdict.
nlohmann::json summary_to_json(const ExperimentResult& result);

}  // namespace fridge::trainer
