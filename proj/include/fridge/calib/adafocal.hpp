#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fridge/calib/types.hpp"

namespace fridge::calib {

/// Per-confidence-bin focusing parameters, updated once per epoch from a
/// validation reliability report.
struct AdaFocalState {
  int t = 0;
  std::vector<double> gammas;
  double lambda = 1.0;
  std::pair<double, double> clamp{0.0, 20.0};

  /// All bins start at config.gamma.
  static AdaFocalState from_config(const LossConfig& config);

  /// Focusing parameter for a sample whose true-class confidence is `confidence`.
  [[nodiscard]] double gamma_for(double confidence) const;

  friend bool operator==(const AdaFocalState&, const AdaFocalState&) = default;
};

/// gamma_b <- clamp(gamma_b * exp(lambda * (C_b - A_b))) for each non-empty
/// bin; empty bins keep their value. Advances t.
/// Throws std::invalid_argument when the report's bin count differs.
AdaFocalState adafocal_step(const AdaFocalState& state, const CalibrationReport& val_report);

}  // namespace fridge::calib
