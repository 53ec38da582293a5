#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fridge/calib/types.hpp"

namespace fridge::calib {

enum class FitErrorCode { not_identifiable, too_few_samples, invalid_input };

class FitError : public std::runtime_error {
 public:
  FitError(FitErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] FitErrorCode code() const noexcept { return code_; }

 private:
  FitErrorCode code_;
};

struct TemperatureFitOptions {
  double lower = 0.05;
  double upper = 20.0;
  double tolerance = 1e-4;
  int max_sweeps = 50;  // per-class coordinate descent
};

/// Mean negative log-likelihood of softmax(z / T) over the set.
double temperature_nll(std::span<const LogitVector> logits, std::span<const std::size_t> labels,
                       const Temperature& temperature);

/// Fit a temperature minimizing mean NLL. Scalar mode uses golden-section
/// search on [lower, upper]; per-class mode runs coordinate-wise
/// golden-section sweeps until no coordinate moves more than the tolerance.
///
/// Throws FitError: not_identifiable when every label is the same class,
/// too_few_samples when N < number of classes.
Temperature fit_temperature(std::span<const LogitVector> logits, std::span<const std::size_t> labels,
                            TemperatureMode mode, const TemperatureFitOptions& options = {});

/// softmax(z ./ T). Scalar T keeps the argmax.
ProbVector apply_temperature(const LogitVector& logits, const Temperature& temperature);

/// Logits divided element-wise by the temperature.
LogitVector scale_logits(const LogitVector& logits, const Temperature& temperature);

}  // namespace fridge::calib
