#include "fridge/calib/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace fridge::calib {

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw std::invalid_argument("logit vector needs at least two classes");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("logit vector contains a non-finite entry");
  }
}

ProbVector::ProbVector(std::vector<double> values, ProbMode mode)
    : values_(std::move(values)), mode_(mode) {
  if (values_.empty()) throw std::invalid_argument("empty probability vector");
  for (double p : values_) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0, 1]");
  }
  if (mode_ == ProbMode::softmax) {
    const double total = std::accumulate(values_.begin(), values_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument(fmt::format("softmax probabilities sum to {}", total));
    }
  }
}

std::size_t ProbVector::argmax() const noexcept {
  return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin());
}

double ProbVector::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::focal:
      return "focal";
    case LossKind::adafocal:
      return "adafocal";
    case LossKind::bce:
      return "bce";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "focal") return LossKind::focal;
  if (name == "adafocal") return LossKind::adafocal;
  if (name == "bce") return LossKind::bce;
  throw std::invalid_argument("unknown loss kind: " + name);
}

void LossConfig::validate() const {
  if (!std::isfinite(gamma) || gamma < 0.0) throw std::invalid_argument("gamma must be finite and >= 0");
  if (!std::isfinite(lambda) || lambda <= 0.0) throw std::invalid_argument("lambda must be finite and > 0");
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
  if (!(gamma_clamp.first <= gamma_clamp.second)) throw std::invalid_argument("gamma clamp low > high");
}

std::optional<double> CalibrationBin::gap() const {
  if (empty()) return std::nullopt;
  return *avg_confidence - *accuracy;
}

Temperature::Temperature(TemperatureMode mode, std::vector<double> values)
    : mode_(mode), values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("temperature needs at least one value");
  for (double t : values_) {
    if (!std::isfinite(t) || t <= 0.0) throw std::invalid_argument("temperature must be positive and finite");
  }
}

Temperature Temperature::scalar(double value) { return Temperature(TemperatureMode::scalar, {value}); }

Temperature Temperature::per_class(std::vector<double> values) {
  return Temperature(TemperatureMode::per_class, std::move(values));
}

double Temperature::for_class(std::size_t i) const {
  return mode_ == TemperatureMode::scalar ? values_.front() : values_.at(i);
}

LabelOutOfRange::LabelOutOfRange(std::size_t label, std::size_t n_classes)
    : std::out_of_range(fmt::format("label {} out of range for {} classes", label, n_classes)) {}

}  // namespace fridge::calib
