#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fridge::calib {

/// Raw per-class scores. At least two classes, every entry finite.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> values);
  LogitVector(std::initializer_list<double> values) : LogitVector(std::vector<double>(values)) {}

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_.at(i); }

  friend bool operator==(const LogitVector&, const LogitVector&) = default;

 private:
  std::vector<double> values_;
};

enum class ProbMode { softmax, sigmoid };

/// Class probabilities. In softmax mode the entries sum to one; in sigmoid
/// mode each entry is an independent one-vs-rest probability.
class ProbVector {
 public:
  ProbVector(std::vector<double> values, ProbMode mode);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_.at(i); }
  [[nodiscard]] ProbMode mode() const noexcept { return mode_; }

  [[nodiscard]] std::size_t argmax() const noexcept;
  [[nodiscard]] double max() const noexcept;

 private:
  std::vector<double> values_;
  ProbMode mode_;
};

enum class LossKind { focal, adafocal, bce };

[[nodiscard]] std::string to_string(LossKind kind);
[[nodiscard]] LossKind loss_kind_from_string(const std::string& name);

struct LossConfig {
  LossKind kind = LossKind::focal;
  double gamma = 2.0;   // focusing parameter; FOCAL uses it directly, ADAFOCAL as the initial per-bin value
  double lambda = 1.0;  // AdaFocal update rate
  int n_bins = 15;
  std::pair<double, double> gamma_clamp{0.0, 20.0};

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;

  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::optional<double> avg_confidence;  // empty when count == 0
  std::optional<double> accuracy;        // empty when count == 0

  [[nodiscard]] bool empty() const noexcept { return count == 0; }
  /// Signed confidence minus accuracy; nullopt for an empty bin.
  [[nodiscard]] std::optional<double> gap() const;

  friend bool operator==(const CalibrationBin&, const CalibrationBin&) = default;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double ece = 0.0;
  double mce = 0.0;
  double oce = 0.0;
  double uce = 0.0;
  std::size_t n_samples = 0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const CalibrationReport&, const CalibrationReport&) = default;
};

enum class TemperatureMode { scalar, per_class };

/// Positive, finite divisor applied to logits before the softmax.
class Temperature {
 public:
  static Temperature scalar(double value);
  static Temperature per_class(std::vector<double> values);

  [[nodiscard]] TemperatureMode mode() const noexcept { return mode_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  /// Divisor for class i (the single value in scalar mode).
  [[nodiscard]] double for_class(std::size_t i) const;

 private:
  Temperature(TemperatureMode mode, std::vector<double> values);

  TemperatureMode mode_;
  std::vector<double> values_;
};

class LabelOutOfRange : public std::out_of_range {
 public:
  LabelOutOfRange(std::size_t label, std::size_t n_classes);
};

}  // namespace fridge::calib
