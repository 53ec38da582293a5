#include "fridge/calib/temperature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "fridge/calib/losses.hpp"

namespace fridge::calib {
namespace {

void check_inputs(std::span<const LogitVector> logits, std::span<const std::size_t> labels) {
  if (logits.size() != labels.size()) {
    throw FitError(FitErrorCode::invalid_input, "logits and labels differ in length");
  }
  if (logits.empty()) throw FitError(FitErrorCode::too_few_samples, "no samples");
  const std::size_t k = logits.front().size();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i].size() != k) throw FitError(FitErrorCode::invalid_input, "inconsistent class count");
    if (labels[i] >= k) throw FitError(FitErrorCode::invalid_input, fmt::format("label {} out of range", labels[i]));
  }
}

// Golden-section minimum of a unimodal function on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace

double temperature_nll(std::span<const LogitVector> logits, std::span<const std::size_t> labels,
                       const Temperature& temperature) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    total += cross_entropy(scale_logits(logits[i], temperature), labels[i]);
  }
  return total / static_cast<double>(logits.size());
}

Temperature fit_temperature(std::span<const LogitVector> logits, std::span<const std::size_t> labels,
                            TemperatureMode mode, const TemperatureFitOptions& options) {
  check_inputs(logits, labels);
  const std::size_t k = logits.front().size();
  if (logits.size() < k) {
    throw FitError(FitErrorCode::too_few_samples,
                   fmt::format("need at least {} samples, got {}", k, logits.size()));
  }
  if (std::all_of(labels.begin(), labels.end(), [&](std::size_t y) { return y == labels.front(); })) {
    // Every sample shares one label: the NLL keeps falling as T -> 0 when
    // that class is the argmax, so there is no interior optimum.
    throw FitError(FitErrorCode::not_identifiable, "all labels belong to a single class");
  }

  if (mode == TemperatureMode::scalar) {
    const double t = golden_section(
        [&](double value) { return temperature_nll(logits, labels, Temperature::scalar(value)); }, options.lower,
        options.upper, options.tolerance);
    return Temperature::scalar(t);
  }

  std::vector<double> values(k, 1.0);
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double largest_move = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      auto objective = [&](double value) {
        auto trial = values;
        trial[c] = value;
        return temperature_nll(logits, labels, Temperature::per_class(std::move(trial)));
      };
      const double best = golden_section(objective, options.lower, options.upper, options.tolerance);
      largest_move = std::max(largest_move, std::abs(best - values[c]));
      values[c] = best;
    }
    if (largest_move <= options.tolerance) break;
  }
  return Temperature::per_class(std::move(values));
}

LogitVector scale_logits(const LogitVector& logits, const Temperature& temperature) {
  if (temperature.mode() == TemperatureMode::per_class && temperature.values().size() != logits.size()) {
    throw std::invalid_argument("per-class temperature does not match class count");
  }
  std::vector<double> scaled(logits.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = logits[i] / temperature.for_class(i);
  return LogitVector(std::move(scaled));
}

ProbVector apply_temperature(const LogitVector& logits, const Temperature& temperature) {
  return softmax(scale_logits(logits, temperature));
}

}  // namespace fridge::calib
