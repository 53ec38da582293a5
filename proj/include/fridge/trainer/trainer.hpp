#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fridge/calib/types.hpp"
#include "fridge/trainer/dataset.hpp"

namespace fridge::trainer {

/// Logits z = W [x; 1], one row of W per class.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(std::size_t n_classes, std::size_t feature_dim);
  explicit LinearModel(std::vector<std::vector<double>> weights);

  [[nodiscard]] calib::LogitVector logits(std::span<const double> x) const;
  [[nodiscard]] std::size_t n_classes() const noexcept { return weights_.size(); }
  [[nodiscard]] std::size_t feature_dim() const noexcept { return weights_.empty() ? 0 : weights_[0].size() - 1; }
  [[nodiscard]] const std::vector<std::vector<double>>& weights() const noexcept { return weights_; }
  std::vector<std::vector<double>>& weights() noexcept { return weights_; }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;

 private:
  std::vector<std::vector<double>> weights_;  // [K][D + 1], last column is the bias
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_ece = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainOptions {
  int epochs = 50;
  double lr = 0.1;

  friend bool operator==(const TrainOptions&, const TrainOptions&) = default;
};

struct TrainedModel {
  LinearModel model;
  calib::LossConfig loss_config;
  DatasetSpec dataset;
  TrainOptions options;
  std::vector<EpochRecord> curves;
  /// AdaFocal only: per-bin gammas after each epoch's update.
  std::vector<std::vector<double>> gamma_history;

  /// BCE heads produce independent sigmoid scores; the focal variants a softmax.
  [[nodiscard]] calib::ProbMode output_mode() const noexcept {
    return loss_config.kind == calib::LossKind::bce ? calib::ProbMode::sigmoid : calib::ProbMode::softmax;
  }
  [[nodiscard]] const std::vector<std::string>& class_names() const noexcept { return dataset.class_names; }

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(int epoch);
  [[nodiscard]] int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Full-batch gradient descent from zero weights. Each epoch applies
///   W <- W - lr * (1/N) sum_n g_n [x_n; 1]^T
/// where g_n is the loss gradient with respect to the logits. ADAFOCAL picks
/// each sample's gamma from the bin of its current true-class confidence and
/// updates the per-bin gammas from the validation report after every epoch.
///
/// Throws DivergenceError when the loss or any weight becomes non-finite.
TrainedModel train(const Dataset& data, const DatasetSpec& spec, const calib::LossConfig& loss,
                   const TrainOptions& options = {});

struct Evaluation {
  std::vector<calib::LogitVector> logits;
  std::vector<std::size_t> labels;
  std::vector<std::size_t> predicted;
  std::vector<double> confidences;
  double accuracy = 0.0;
  calib::CalibrationReport report;
};

/// Class probabilities for one logit vector under the model's output mode,
/// with the logits divided by `temperature` first when one is given.
calib::ProbVector predict_proba(calib::ProbMode mode, const calib::LogitVector& logits,
                                const std::optional<calib::Temperature>& temperature = std::nullopt);

/// Predicted class = argmax of the logits, confidence = largest probability.
/// Throws std::invalid_argument when an example's dimension does not match.
Evaluation evaluate(const TrainedModel& model, std::span<const LabeledExample> split,
                    const std::optional<calib::Temperature>& temperature = std::nullopt);

}  // namespace fridge::trainer
