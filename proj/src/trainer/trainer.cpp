#include "fridge/trainer/trainer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fridge/calib/adafocal.hpp"
#include "fridge/calib/losses.hpp"
#include "fridge/calib/metrics.hpp"
#include "fridge/calib/temperature.hpp"

namespace fridge::trainer {

using calib::LogitVector;
using calib::LossKind;

LinearModel::LinearModel(std::size_t n_classes, std::size_t feature_dim)
    : weights_(n_classes, std::vector<double>(feature_dim + 1, 0.0)) {}

LinearModel::LinearModel(std::vector<std::vector<double>> weights) : weights_(std::move(weights)) {
  if (weights_.size() < 2) throw std::invalid_argument("model needs at least two classes");
  for (const auto& row : weights_) {
    if (row.size() != weights_[0].size() || row.size() < 2) throw std::invalid_argument("ragged weight matrix");
    for (double w : row) {
      if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight");
    }
  }
}

LogitVector LinearModel::logits(std::span<const double> x) const {
  if (x.size() != feature_dim()) {
    throw std::invalid_argument(fmt::format("feature dimension {} does not match model dimension {}", x.size(),
                                            feature_dim()));
  }
  std::vector<double> z(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const auto& row = weights_[k];
    double acc = row.back();
    for (std::size_t d = 0; d < x.size(); ++d) acc += row[d] * x[d];
    z[k] = acc;
  }
  return LogitVector(std::move(z));
}

DivergenceError::DivergenceError(int epoch)
    : std::runtime_error(fmt::format("training diverged at epoch {}", epoch)), epoch_(epoch) {}

namespace {

struct LossTerms {
  double loss;
  std::vector<double> grad;
};

double true_class_confidence(const LogitVector& z, std::size_t label) { return calib::softmax(z)[label]; }

double gamma_for_sample(const calib::LossConfig& config, const calib::AdaFocalState* ada, const LogitVector& z,
                        std::size_t label) {
  if (config.kind == LossKind::adafocal) return ada->gamma_for(true_class_confidence(z, label));
  return config.gamma;
}

double sample_loss(const calib::LossConfig& config, const calib::AdaFocalState* ada, const LogitVector& z,
                   std::size_t label) {
  if (config.kind == LossKind::bce) return calib::bce_loss(z, label);
  return calib::focal_loss(z, label, gamma_for_sample(config, ada, z, label));
}

std::vector<double> sample_grad(const calib::LossConfig& config, const calib::AdaFocalState* ada,
                                const LogitVector& z, std::size_t label) {
  if (config.kind == LossKind::bce) return calib::bce_loss_grad(z, label);
  return calib::focal_loss_grad(z, label, gamma_for_sample(config, ada, z, label));
}

// Logits for every example; non-finite logits mean the weights blew up.
std::vector<LogitVector> forward(const LinearModel& model, std::span<const LabeledExample> split, int epoch) {
  std::vector<LogitVector> out;
  out.reserve(split.size());
  try {
    for (const auto& ex : split) out.push_back(model.logits(ex.x));
  } catch (const std::invalid_argument&) {
    for (const auto& row : model.weights()) {
      for (double w : row) {
        if (!std::isfinite(w)) throw DivergenceError(epoch);
      }
    }
    throw;
  }
  return out;
}

double mean_loss(const calib::LossConfig& config, const calib::AdaFocalState* ada,
                 const std::vector<LogitVector>& logits, std::span<const LabeledExample> split, int epoch) {
  if (split.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < split.size(); ++i) total += sample_loss(config, ada, logits[i], split[i].y);
  const double mean = total / static_cast<double>(split.size());
  if (!std::isfinite(mean)) throw DivergenceError(epoch);
  return mean;
}

}  // namespace

TrainedModel train(const Dataset& data, const DatasetSpec& spec, const calib::LossConfig& loss,
                   const TrainOptions& options) {
  spec.validate();
  loss.validate();
  if (!(options.lr > 0.0) || !std::isfinite(options.lr)) throw std::invalid_argument("lr must be > 0");
  if (options.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (data.train.empty()) throw std::invalid_argument("empty training split");

  const std::size_t k = spec.n_classes();
  const std::size_t d = spec.feature_dim();

  TrainedModel result;
  result.model = LinearModel(k, d);
  result.loss_config = loss;
  result.dataset = spec;
  result.options = options;

  std::optional<calib::AdaFocalState> ada;
  if (loss.kind == LossKind::adafocal) ada = calib::AdaFocalState::from_config(loss);
  const calib::AdaFocalState* ada_ptr = ada ? &*ada : nullptr;

  const auto n = static_cast<double>(data.train.size());
  std::vector<std::vector<double>> grad_sum(k, std::vector<double>(d + 1));

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto logits = forward(result.model, data.train, epoch);

    for (auto& row : grad_sum) std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i < data.train.size(); ++i) {
      const auto& ex = data.train[i];
      const auto g = sample_grad(loss, ada_ptr, logits[i], ex.y);
      for (std::size_t c = 0; c < k; ++c) {
        auto& row = grad_sum[c];
        for (std::size_t j = 0; j < d; ++j) row[j] += g[c] * ex.x[j];
        row[d] += g[c];
      }
    }
    auto& weights = result.model.weights();
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j <= d; ++j) {
        weights[c][j] -= options.lr * (grad_sum[c][j] / n);
        if (!std::isfinite(weights[c][j])) throw DivergenceError(epoch);
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = mean_loss(loss, ada_ptr, forward(result.model, data.train, epoch), data.train, epoch);
    if (!data.val.empty()) {
      const auto val = evaluate(result, data.val);
      record.val_loss = mean_loss(loss, ada_ptr, val.logits, data.val, epoch);
      record.val_accuracy = val.accuracy;
      record.val_ece = val.report.ece;
      if (ada) {
        *ada = calib::adafocal_step(*ada, val.report);
        result.gamma_history.push_back(ada->gammas);
      }
    }
    result.curves.push_back(record);
  }
  return result;
}

calib::ProbVector predict_proba(calib::ProbMode mode, const LogitVector& logits,
                                const std::optional<calib::Temperature>& temperature) {
  const LogitVector scaled = temperature ? calib::scale_logits(logits, *temperature) : logits;
  return mode == calib::ProbMode::sigmoid ? calib::sigmoid(scaled) : calib::softmax(scaled);
}

Evaluation evaluate(const TrainedModel& model, std::span<const LabeledExample> split,
                    const std::optional<calib::Temperature>& temperature) {
  if (split.empty()) throw std::invalid_argument("evaluate: empty split");
  Evaluation out;
  std::vector<bool> correct;
  std::size_t hits = 0;
  for (const auto& ex : split) {
    if (ex.y >= model.model.n_classes()) throw std::invalid_argument("evaluate: label outside model classes");
    auto z = model.model.logits(ex.x);
    const auto probs = predict_proba(model.output_mode(), z, temperature);
    const auto pred = static_cast<std::size_t>(
        std::max_element(z.values().begin(), z.values().end()) - z.values().begin());
    out.predicted.push_back(pred);
    out.confidences.push_back(probs.max());
    out.labels.push_back(ex.y);
    correct.push_back(pred == ex.y);
    hits += pred == ex.y ? 1 : 0;
    out.logits.push_back(std::move(z));
  }
  out.accuracy = static_cast<double>(hits) / static_cast<double>(split.size());
  out.report = calib::reliability_bins(out.confidences, correct, model.loss_config.n_bins);
  return out;
}

}  // namespace fridge::trainer
