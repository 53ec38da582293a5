#include "fridge/trainer/experiment.hpp"

#include <cmath>
#include <stdexcept>

#include "fridge/calib/report_io.hpp"
#include "fridge/calib/temperature.hpp"

namespace fridge::trainer {

const ModelRun& ExperimentResult::run(const std::string& name) const {
  for (const auto& r : runs) {
    if (r.name == name) return r;
  }
  throw std::out_of_range("no model run named " + name);
}

ExperimentResult run_experiment(const ExperimentOptions& options) {
  ExperimentResult result;
  result.options = options;
  result.spec = default_dataset_spec(options.seed);
  const auto data = generate_dataset(result.spec);
  const TrainOptions train_options{options.epochs, options.lr};

  auto config_for = [&](calib::LossKind kind) {
    calib::LossConfig config;
    config.kind = kind;
    config.gamma = options.focal_gamma;
    config.lambda = options.adafocal_lambda;
    config.n_bins = options.n_bins;
    return config;
  };

  for (auto kind : {calib::LossKind::bce, calib::LossKind::focal, calib::LossKind::adafocal}) {
    ModelRun run;
    run.name = calib::to_string(kind);
    run.model = train(data, result.spec, config_for(kind), train_options);
    run.test = evaluate(run.model, data.test);
    result.runs.push_back(std::move(run));
  }

  const auto& focal = result.run("focal");
  const auto val = evaluate(focal.model, data.val);
  result.focal_temperature = calib::fit_temperature(val.logits, val.labels, calib::TemperatureMode::scalar);
  result.focal_scaled_report = evaluate(focal.model, data.test, result.focal_temperature).report;

  const auto& bce = result.run("bce");
  const auto& ada = result.run("adafocal");
  auto& v = result.verdict;
  v.focal_underconfident = focal.test.report.mean_confidence < focal.test.report.accuracy;
  v.adafocal_underconfident = ada.test.report.mean_confidence < ada.test.report.accuracy;
  v.bce_gap_smaller_than_focal = std::abs(bce.confidence_gap()) < std::abs(focal.confidence_gap());
  const double before = focal.test.report.ece;
  v.temperature_ece_reduction = before > 0.0 ? (before - result.focal_scaled_report.ece) / before : 0.0;
  return result;
}

nlohmann::json summary_to_json(const ExperimentResult& result) {
  nlohmann::json models = nlohmann::json::object();
  for (const auto& run : result.runs) {
    models[run.name] = {{"loss", calib::loss_config_to_json(run.model.loss_config)},
                        {"test_accuracy", run.test.accuracy},
                        {"test_mean_confidence", run.test.report.mean_confidence},
                        {"confidence_gap", run.confidence_gap()},
                        {"direction", run.confidence_gap() < 0.0 ? "underconfident" : "overconfident"},
                        {"report", calib::report_to_json(run.test.report)}};
  }
  models["focal+temperature"] = {{"report", calib::report_to_json(result.focal_scaled_report)}};

  const auto& v = result.verdict;
  return {{"seed", result.options.seed},
          {"epochs", result.options.epochs},
          {"lr", result.options.lr},
          {"n_bins", result.options.n_bins},
          {"models", std::move(models)},
          {"temperature", calib::temperature_to_json(result.focal_temperature)},
          {"verdict",
           {{"focal_underconfident", v.focal_underconfident},
            {"adafocal_underconfident", v.adafocal_underconfident},
            {"bce_gap_smaller_than_focal", v.bce_gap_smaller_than_focal},
            {"temperature_ece_reduction", v.temperature_ece_reduction},
            {"holds", v.holds()}}}};
}

}  // namespace fridge::trainer
