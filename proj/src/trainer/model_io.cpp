#include "fridge/trainer/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include "fridge/calib/report_io.hpp"

namespace fridge::trainer {

nlohmann::json curves_to_json(const std::vector<EpochRecord>& curves) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : curves) {
    out.push_back({{"epoch", r.epoch},
                   {"train_loss", r.train_loss},
                   {"val_loss", r.val_loss},
                   {"val_accuracy", r.val_accuracy},
                   {"val_ece", r.val_ece}});
  }
  return out;
}

nlohmann::json model_to_json(const TrainedModel& model) {
  return {{"format", "fridge-linear-model"},
          {"version", kModelFormatVersion},
          {"output", model.output_mode() == calib::ProbMode::sigmoid ? "sigmoid" : "softmax"},
          {"loss", calib::loss_config_to_json(model.loss_config)},
          {"train", {{"epochs", model.options.epochs}, {"lr", model.options.lr}}},
          {"dataset", dataset_spec_to_json(model.dataset)},
          {"weights", model.model.weights()},
          {"gamma_history", model.gamma_history},
          {"curves", curves_to_json(model.curves)}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "fridge-linear-model") throw std::invalid_argument("not a fridge model document");
  if (j.value("version", 0) != kModelFormatVersion) {
    throw std::invalid_argument("unsupported model version " + j.value("version", nlohmann::json()).dump());
  }
  TrainedModel model;
  model.loss_config = calib::loss_config_from_json(j.at("loss"));
  model.dataset = dataset_spec_from_json(j.at("dataset"));
  model.options.epochs = j.at("train").at("epochs").get<int>();
  model.options.lr = j.at("train").at("lr").get<double>();
  model.model = LinearModel(j.at("weights").get<std::vector<std::vector<double>>>());
  if (model.model.n_classes() != model.dataset.n_classes() || model.model.feature_dim() != model.dataset.feature_dim()) {
    throw std::invalid_argument("model weights do not match the dataset parameters");
  }
  model.gamma_history = j.value("gamma_history", std::vector<std::vector<double>>{});
  for (const auto& r : j.value("curves", nlohmann::json::array())) {
    model.curves.push_back({r.at("epoch").get<int>(), r.at("train_loss").get<double>(), r.at("val_loss").get<double>(),
                            r.at("val_accuracy").get<double>(), r.at("val_ece").get<double>()});
  }
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return model_from_json(nlohmann::json::parse(in));
}

}  // namespace fridge::trainer
