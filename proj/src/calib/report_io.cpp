#include "fridge/calib/report_io.hpp"

#include <fmt/format.h>

namespace fridge::calib {

std::string report_to_table(const CalibrationReport& report, TableFormat format) {
  const char sep = format == TableFormat::tsv ? '\t' : ',';
  std::string out = format == TableFormat::tsv ? "# " : "";
  out += fmt::format("lo{0}hi{0}count{0}avg_confidence{0}accuracy\n", sep);
  for (const auto& bin : report.bins) {
    out += fmt::format("{:.17g}{}{:.17g}{}{}{}", bin.lo, sep, bin.hi, sep, bin.count, sep);
    if (bin.empty()) {
      out += fmt::format("-{}-\n", sep);
    } else {
      out += fmt::format("{:.17g}{}{:.17g}\n", *bin.avg_confidence, sep, *bin.accuracy);
    }
  }
  return out;
}

nlohmann::json report_to_json(const CalibrationReport& report) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& bin : report.bins) {
    nlohmann::json b{{"lo", bin.lo}, {"hi", bin.hi}, {"count", bin.count}, {"empty", bin.empty()}};
    b["avg_confidence"] = bin.avg_confidence ? nlohmann::json(*bin.avg_confidence) : nlohmann::json(nullptr);
    b["accuracy"] = bin.accuracy ? nlohmann::json(*bin.accuracy) : nlohmann::json(nullptr);
    bins.push_back(std::move(b));
  }
  return {{"n_samples", report.n_samples},
          {"n_bins", report.bins.size()},
          {"ece", report.ece},
          {"mce", report.mce},
          {"oce", report.oce},
          {"uce", report.uce},
          {"mean_confidence", report.mean_confidence},
          {"accuracy", report.accuracy},
          {"bins", std::move(bins)}};
}

CalibrationReport report_from_json(const nlohmann::json& j) {
  CalibrationReport report;
  report.n_samples = j.at("n_samples").get<std::size_t>();
  report.ece = j.at("ece").get<double>();
  report.mce = j.at("mce").get<double>();
  report.oce = j.at("oce").get<double>();
  report.uce = j.at("uce").get<double>();
  report.mean_confidence = j.at("mean_confidence").get<double>();
  report.accuracy = j.at("accuracy").get<double>();
  for (const auto& b : j.at("bins")) {
    CalibrationBin bin;
    bin.lo = b.at("lo").get<double>();
    bin.hi = b.at("hi").get<double>();
    bin.count = b.at("count").get<std::size_t>();
    if (!b.at("avg_confidence").is_null()) bin.avg_confidence = b.at("avg_confidence").get<double>();
    if (!b.at("accuracy").is_null()) bin.accuracy = b.at("accuracy").get<double>();
    report.bins.push_back(bin);
  }
  return report;
}

nlohmann::json loss_config_to_json(const LossConfig& config) {
  return {{"kind", to_string(config.kind)},
          {"gamma", config.gamma},
          {"lambda", config.lambda},
          {"n_bins", config.n_bins},
          {"gamma_clamp", {config.gamma_clamp.first, config.gamma_clamp.second}}};
}

LossConfig loss_config_from_json(const nlohmann::json& j) {
  LossConfig config;
  config.kind = loss_kind_from_string(j.at("kind").get<std::string>());
  config.gamma = j.at("gamma").get<double>();
  config.lambda = j.at("lambda").get<double>();
  config.n_bins = j.at("n_bins").get<int>();
  const auto& clamp = j.at("gamma_clamp");
  config.gamma_clamp = {clamp.at(0).get<double>(), clamp.at(1).get<double>()};
  config.validate();
  return config;
}

nlohmann::json temperature_to_json(const Temperature& temperature) {
  const auto values = temperature.values();
  return {{"mode", temperature.mode() == TemperatureMode::scalar ? "scalar" : "per_class"},
          {"values", std::vector<double>(values.begin(), values.end())}};
}

Temperature temperature_from_json(const nlohmann::json& j) {
  const auto mode = j.at("mode").get<std::string>();
  auto values = j.at("values").get<std::vector<double>>();
  if (mode == "scalar") {
    if (values.size() != 1) throw std::invalid_argument("scalar temperature needs exactly one value");
    return Temperature::scalar(values.front());
  }
  if (mode == "per_class") return Temperature::per_class(std::move(values));
  throw std::invalid_argument("unknown temperature mode: " + mode);
}

}  // namespace fridge::calib
