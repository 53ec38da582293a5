#include "fridge/app/run_files.hpp"

#include <fstream>
#include <stdexcept>

#include "fridge/calib/report_io.hpp"
#include "fridge/trainer/model_io.hpp"

namespace fridge::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace

json temperature_fit_to_json(const trainer::ExperimentResult& result) {
  const auto& focal = result.run("focal");
  return {{"model", "focal"},
          {"fit_split", "val"},
          {"eval_split", "test"},
          {"temperature", calib::temperature_to_json(result.focal_temperature)},
          {"test_ece_before", focal.test.report.ece},
          {"test_ece_after", result.focal_scaled_report.ece},
          {"ece_reduction", result.verdict.temperature_ece_reduction}};
}

std::vector<fs::path> write_experiment(const trainer::ExperimentResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const auto& name : kRunModels) {
    const auto path = out_dir / ("model_" + name + ".json");
    trainer::save_model(result.run(name).model, path);
    written.push_back(path);
  }
  for (const auto& name : kRunModels) {
    const auto path = out_dir / ("reliability_" + name + ".tsv");
    write_text(path, calib::report_to_table(result.run(name).test.report, calib::TableFormat::tsv));
    written.push_back(path);
  }
  written.push_back(out_dir / "temperature_fit.json");
  write_text(written.back(), temperature_fit_to_json(result).dump(2) + "\n");
  written.push_back(out_dir / "summary.json");
  write_text(written.back(), trainer::summary_to_json(result).dump(2) + "\n");
  return written;
}

ExportFormat export_format_from_string(const std::string& text) {
  if (text == "csv") return ExportFormat::csv;
  if (text == "tsv") return ExportFormat::tsv;
  if (text == "json") return ExportFormat::json;
  throw std::invalid_argument("unknown export format: " + text);
}

std::vector<fs::path> export_reports(const fs::path& run_dir, ExportFormat format, const fs::path& out_dir) {
  const auto summary = read_json(run_dir / "summary.json");
  if (!summary.contains("models") || !summary["models"].is_object()) {
    throw std::runtime_error(run_dir.string() + "/summary.json has no models");
  }
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const auto& name : kRunModels) {
    const auto& models = summary["models"];
    if (!models.contains(name) || !models[name].contains("report")) {
      throw std::runtime_error("summary.json has no report for " + name);
    }
    calib::CalibrationReport report;
    try {
      report = calib::report_from_json(models[name]["report"]);
    } catch (const std::exception& e) {
      throw std::runtime_error("bad report for " + name + ": " + e.what());
    }
    switch (format) {
      case ExportFormat::csv:
        written.push_back(out_dir / (name + ".csv"));
        write_text(written.back(), calib::report_to_table(report, calib::TableFormat::csv));
        break;
      case ExportFormat::tsv:
        written.push_back(out_dir / (name + ".tsv"));
        write_text(written.back(), calib::report_to_table(report, calib::TableFormat::tsv));
        break;
      case ExportFormat::json:
        written.push_back(out_dir / (name + ".json"));
        write_text(written.back(), calib::report_to_json(report).dump(2) + "\n");
        break;
    }
  }
  return written;
}

}  // namespace fridge::app
