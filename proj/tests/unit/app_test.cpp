#include <sys/wait.h>

#include <fstream>
#include <set>

#include "doctest.h"
#include "pipeline.hpp"
#include "temp_dir.hpp"
#include "fridge/app/fleet.hpp"
#include "fridge/app/run_files.hpp"
#include "fridge/calib/report_io.hpp"
#include "fridge/trainer/model_io.hpp"

using namespace fridge;
using fridge::testing::TempDir;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::set<std::string> names_in(const fs::path& dir) {
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
  return names;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl - start));
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  return lines;
}

// Exit status of the CLI run with `args`; output goes to `log`.
int run_cli(const std::string& args, const fs::path& log) {
  const auto command = fmt::format("'{}' {} >'{}' 2>&1", FRIDGE_CLI_PATH, args, log.string());
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

trainer::ExperimentOptions quick_options() {
  trainer::ExperimentOptions o;
  o.epochs = 5;
  return o;
}

}  // namespace

TEST_CASE("experiment output holds exactly the expected files") {
  TempDir dir;
  const auto result = trainer::run_experiment(quick_options());
  const auto written = app::write_experiment(result, dir.path() / "run");
  CHECK(written.size() == 8);
  CHECK(names_in(dir.path() / "run") ==
        std::set<std::string>{"model_bce.json", "model_focal.json", "model_adafocal.json", "reliability_bce.tsv",
                              "reliability_focal.tsv", "reliability_adafocal.tsv", "temperature_fit.json",
                              "summary.json"});

  const auto summary = nlohmann::json::parse(slurp(dir.path() / "run" / "summary.json"));
  CHECK(summary["verdict"].contains("holds"));
  CHECK(summary["models"].contains("focal"));
  const auto fit = nlohmann::json::parse(slurp(dir.path() / "run" / "temperature_fit.json"));
  CHECK(fit["fit_split"] == "val");
  CHECK(fit["temperature"] == calib::temperature_to_json(result.focal_temperature));

  const auto model = trainer::load_model(dir.path() / "run" / "model_focal.json");
  CHECK(model == result.run("focal").model);

  SUBCASE("writing the same result again gives identical bytes") {
    app::write_experiment(trainer::run_experiment(quick_options()), dir.path() / "again");
    for (const auto& name : names_in(dir.path() / "run")) {
      CHECK_MESSAGE(slurp(dir.path() / "run" / name) == slurp(dir.path() / "again" / name), name);
    }
  }

  SUBCASE("export writes one table per model with a row per bin") {
    for (const auto format : {app::ExportFormat::csv, app::ExportFormat::tsv}) {
      const auto files = app::export_reports(dir.path() / "run", format, dir.path() / "export");
      REQUIRE(files.size() == 3);
      for (const auto& f : files) {
        const auto lines = lines_of(slurp(f));
        REQUIRE(lines.size() == 16);
        const char sep = format == app::ExportFormat::csv ? ',' : '\t';
        for (std::size_t i = 1; i < lines.size(); ++i) CHECK(std::count(lines[i].begin(), lines[i].end(), sep) == 4);
      }
    }
    const auto json_files = app::export_reports(dir.path() / "run", app::ExportFormat::json, dir.path() / "json");
    REQUIRE(json_files.size() == 3);
    CHECK(nlohmann::json::parse(slurp(json_files[1]))["bins"].size() == 15);
  }

  SUBCASE("export of a missing run fails") {
    CHECK_THROWS_AS(app::export_reports(dir.path() / "nothing", app::ExportFormat::csv, dir.path() / "x"),
                    std::runtime_error);
    CHECK_THROWS_AS(app::export_format_from_string("xml"), std::invalid_argument);
  }
}

TEST_CASE("deployed models") {
  const auto trained = app::deploy_model(std::nullopt, 7, 5);
  REQUIRE(trained.model);
  CHECK(trained.temperature.has_value());
  CHECK(trained.model->loss_config.kind == calib::LossKind::focal);

  TempDir dir;
  trainer::save_model(*trained.model, dir.path() / "m.json");
  const auto loaded = app::deploy_model(dir.path() / "m.json", 7);
  CHECK(*loaded.model == *trained.model);
  CHECK_FALSE(loaded.temperature.has_value());
  CHECK(app::fleet_device_id(0) == "fridge-1");
}

TEST_CASE("command line") {
  TempDir dir;
  const auto log = dir.path() / "log.txt";

  CHECK(run_cli("", log) == 1);
  CHECK(slurp(log).find("Usage") != std::string::npos);
  CHECK(run_cli("--no-such-flag", log) == 1);
  CHECK(run_cli("experiment --epochs zero", log) == 1);
  CHECK(run_cli("export --format xml", log) == 1);
  CHECK(run_cli("--all-in-one broker", log) == 1);
  CHECK(run_cli("--help", log) == 0);
  CHECK(run_cli(fmt::format("export --run '{}'", (dir.path() / "missing").string()), log) == 2);

  const auto a = dir.path() / "a";
  const auto b = dir.path() / "b";
  REQUIRE(run_cli(fmt::format("--seed 7 experiment --epochs 50 --out '{}'", a.string()), log) == 0);
  REQUIRE(run_cli(fmt::format("--seed 7 experiment --epochs 50 --out '{}'", b.string()), log) == 0);
  CHECK(names_in(a).size() == 8);
  for (const auto& name : names_in(a)) CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);

  // Rerunning into the same directory is fine; a directory with other files is not.
  CHECK(run_cli(fmt::format("--seed 7 experiment --out '{}'", a.string()), log) == 0);
  std::ofstream(dir.path() / "other.txt") << "x";
  CHECK(run_cli(fmt::format("experiment --out '{}'", dir.path().string()), log) == 2);

  REQUIRE(run_cli(fmt::format("export --run '{}' --format csv", a.string()), log) == 0);
  for (const auto& model : {"bce", "focal", "adafocal"}) {
    const auto lines = lines_of(slurp(a / "export" / (std::string(model) + ".csv")));
    CHECK(lines.size() == 16);  // header + n_bins
  }
  CHECK(names_in(a / "export").size() == 3);

  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary["seed"] == 7);
  CHECK(summary["epochs"] == 50);

  SUBCASE("all-in-one runs a fixed number of minutes and exits") {
    const auto store = dir.path() / "store";
    REQUIRE(run_cli(fmt::format("--all-in-one --minutes 3 --acceleration 0 --listen 127.0.0.1:0 --port 0 "
                                "--data-dir '{}' --catalog '{}/data/recipes.json' --log-level off",
                                store.string(), FRIDGE_SOURCE_DIR),
                    log) == 0);
    CHECK(lines_of(slurp(store / "fridgestats.jsonl")).size() == 6);
  }
}

TEST_CASE("end-to-end pipeline") {
  const auto outcome = testing::run_pipeline(fs::path(FRIDGE_SOURCE_DIR) / "data" / "recipes.json");
  for (const auto& v : outcome.violations) CHECK_MESSAGE(false, v);
  CHECK(outcome.total_images == 120);
  CHECK(outcome.total_counts == 120);
  CHECK(outcome.total_fridgestats == 120);
  CHECK(std::abs(outcome.final_temperature - 1.0) <= 1.0);
}
