// fridge: broker, backend, device simulator, calibration experiment and
// report export behind one subcommand-style entry point.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "fridge/app/all_in_one.hpp"
#include "fridge/app/fleet.hpp"
#include "fridge/app/run_files.hpp"
#include "fridge/backend/service.hpp"
#include "fridge/broker/server.hpp"
#include "fridge/trainer/experiment.hpp"

namespace fs = std::filesystem;
using namespace fridge;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

void install_signal_handlers() {
  struct sigaction action {};
  action.sa_handler = on_signal;
  sigemptyset(&action.sa_mask);
  sigaction(SIGINT, &action, nullptr);
  sigaction(SIGTERM, &action, nullptr);
}

void wait_for_stop() {
  while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

struct Globals {
  std::uint64_t seed = 7;
  std::string log_level = "info";
  bool all_in_one = false;
};

struct BrokerFlags {
  std::string listen = "0.0.0.0:1884";
  std::size_t queue_capacity = 1024;
  int keepalive = 60;
};

struct BackendFlags {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string data_dir = "data/store";
  std::string catalog = "data/recipes.json";
  std::string broker = "127.0.0.1:1884";
  bool no_broker = false;
  std::string run_dir = "runs/latest";
  int token_ttl_hours = 24;
  bool sync = false;
};

struct SimulateFlags {
  int devices = 2;
  int cadence = 60;
  double acceleration = 1.0;
  std::string broker = "127.0.0.1:1884";
  std::string model;
  long minutes = -1;
};

struct ExperimentFlags {
  int epochs = 50;
  double lr = 0.1;
  double gamma = 2.0;
  double lambda = 1.0;
  int bins = 15;
  std::string out = "runs/latest";
};

struct ExportFlags {
  std::string run = "runs/latest";
  std::string format = "csv";
  std::string out;
};

backend::BackendOptions backend_options(const BackendFlags& f) {
  backend::BackendOptions o;
  o.data_dir = f.data_dir;
  o.catalog_path = f.catalog;
  if (f.no_broker) {
    o.broker.reset();
  } else {
    o.broker = net::Endpoint::parse(f.broker);
  }
  o.api.host = f.host;
  o.api.port = f.port;
  o.api.runs_dir = f.run_dir;
  o.auth.token_ttl = std::chrono::hours(f.token_ttl_hours);
  o.store.sync = f.sync;
  return o;
}

device::RunnerOptions runner_options(const SimulateFlags& f) {
  device::RunnerOptions o;
  o.acceleration = f.acceleration;
  o.cadence_seconds = f.cadence;
  return o;
}

std::optional<fs::path> model_path(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return fs::path(text);
}

int run_broker(const BrokerFlags& f) {
  broker::ServerOptions o;
  o.listen = net::Endpoint::parse(f.listen);
  o.broker.queue_capacity = f.queue_capacity;
  o.broker.keepalive = std::chrono::seconds(f.keepalive);
  broker::BrokerServer server(o);
  server.start();
  wait_for_stop();
  server.stop();
  return 0;
}

int run_backend(const BackendFlags& f) {
  backend::BackendService service(backend_options(f));
  service.start();
  spdlog::info("event=backend_ready http_port={}", service.http_port());
  wait_for_stop();
  service.stop();
  return 0;
}

int run_simulate(const Globals& g, const SimulateFlags& f) {
  app::FleetOptions o;
  o.devices = f.devices;
  o.seed = g.seed;
  o.runner = runner_options(f);
  app::Fleet fleet(o, app::deploy_model(model_path(f.model), g.seed));
  fleet.connect(net::Endpoint::parse(f.broker));
  fleet.run(f.minutes < 0 ? -1 : f.minutes * 60 / f.cadence, &g_stop);
  fleet.disconnect();
  return 0;
}

int run_all_in_one(const Globals& g, const BrokerFlags& bf, const BackendFlags& kf, const SimulateFlags& sf) {
  app::AllInOneOptions o;
  o.fleet.devices = sf.devices;
  o.fleet.seed = g.seed;
  o.fleet.runner = runner_options(sf);
  o.broker.listen = net::Endpoint::parse(bf.listen);
  o.broker.broker.queue_capacity = bf.queue_capacity;
  o.broker.broker.keepalive = std::chrono::seconds(bf.keepalive);
  o.backend = backend_options(kf);
  o.model_path = model_path(sf.model);
  app::AllInOne all(o);
  all.start();
  std::cout << fmt::format("broker on port {}, dashboard API on port {}", all.broker_port(), all.http_port())
            << std::endl;
  all.run(sf.minutes < 0 ? -1 : sf.minutes * 60 / sf.cadence, &g_stop);
  if (sf.minutes >= 0 && !g_stop.load()) {
    all.wait_ingested(static_cast<std::size_t>(sf.minutes * 60 / sf.cadence), std::chrono::seconds(10));
  }
  all.stop();
  return 0;
}

// Files an experiment may overwrite; anything else makes the directory unusable.
std::set<std::string> experiment_file_names() {
  std::set<std::string> names = {"temperature_fit.json", "summary.json"};
  for (const auto& m : app::kRunModels) {
    names.insert("model_" + m + ".json");
    names.insert("reliability_" + m + ".tsv");
  }
  return names;
}

int run_experiment(const Globals& g, const ExperimentFlags& f) {
  const fs::path out = f.out;
  if (fs::exists(out)) {
    const auto allowed = experiment_file_names();
    for (const auto& entry : fs::directory_iterator(out)) {
      if (allowed.count(entry.path().filename().string()) == 0) {
        throw std::runtime_error(fmt::format("{} already holds {}; choose an empty output directory", out.string(),
                                             entry.path().filename().string()));
      }
    }
  }
  trainer::ExperimentOptions o;
  o.seed = g.seed;
  o.epochs = f.epochs;
  o.lr = f.lr;
  o.focal_gamma = f.gamma;
  o.adafocal_lambda = f.lambda;
  o.n_bins = f.bins;
  const auto result = trainer::run_experiment(o);
  app::write_experiment(result, out);

  for (const auto& run : result.runs) {
    std::cout << fmt::format("{:<9} accuracy {:.4f}  confidence {:.4f}  gap {:+.4f}  ECE {:.4f}\n", run.name,
                             run.test.accuracy, run.test.report.mean_confidence, run.confidence_gap(),
                             run.test.report.ece);
  }
  std::cout << fmt::format("focal + temperature {:.4f}: ECE {:.4f} ({:.1f}% lower)\n",
                           result.focal_temperature.values()[0], result.focal_scaled_report.ece,
                           100.0 * result.verdict.temperature_ece_reduction);
  std::cout << fmt::format("verdict: {}\nwrote {}\n", result.verdict.holds() ? "holds" : "does not hold",
                           out.string());
  return 0;
}

int run_export(const ExportFlags& f) {
  const fs::path out = f.out.empty() ? fs::path(f.run) / "export" : fs::path(f.out);
  for (const auto& p : app::export_reports(f.run, app::export_format_from_string(f.format), out)) {
    std::cout << p.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Smart fridge monitoring: broker, backend, device simulator and calibration experiments", "fridge"};
  cli.require_subcommand(0, 1);

  Globals g;
  cli.add_option("--seed", g.seed, "Seed for every stochastic component")->capture_default_str();
  cli.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, critical or off")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
  cli.add_flag("--all-in-one", g.all_in_one,
               "Run broker, backend and simulated devices in one process (takes the flags of all three)");

  BrokerFlags bf;
  BackendFlags kf;
  SimulateFlags sf;
  ExperimentFlags ef;
  ExportFlags xf;

  // Flags shared with --all-in-one live on the top level too.
  auto add_broker_flags = [&](CLI::App& app) {
    app.add_option("--listen", bf.listen, "Broker listen address host:port")->capture_default_str();
    app.add_option("--queue-capacity", bf.queue_capacity, "Outbound frames buffered per session")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--keepalive", bf.keepalive, "Seconds of silence before a session is closed")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };
  auto add_backend_flags = [&](CLI::App& app, bool standalone) {
    app.add_option("--host", kf.host, "HTTP listen host")->capture_default_str();
    app.add_option("--port", kf.port, "HTTP listen port (0 picks one)")->capture_default_str()->check(CLI::Range(0, 65535));
    app.add_option("--data-dir", kf.data_dir, "Store directory")->capture_default_str();
    app.add_option("--catalog", kf.catalog, "Recipe catalog JSON")->capture_default_str();
    app.add_option("--run-dir", kf.run_dir, "Experiment output served by /api/calibration/report")
        ->capture_default_str();
    app.add_option("--token-ttl-hours", kf.token_ttl_hours, "Login token lifetime")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_flag("--sync", kf.sync, "fdatasync after every stored record");
    if (standalone) {
      app.add_option("--broker", kf.broker, "Broker address host:port")->capture_default_str();
      app.add_flag("--no-broker", kf.no_broker, "Serve HTTP only, without ingestion or settings delivery");
    }
  };
  auto add_device_flags = [&](CLI::App& app, bool standalone) {
    app.add_option("--devices", sf.devices, "Number of simulated fridges")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--cadence", sf.cadence, "Simulated seconds between updates")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--acceleration", sf.acceleration, "Simulated seconds per real second; 0 runs flat out")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app.add_option("--model", sf.model, "Model JSON from an experiment run (default: train one)");
    app.add_option("--minutes", sf.minutes, "Simulated minutes to run; negative runs until interrupted")
        ->capture_default_str();
    if (standalone) app.add_option("--broker", sf.broker, "Broker address host:port")->capture_default_str();
  };

  auto* broker_cmd = cli.add_subcommand("broker", "Run the publish/subscribe broker");
  add_broker_flags(*broker_cmd);

  auto* backend_cmd = cli.add_subcommand("backend", "Run the storage and HTTP backend");
  add_backend_flags(*backend_cmd, true);

  auto* simulate_cmd = cli.add_subcommand("simulate", "Run simulated fridges against a broker");
  add_device_flags(*simulate_cmd, true);

  auto* experiment_cmd = cli.add_subcommand("experiment", "Train BCE, focal and AdaFocal models and compare calibration");
  experiment_cmd->add_option("--epochs", ef.epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--lr", ef.lr, "Learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--gamma", ef.gamma, "Focal gamma")->capture_default_str()->check(CLI::Range(0.0, 20.0));
  experiment_cmd->add_option("--lambda", ef.lambda, "AdaFocal update rate")->capture_default_str()->check(CLI::NonNegativeNumber);
  experiment_cmd->add_option("--bins", ef.bins, "Reliability bins")->capture_default_str()->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--out", ef.out, "Output directory")->capture_default_str();

  auto* export_cmd = cli.add_subcommand("export", "Export the reliability reports of an experiment run");
  export_cmd->add_option("--run", xf.run, "Experiment output directory")->capture_default_str();
  export_cmd->add_option("--format", xf.format, "csv, tsv or json")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "tsv", "json"}));
  export_cmd->add_option("--out", xf.out, "Destination directory (default: <run>/export)");

  auto* all_group = cli.add_option_group("All-in-one", "Flags used with --all-in-one");
  add_broker_flags(*all_group);
  add_backend_flags(*all_group, false);
  add_device_flags(*all_group, false);

  try {
    cli.parse(argc, argv);
    const bool has_subcommand = !cli.get_subcommands().empty();
    if (g.all_in_one && has_subcommand) throw CLI::ValidationError("--all-in-one", "cannot be combined with a subcommand");
    if (!g.all_in_one && !has_subcommand) throw CLI::CallForHelp();
  } catch (const CLI::CallForHelp& e) {
    if (argc > 1) return cli.exit(e);
    std::cerr << cli.help();
    return kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e, std::cerr, std::cerr);
    return kExitUsage;
  }

  auto logger = spdlog::stderr_color_mt("fridge");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));
  install_signal_handlers();

  try {
    if (g.all_in_one) return run_all_in_one(g, bf, kf, sf);
    if (broker_cmd->parsed()) return run_broker(bf);
    if (backend_cmd->parsed()) return run_backend(kf);
    if (simulate_cmd->parsed()) return run_simulate(g, sf);
    if (experiment_cmd->parsed()) return run_experiment(g, ef);
    if (export_cmd->parsed()) return run_export(xf);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
