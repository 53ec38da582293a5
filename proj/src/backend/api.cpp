#include "fridge/backend/api.hpp"

#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "httplib.h"

namespace fridge::backend {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

/// Thrown inside handlers to end the request with an error response.
struct HttpError {
  int status;
  std::string message;
};

std::string required_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name) || req.get_param_value(name).empty()) {
    throw HttpError{400, fmt::format("query parameter '{}' is required", name)};
  }
  return req.get_param_value(name);
}

json json_body(const httplib::Request& req) {
  auto j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw HttpError{400, "request body must be a JSON object"};
  return j;
}

std::string string_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw HttpError{400, fmt::format("field '{}' must be a string", key)};
  return it->get<std::string>();
}

std::string bearer_token(const httplib::Request& req) {
  const auto header = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  if (header.rfind(prefix, 0) != 0) return {};
  return header.substr(prefix.size());
}

Timestamp time_param(const httplib::Request& req, const char* name, Timestamp fallback) {
  if (!req.has_param(name)) return fallback;
  const auto t = parse_timestamp(req.get_param_value(name));
  if (!t) throw HttpError{400, fmt::format("'{}' must be an ISO-8601 UTC time like 2025-01-01T00:00:00Z", name)};
  return *t;
}

}  // namespace

struct ApiServer::Impl {
  Store& store;
  AuthService& auth;
  Catalog catalog;
  SettingsPublisher publisher;
  ApiOptions options;
  httplib::Server server;
  std::thread thread;

  Impl(Store& s, AuthService& a, Catalog c, SettingsPublisher p, ApiOptions o)
      : store(s), auth(a), catalog(std::move(c)), publisher(std::move(p)), options(std::move(o)) {}

  template <typename Handler>
  httplib::Server::Handler wrap(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const HttpError& e) {
        send_error(res, e.status, e.message);
      } catch (const AuthError& e) {
        send_error(res, e.status(), e.what());
      } catch (const std::invalid_argument& e) {
        send_error(res, 400, e.what());
      } catch (const std::exception& e) {
        spdlog::error("event=http_error method={} path={} error=\"{}\"", req.method, req.path, e.what());
        send_error(res, 500, "internal error");
      }
    };
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      spdlog::debug("event=http method={} path={} status={}", req.method, req.path, res.status);
    });

    server.Post("/api/auth/register", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json_body(req);
      const auto username = string_field(body, "username");
      auth.register_user(username, string_field(body, "password"));
      send_json(res, 201, json{{"username", username}});
    }));

    server.Post("/api/auth/login", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json_body(req);
      const auto login = auth.login(string_field(body, "username"), string_field(body, "password"));
      const auto expires = std::chrono::duration_cast<std::chrono::seconds>(
                               login.session.expires_at.time_since_epoch())
                               .count();
      send_json(res, 200,
                json{{"token", login.token}, {"username", login.session.username},
                     {"expiresAt", format_timestamp(expires)}});
    }));

    server.Post("/api/auth/logout", wrap([this](const httplib::Request& req, httplib::Response& res) {
      auth.logout(bearer_token(req));
      res.status = 204;
    }));

    server.Get("/api/latest/image", wrap([this](const httplib::Request& req, httplib::Response& res) {
      latest(req, res, Collection::images);
    }));
    server.Get("/api/latest/counts", wrap([this](const httplib::Request& req, httplib::Response& res) {
      latest(req, res, Collection::counts);
    }));

    server.Get("/api/fridgestats", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto device_id = required_param(req, "device");
      const auto from = time_param(req, "from", std::numeric_limits<Timestamp>::min());
      const auto to = time_param(req, "to", std::numeric_limits<Timestamp>::max());
      std::size_t limit = options.default_range_limit;
      if (req.has_param("limit")) {
        try {
          const auto value = std::stoll(req.get_param_value("limit"));
          if (value < 1) throw HttpError{400, "limit must be at least 1"};
          limit = std::min(static_cast<std::size_t>(value), options.max_range_limit);
        } catch (const std::logic_error&) {
          throw HttpError{400, "limit must be an integer"};
        }
      }
      if (from > to) throw HttpError{400, "'from' is after 'to'"};
      const auto range = store.query_range(Collection::fridgestats, device_id, from, to, limit);
      send_json(res, 200, json{{"device", device_id}, {"records", range.records}, {"truncated", range.truncated}});
    }));

    server.Post("/api/settings", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto session = auth.validate(bearer_token(req));
      if (!session) throw HttpError{401, "missing, invalid or expired token"};
      const auto body = json_body(req);
      const auto device_id = string_field(body, "device");
      if (device_id.empty() || device_id.find_first_of("/+#") != std::string::npos) {
        throw HttpError{400, "device must be a plain device id"};
      }
      device::Setpoints setpoints;
      try {
        setpoints = device::setpoints_from_json(body);
      } catch (const device::SchemaError& e) {
        const bool typed = body.contains("temperatureTarget") && body["temperatureTarget"].is_number() &&
                           body.contains("humidityTarget") && body["humidityTarget"].is_number();
        throw HttpError{typed ? 422 : 400, e.what()};
      }
      const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
      const SettingsRecord record{device_id, setpoints, now};
      store.put_settings(record);
      if (!publisher || !publisher(device_id, setpoints)) {
        throw HttpError{503, "settings saved but the broker is unreachable; the device has not been told"};
      }
      spdlog::info("event=settings_updated device={} user={} temperature_target={} humidity_target={}", device_id,
                   session->username, setpoints.temperature_target_c, setpoints.humidity_target_pct);
      send_json(res, 200, to_json(record));
    }));

    server.Get("/api/settings", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto device_id = required_param(req, "device");
      const auto settings = store.settings_for(device_id);
      if (!settings) throw HttpError{404, "no settings stored for " + device_id};
      send_json(res, 200, to_json(*settings));
    }));

    server.Get("/api/recipes", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto device_id = required_param(req, "device");
      const auto latest = store.latest_count(device_id);
      const std::map<std::string, int> counts = latest ? latest->counts : std::map<std::string, int>{};
      json recipes = json::array();
      for (const auto& r : suggest_recipes(counts, catalog)) recipes.push_back(to_json(r));
      send_json(res, 200, json{{"device", device_id}, {"counts", counts}, {"recipes", std::move(recipes)}});
    }));

    server.Get("/api/calibration/report", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const auto model = required_param(req, "model");
      const auto path = options.runs_dir / "summary.json";
      std::ifstream in(path);
      if (options.runs_dir.empty() || !in) throw HttpError{404, "no experiment summary available"};
      const auto summary = json::parse(in, nullptr, false);
      if (summary.is_discarded() || !summary.contains("models")) {
        throw HttpError{500, "experiment summary is unreadable"};
      }
      const auto& models = summary["models"];
      if (!models.contains(model)) {
        std::vector<std::string> names;
        for (const auto& [name, _] : models.items()) names.push_back(name);
        throw HttpError{404, fmt::format("unknown model '{}'; available: {}", model, fmt::join(names, ", "))};
      }
      auto body = models[model];
      body["model"] = model;
      body["temperature"] = summary.value("temperature", json());
      send_json(res, 200, body);
    }));
  }

  void latest(const httplib::Request& req, httplib::Response& res, Collection c) {
    const auto device_id = required_param(req, "device");
    const auto record = store.query_latest(c, device_id);
    if (!record) throw HttpError{404, fmt::format("no {} records for {}", to_string(c), device_id)};
    send_json(res, 200, *record);
  }
};

ApiServer::ApiServer(Store& store, AuthService& auth, Catalog catalog, SettingsPublisher publisher,
                     ApiOptions options)
    : impl_(std::make_unique<Impl>(store, auth, std::move(catalog), std::move(publisher), std::move(options))) {
  impl_->routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::start() {
  auto& server = impl_->server;
  const auto& o = impl_->options;
  if (o.port == 0) {
    port_ = server.bind_to_any_port(o.host);
  } else {
    port_ = server.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  if (port_ <= 0) throw std::runtime_error(fmt::format("cannot bind HTTP server to {}:{}", o.host, o.port));
  impl_->thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  spdlog::info("event=http_listen address={}:{}", o.host, port_);
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace fridge::backend
