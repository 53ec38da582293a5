#include "fridge/backend/ingest.hpp"

#include <spdlog/spdlog.h>

#include "fridge/wire/topic.hpp"

namespace fridge::backend {

const char* to_string(IngestErrorCode code) {
  switch (code) {
    case IngestErrorCode::schema_violation:
      return "SCHEMA_VIOLATION";
    case IngestErrorCode::unknown_topic:
      return "UNKNOWN_TOPIC";
  }
  return "UNKNOWN";
}

IngestResult Ingestor::ingest(std::string_view topic, std::string_view body) {
  try {
    auto result = ingest_checked(topic, body);
    ++(result.duplicate ? duplicates_ : accepted_);
    return result;
  } catch (const IngestError& e) {
    ++rejected_;
    spdlog::warn("event=ingest_rejected code={} topic={} reason=\"{}\"", to_string(e.code()), topic, e.what());
    throw;
  }
}

IngestResult Ingestor::ingest_checked(std::string_view topic, std::string_view body) {
  const auto levels = wire::split_levels(topic);
  const bool shaped = levels.size() == 3 && levels[0] == "fridge" && !levels[1].empty();
  const bool detections = shaped && levels[2] == "detections";
  const bool env = shaped && levels[2] == "env";
  if (!detections && !env) {
    throw IngestError(IngestErrorCode::unknown_topic, "no schema for topic '" + std::string(topic) + "'");
  }
  const auto& device_id = levels[1];
  try {
    const auto json = device::parse_body(body);
    PutResult put;
    if (detections) {
      const auto event = device::detection_from_json(json);
      if (event.device_id != device_id) throw device::SchemaError("deviceId does not match the topic");
      put = store_.put_detection(event);
    } else {
      const auto reading = device::reading_from_json(json);
      if (reading.device_id != device_id) throw device::SchemaError("deviceId does not match the topic");
      put = store_.put_reading(reading);
    }
    return {std::move(put.ids), put.duplicate};
  } catch (const device::SchemaError& e) {
    throw IngestError(IngestErrorCode::schema_violation, e.what());
  } catch (const ConflictError& e) {
    throw IngestError(IngestErrorCode::schema_violation, e.what());
  }
}

}  // namespace fridge::backend
