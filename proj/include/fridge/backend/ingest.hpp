#pragma once

#include <atomic>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fridge/backend/store.hpp"

namespace fridge::backend {

enum class IngestErrorCode { schema_violation, unknown_topic };

const char* to_string(IngestErrorCode code);

class IngestError : public std::runtime_error {
 public:
  IngestError(IngestErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  [[nodiscard]] IngestErrorCode code() const noexcept { return code_; }

 private:
  IngestErrorCode code_;
};

struct IngestResult {
  std::vector<std::string> ids;
  bool duplicate = false;
};

/// Validates broker messages and stores them. Accepts
/// fridge/{device}/detections (one image plus one linked count record) and
/// fridge/{device}/env (one fridge-stat record).
class Ingestor {
 public:
  explicit Ingestor(Store& store) : store_(store) {}

  /// Throws IngestError. SCHEMA_VIOLATION covers malformed bodies, a body
  /// naming another device than its topic, and timestamps older than the
  /// device's latest record; nothing is stored in those cases.
  IngestResult ingest(std::string_view topic, std::string_view body);

  [[nodiscard]] std::size_t accepted() const noexcept { return accepted_.load(); }
  [[nodiscard]] std::size_t duplicates() const noexcept { return duplicates_.load(); }
  [[nodiscard]] std::size_t rejected() const noexcept { return rejected_.load(); }

 private:
  IngestResult ingest_checked(std::string_view topic, std::string_view body);

  Store& store_;
  std::atomic<std::size_t> accepted_{0};
  std::atomic<std::size_t> duplicates_{0};
  std::atomic<std::size_t> rejected_{0};
};

}  // namespace fridge::backend
