#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fridge {

/// Whole seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);

/// Inverse of format_timestamp; nullopt for anything else, including
/// impossible dates such as February 30.
std::optional<Timestamp> parse_timestamp(std::string_view text);

}  // namespace fridge
