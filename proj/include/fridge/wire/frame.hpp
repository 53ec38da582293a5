#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fridge::wire {

using Bytes = std::vector<std::uint8_t>;

enum class FrameKind : std::uint8_t {
  connect = 1,
  connack = 2,
  subscribe = 3,
  suback = 4,
  publish = 5,
  pingreq = 6,
  pingresp = 7,
  disconnect = 8,
};

inline constexpr std::size_t kMaxStringBytes = 65535;
inline constexpr std::size_t kMaxBodyBytes = std::size_t{1} << 24;
/// Largest legal value of the length prefix (a PUBLISH with maximal topic and body).
inline constexpr std::size_t kMaxFrameLength = 1 + 2 + kMaxStringBytes + kMaxBodyBytes;

enum class ConnackCode : std::uint8_t { accepted = 0, client_id_in_use = 1, bad_client_id = 2 };
enum class SubackCode : std::uint8_t { granted = 0, rejected = 0x80 };

struct Connect {
  std::string client_id;
  friend bool operator==(const Connect&, const Connect&) = default;
};
struct Connack {
  ConnackCode code = ConnackCode::accepted;
  friend bool operator==(const Connack&, const Connack&) = default;
};
struct Subscribe {
  std::string filter;
  friend bool operator==(const Subscribe&, const Subscribe&) = default;
};
struct Suback {
  SubackCode code = SubackCode::granted;
  friend bool operator==(const Suback&, const Suback&) = default;
};
struct Publish {
  std::string topic;
  Bytes body;
  friend bool operator==(const Publish&, const Publish&) = default;
};
struct PingReq {
  friend bool operator==(const PingReq&, const PingReq&) = default;
};
struct PingResp {
  friend bool operator==(const PingResp&, const PingResp&) = default;
};
struct Disconnect {
  friend bool operator==(const Disconnect&, const Disconnect&) = default;
};

using Frame = std::variant<Connect, Connack, Subscribe, Suback, Publish, PingReq, PingResp, Disconnect>;

FrameKind kind_of(const Frame& frame);
const char* to_string(FrameKind kind);

enum class DecodeError {
  truncated,        // fewer bytes than the header or the declared length
  bad_kind,         // kind byte outside 1..8
  bad_utf8,         // client id, topic or filter is not valid UTF-8
  length_mismatch,  // declared length inconsistent with the kind's layout, or above the maximum
  bad_topic,        // empty topic, wildcard in a publish topic, or malformed filter
};

const char* to_string(DecodeError error);

/// Either a frame or the reason the bytes are not one.
class DecodeResult {
 public:
  DecodeResult(Frame frame) : value_(std::move(frame)) {}  // NOLINT(google-explicit-constructor)
  DecodeResult(DecodeError error) : value_(error) {}      // NOLINT(google-explicit-constructor)

  [[nodiscard]] bool ok() const noexcept { return std::holds_alternative<Frame>(value_); }
  [[nodiscard]] const Frame& frame() const { return std::get<Frame>(value_); }
  Frame& frame() { return std::get<Frame>(value_); }
  [[nodiscard]] DecodeError error() const { return std::get<DecodeError>(value_); }

 private:
  std::variant<Frame, DecodeError> value_;
};

/// 4-byte big-endian length (of everything after it), 1-byte kind, then:
///   CONNECT / SUBSCRIBE: u16 BE string length + UTF-8 bytes
///   CONNACK / SUBACK:    1 code byte
///   PUBLISH:             u16 BE topic length + topic bytes + body bytes
///   PINGREQ / PINGRESP / DISCONNECT: nothing
/// Throws std::invalid_argument when a field breaks the frame invariants.
Bytes encode_frame(const Frame& frame);

/// Decodes exactly one frame occupying all of `bytes`. Never throws.
DecodeResult decode_frame(std::span<const std::uint8_t> bytes);

/// Incremental decoder for a byte stream; one per connection.
class FrameReader {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete frame, nullopt when more bytes are needed, or a decode
  /// error. After an error the stream is unusable.
  std::optional<DecodeResult> next();
  [[nodiscard]] std::size_t buffered() const noexcept { return buffer_.size() - offset_; }

 private:
  Bytes buffer_;
  std::size_t offset_ = 0;
};

bool is_valid_utf8(std::string_view text);

}  // namespace fridge::wire
