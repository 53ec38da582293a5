#include <stdexcept>

#include "fridge/wire/frame.hpp"
#include "fridge/wire/topic.hpp"

namespace fridge::wire {
namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b) {
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::uint16_t get_u16(std::span<const std::uint8_t> b) {
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

void check_string(std::string_view s, const char* what) {
  if (s.size() > kMaxStringBytes) throw std::invalid_argument(std::string(what) + " longer than 65535 bytes");
  if (!is_valid_utf8(s)) throw std::invalid_argument(std::string(what) + " is not valid UTF-8");
}

void put_string(Bytes& out, std::string_view s) {
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

struct Encoder {
  Bytes& out;

  void operator()(const Connect& f) const {
    check_string(f.client_id, "client id");
    put_string(out, f.client_id);
  }
  void operator()(const Connack& f) const { out.push_back(static_cast<std::uint8_t>(f.code)); }
  void operator()(const Subscribe& f) const {
    check_string(f.filter, "topic filter");
    if (!TopicFilter::parse(f.filter)) throw std::invalid_argument("malformed topic filter: " + f.filter);
    put_string(out, f.filter);
  }
  void operator()(const Suback& f) const { out.push_back(static_cast<std::uint8_t>(f.code)); }
  void operator()(const Publish& f) const {
    check_string(f.topic, "topic");
    if (!is_valid_topic(f.topic)) throw std::invalid_argument("publish topic must be non-empty and wildcard-free");
    if (f.body.size() > kMaxBodyBytes) throw std::invalid_argument("publish body larger than 2^24 bytes");
    put_string(out, f.topic);
    out.insert(out.end(), f.body.begin(), f.body.end());
  }
  void operator()(const PingReq&) const {}
  void operator()(const PingResp&) const {}
  void operator()(const Disconnect&) const {}
};

// Length-prefixed string that must fill `payload` exactly.
std::variant<std::string, DecodeError> exact_string(std::span<const std::uint8_t> payload) {
  if (payload.size() < 2) return DecodeError::length_mismatch;
  const std::size_t n = get_u16(payload);
  if (payload.size() != 2 + n) return DecodeError::length_mismatch;
  std::string s(payload.begin() + 2, payload.end());
  if (!is_valid_utf8(s)) return DecodeError::bad_utf8;
  return s;
}

DecodeResult decode_payload(FrameKind kind, std::span<const std::uint8_t> payload) {
  switch (kind) {
    case FrameKind::connect: {
      auto s = exact_string(payload);
      if (auto* e = std::get_if<DecodeError>(&s)) return *e;
      return Frame{Connect{std::move(std::get<std::string>(s))}};
    }
    case FrameKind::subscribe: {
      auto s = exact_string(payload);
      if (auto* e = std::get_if<DecodeError>(&s)) return *e;
      auto& text = std::get<std::string>(s);
      if (!TopicFilter::parse(text)) return DecodeError::bad_topic;
      return Frame{Subscribe{std::move(text)}};
    }
    case FrameKind::connack:
    case FrameKind::suback: {
      if (payload.size() != 1) return DecodeError::length_mismatch;
      if (kind == FrameKind::connack) return Frame{Connack{static_cast<ConnackCode>(payload[0])}};
      return Frame{Suback{static_cast<SubackCode>(payload[0])}};
    }
    case FrameKind::publish: {
      if (payload.size() < 2) return DecodeError::length_mismatch;
      const std::size_t n = get_u16(payload);
      if (payload.size() < 2 + n) return DecodeError::length_mismatch;
      std::string topic(payload.begin() + 2, payload.begin() + 2 + static_cast<std::ptrdiff_t>(n));
      if (!is_valid_utf8(topic)) return DecodeError::bad_utf8;
      if (!is_valid_topic(topic)) return DecodeError::bad_topic;
      Bytes body(payload.begin() + 2 + static_cast<std::ptrdiff_t>(n), payload.end());
      if (body.size() > kMaxBodyBytes) return DecodeError::length_mismatch;
      return Frame{Publish{std::move(topic), std::move(body)}};
    }
    case FrameKind::pingreq:
    case FrameKind::pingresp:
    case FrameKind::disconnect:
      if (!payload.empty()) return DecodeError::length_mismatch;
      if (kind == FrameKind::pingreq) return Frame{PingReq{}};
      if (kind == FrameKind::pingresp) return Frame{PingResp{}};
      return Frame{Disconnect{}};
  }
  return DecodeError::bad_kind;
}

// Header checks shared by the one-shot and streaming decoders. Returns the
// total encoded size when the buffer holds a complete frame.
std::variant<std::size_t, DecodeError> frame_extent(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) return DecodeError::truncated;
  const std::size_t length = get_u32(bytes);
  if (length == 0 || length > kMaxFrameLength) return DecodeError::length_mismatch;
  if (bytes.size() < 4 + length) return DecodeError::truncated;
  return 4 + length;
}

DecodeResult decode_complete(std::span<const std::uint8_t> frame) {
  const std::uint8_t kind = frame[4];
  if (kind < 1 || kind > 8) return DecodeError::bad_kind;
  return decode_payload(static_cast<FrameKind>(kind), frame.subspan(5));
}

}  // namespace

FrameKind kind_of(const Frame& frame) { return static_cast<FrameKind>(frame.index() + 1); }

const char* to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::connect:
      return "CONNECT";
    case FrameKind::connack:
      return "CONNACK";
    case FrameKind::subscribe:
      return "SUBSCRIBE";
    case FrameKind::suback:
      return "SUBACK";
    case FrameKind::publish:
      return "PUBLISH";
    case FrameKind::pingreq:
      return "PINGREQ";
    case FrameKind::pingresp:
      return "PINGRESP";
    case FrameKind::disconnect:
      return "DISCONNECT";
  }
  return "UNKNOWN";
}

const char* to_string(DecodeError error) {
  switch (error) {
    case DecodeError::truncated:
      return "TRUNCATED";
    case DecodeError::bad_kind:
      return "BAD_KIND";
    case DecodeError::bad_utf8:
      return "BAD_UTF8";
    case DecodeError::length_mismatch:
      return "LENGTH_MISMATCH";
    case DecodeError::bad_topic:
      return "BAD_TOPIC";
  }
  return "UNKNOWN";
}

Bytes encode_frame(const Frame& frame) {
  Bytes payload;
  std::visit(Encoder{payload}, frame);
  Bytes out;
  out.reserve(5 + payload.size());
  put_u32(out, static_cast<std::uint32_t>(1 + payload.size()));
  out.push_back(static_cast<std::uint8_t>(kind_of(frame)));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

DecodeResult decode_frame(std::span<const std::uint8_t> bytes) {
  const auto extent = frame_extent(bytes);
  if (const auto* e = std::get_if<DecodeError>(&extent)) return *e;
  if (std::get<std::size_t>(extent) != bytes.size()) return DecodeError::length_mismatch;
  return decode_complete(bytes);
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<DecodeResult> FrameReader::next() {
  const std::span<const std::uint8_t> pending(buffer_.data() + offset_, buffer_.size() - offset_);
  const auto extent = frame_extent(pending);
  if (const auto* e = std::get_if<DecodeError>(&extent)) {
    if (*e == DecodeError::truncated) return std::nullopt;
    return DecodeResult(*e);
  }
  const std::size_t size = std::get<std::size_t>(extent);
  auto result = decode_complete(pending.first(size));
  offset_ += size;
  if (offset_ > 4096 && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return result;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= n) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Reject overlong forms, surrogates and values past U+10FFFF.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000)) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

}  // namespace fridge::wire
