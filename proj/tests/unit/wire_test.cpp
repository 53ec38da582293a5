#include <random>
#include <stdexcept>

#include "doctest.h"
#include "fridge/wire/frame.hpp"
#include "fridge/wire/topic.hpp"
#include "random_frames.hpp"

using namespace fridge::wire;
using fridge::testing::random_frame;

namespace {

Bytes bytes(std::initializer_list<int> v) {
  Bytes out;
  for (int b : v) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

}  // namespace

TEST_CASE("worked encodings") {
  CHECK(encode_frame(PingReq{}) == bytes({0, 0, 0, 1, 6}));
  CHECK(encode_frame(Publish{"a", {'x'}}) == bytes({0, 0, 0, 5, 5, 0, 1, 0x61, 0x78}));
  CHECK(encode_frame(Connect{"dev1"}) == bytes({0, 0, 0, 7, 1, 0, 4, 'd', 'e', 'v', '1'}));
  CHECK(encode_frame(Connack{ConnackCode::client_id_in_use}) == bytes({0, 0, 0, 2, 2, 1}));
  CHECK(encode_frame(Suback{SubackCode::rejected}) == bytes({0, 0, 0, 2, 4, 0x80}));
  CHECK(encode_frame(Disconnect{}) == bytes({0, 0, 0, 1, 8}));
}

TEST_CASE("decode errors") {
  CHECK(decode_frame(bytes({0, 0, 0, 1, 9})).error() == DecodeError::bad_kind);
  CHECK(decode_frame(bytes({0, 0, 0, 1, 0})).error() == DecodeError::bad_kind);
  CHECK(decode_frame(Bytes{}).error() == DecodeError::truncated);
  CHECK(decode_frame(bytes({0, 0, 0})).error() == DecodeError::truncated);
  CHECK(decode_frame(bytes({0, 0, 0, 5, 5, 0, 1})).error() == DecodeError::truncated);
  CHECK(decode_frame(bytes({0, 0, 0, 0})).error() == DecodeError::length_mismatch);
  CHECK(decode_frame(bytes({0xff, 0xff, 0xff, 0xff, 5})).error() == DecodeError::length_mismatch);
  // trailing byte after a complete frame
  CHECK(decode_frame(bytes({0, 0, 0, 1, 6, 0})).error() == DecodeError::length_mismatch);
  // PINGREQ with a payload
  CHECK(decode_frame(bytes({0, 0, 0, 2, 6, 0})).error() == DecodeError::length_mismatch);
  // CONNECT whose string length overruns the frame
  CHECK(decode_frame(bytes({0, 0, 0, 4, 1, 0, 5, 'a'})).error() == DecodeError::length_mismatch);
  // PUBLISH topic length past the end
  CHECK(decode_frame(bytes({0, 0, 0, 4, 5, 0, 9, 'a'})).error() == DecodeError::length_mismatch);
  // invalid UTF-8 in a client id, overlong '/' in a topic
  CHECK(decode_frame(bytes({0, 0, 0, 4, 1, 0, 1, 0xff})).error() == DecodeError::bad_utf8);
  CHECK(decode_frame(bytes({0, 0, 0, 5, 5, 0, 2, 0xc0, 0xaf})).error() == DecodeError::bad_utf8);
  // wildcard publish topic, embedded wildcard filter
  CHECK(decode_frame(bytes({0, 0, 0, 4, 5, 0, 1, '#'})).error() == DecodeError::bad_topic);
  CHECK(decode_frame(bytes({0, 0, 0, 5, 3, 0, 2, 'a', '+'})).error() == DecodeError::bad_topic);
  CHECK(decode_frame(bytes({0, 0, 0, 3, 5, 0, 0})).error() == DecodeError::bad_topic);
}

TEST_CASE("encode rejects invalid frames") {
  CHECK_THROWS_AS(encode_frame(Publish{"a/#", {}}), std::invalid_argument);
  CHECK_THROWS_AS(encode_frame(Publish{"", {}}), std::invalid_argument);
  CHECK_THROWS_AS(encode_frame(Subscribe{"a/#/b"}), std::invalid_argument);
  CHECK_THROWS_AS(encode_frame(Connect{std::string(70000, 'a')}), std::invalid_argument);
  CHECK_THROWS_AS(encode_frame(Connect{"\xff"}), std::invalid_argument);
  Publish big{"t", Bytes(kMaxBodyBytes + 1)};
  CHECK_THROWS_AS(encode_frame(big), std::invalid_argument);
}

TEST_CASE("largest legal frame round trips") {
  Publish big{std::string(kMaxStringBytes, 't'), Bytes(kMaxBodyBytes, 0x5a)};
  const auto encoded = encode_frame(big);
  CHECK(encoded.size() == 4 + kMaxFrameLength);
  const auto decoded = decode_frame(encoded);
  REQUIRE(decoded.ok());
  CHECK(decoded.frame() == Frame{big});
}

TEST_CASE("round trip and prefix safety over random frames") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const auto frame = random_frame(rng);
    const auto encoded = encode_frame(frame);
    const auto decoded = decode_frame(encoded);
    REQUIRE(decoded.ok());
    CHECK(decoded.frame() == frame);
    for (std::size_t cut = 0; cut < encoded.size(); ++cut) {
      const auto prefix = decode_frame(std::span(encoded).first(cut));
      REQUIRE_FALSE(prefix.ok());
      CHECK(prefix.error() == DecodeError::truncated);
    }
  }
}

TEST_CASE("random bytes never crash the decoder") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<std::size_t> len(0, 40);
  int frames = 0;
  for (int i = 0; i < 10000; ++i) {
    Bytes b(len(rng));
    for (auto& x : b) x = static_cast<std::uint8_t>(byte(rng));
    // Bias half the inputs toward plausible headers.
    if (i % 2 == 0 && b.size() >= 5) {
      b[0] = b[1] = b[2] = 0;
      b[3] = static_cast<std::uint8_t>(b.size() - 4);
      b[4] = static_cast<std::uint8_t>(1 + byte(rng) % 8);
    }
    const auto result = decode_frame(b);
    frames += result.ok() ? 1 : 0;
  }
  CHECK(frames > 0);
}

TEST_CASE("stream reader splits and reassembles") {
  Bytes stream;
  std::vector<Frame> frames{Connect{"d"}, Subscribe{"fridge/#"}, Publish{"fridge/d/env", {'{', '}'}}, PingReq{}};
  for (const auto& f : frames) {
    const auto e = encode_frame(f);
    stream.insert(stream.end(), e.begin(), e.end());
  }
  FrameReader reader;
  std::vector<Frame> out;
  for (auto b : stream) {
    reader.feed(std::span(&b, 1));
    while (auto r = reader.next()) {
      REQUIRE(r->ok());
      out.push_back(r->frame());
    }
  }
  CHECK(out == frames);
  CHECK(reader.buffered() == 0);

  FrameReader bad;
  const auto junk = bytes({0, 0, 0, 1, 42});
  bad.feed(junk);
  const auto r = bad.next();
  REQUIRE(r.has_value());
  CHECK(r->error() == DecodeError::bad_kind);
}

TEST_CASE("topic filters") {
  CHECK(TopicFilter::parse("fridge/+/env"));
  CHECK(TopicFilter::parse("#"));
  CHECK_FALSE(TopicFilter::parse("fridge/#/env"));
  CHECK_FALSE(TopicFilter::parse("fri+dge"));
  CHECK_FALSE(TopicFilter::parse("a/b#"));
  CHECK_FALSE(TopicFilter::parse(""));

  auto matches = [](const char* f, const char* t) { return topic_matches(*TopicFilter::parse(f), t); };
  CHECK(matches("fridge/+/env", "fridge/dev1/env"));
  CHECK(matches("fridge/#", "fridge/dev1/detections"));
  CHECK_FALSE(matches("fridge/+/env", "fridge/dev1/detections"));
  CHECK(matches("fridge/#", "fridge"));
  CHECK(matches("#", "anything/at/all"));
  CHECK_FALSE(matches("fridge/+", "fridge/a/b"));
  CHECK_FALSE(matches("fridge/+/env", "fridge/env"));
  CHECK(matches("+/+", "/x"));
  CHECK(matches("a//b", "a//b"));
  CHECK_FALSE(matches("a/b", "a/b/c"));
}

TEST_CASE("matching depends only on level structure") {
  std::mt19937_64 rng(5);
  static const std::vector<std::string> words{"fridge", "dev1", "env", "x"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> depth(1, 4);
  auto join = [](const std::vector<std::string>& levels) {
    std::string out;
    for (std::size_t i = 0; i < levels.size(); ++i) out += (i ? "/" : "") + levels[i];
    return out;
  };
  for (int i = 0; i < 2000; ++i) {
    std::vector<std::string> filter_levels;
    std::vector<std::string> topic_levels;
    const int n = depth(rng);
    for (int l = 0; l < n; ++l) {
      filter_levels.push_back(words[pick(rng)]);
      topic_levels.push_back(rng() % 3 == 0 ? words[pick(rng)] : filter_levels.back());
    }
    if (rng() % 4 == 0) topic_levels.push_back(words[pick(rng)]);
    const auto filter = join(filter_levels);
    const auto topic = join(topic_levels);
    const auto f = TopicFilter::parse(filter);
    REQUIRE(f);
    const bool base = topic_matches(*f, topic);
    CHECK(base == (filter == topic));
    CHECK(topic_matches(*TopicFilter::parse(filter + "/x"), topic + "/x") == base);
  }
}

TEST_CASE("utf8 validation") {
  CHECK(is_valid_utf8("plain"));
  CHECK(is_valid_utf8("temp°C 温度 😀"));
  CHECK_FALSE(is_valid_utf8("\xc3"));
  CHECK_FALSE(is_valid_utf8("\xed\xa0\x80"));  // surrogate
  CHECK_FALSE(is_valid_utf8("\xf4\x90\x80\x80"));  // > U+10FFFF
  CHECK_FALSE(is_valid_utf8("\xe0\x80\xaf"));  // overlong
}
