#pragma once

// Random valid frames for codec tests.

#include <random>
#include <string>
#include <vector>

#include "fridge/wire/frame.hpp"

namespace fridge::testing {

inline std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces{"a", "b", "fridge", "/", "dev1", "env", "é", "温", "😀", "_", "9"};
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::string s;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += pieces[pick(rng)];
  return s;
}

inline wire::Frame random_frame(std::mt19937_64& rng) {
  using namespace wire;
  std::uniform_int_distribution<int> kind(1, 8);
  std::uniform_int_distribution<int> byte(0, 255);
  switch (kind(rng)) {
    case 1:
      return Connect{random_text(rng, 6)};
    case 2:
      return Connack{static_cast<ConnackCode>(byte(rng) % 3)};
    case 3: {
      static const std::vector<std::string> filters{"fridge/+/env", "fridge/#", "#", "+", "a/+/+/b", "x//y"};
      std::uniform_int_distribution<std::size_t> pick(0, filters.size() - 1);
      return Subscribe{filters[pick(rng)]};
    }
    case 4:
      return Suback{byte(rng) % 2 ? SubackCode::granted : SubackCode::rejected};
    case 5: {
      Publish p{random_text(rng, 8), {}};
      std::uniform_int_distribution<std::size_t> len(0, 300);
      p.body.resize(len(rng));
      for (auto& b : p.body) b = static_cast<std::uint8_t>(byte(rng));
      return p;
    }
    case 6:
      return PingReq{};
    case 7:
      return PingResp{};
    default:
      return Disconnect{};
  }
}

}  // namespace fridge::testing
