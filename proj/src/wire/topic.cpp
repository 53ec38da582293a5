#include "fridge/wire/topic.hpp"

namespace fridge::wire {

std::vector<std::string> split_levels(std::string_view text) {
  std::vector<std::string> levels;
  std::size_t start = 0;
  while (true) {
    const auto slash = text.find('/', start);
    if (slash == std::string_view::npos) {
      levels.emplace_back(text.substr(start));
      return levels;
    }
    levels.emplace_back(text.substr(start, slash - start));
    start = slash + 1;
  }
}

std::optional<TopicFilter> TopicFilter::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  TopicFilter filter;
  filter.text_ = std::string(text);
  filter.levels_ = split_levels(text);
  for (std::size_t i = 0; i < filter.levels_.size(); ++i) {
    const auto& level = filter.levels_[i];
    if (level == "+") continue;
    if (level == "#") {
      if (i + 1 != filter.levels_.size()) return std::nullopt;
      continue;
    }
    if (level.find_first_of("+#") != std::string::npos) return std::nullopt;
  }
  return filter;
}

bool is_valid_topic(std::string_view topic) {
  return !topic.empty() && topic.find_first_of("+#") == std::string_view::npos;
}

bool topic_matches(const TopicFilter& filter, std::string_view topic) {
  const auto& pattern = filter.levels();
  const auto levels = split_levels(topic);
  std::size_t i = 0;
  for (; i < pattern.size(); ++i) {
    if (pattern[i] == "#") return true;
    if (i >= levels.size()) return false;
    if (pattern[i] != "+" && pattern[i] != levels[i]) return false;
  }
  return i == levels.size();
}

}  // namespace fridge::wire
