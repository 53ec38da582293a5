#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fridge::wire {

/// Subscription pattern split on '/'. '+' matches exactly one level, a
/// trailing '#' matches every remaining level including none.
class TopicFilter {
 public:
  /// nullopt when a wildcard is embedded in a level or '#' is not last.
  static std::optional<TopicFilter> parse(std::string_view text);

  [[nodiscard]] const std::string& text() const noexcept { return text_; }
  [[nodiscard]] const std::vector<std::string>& levels() const noexcept { return levels_; }

  friend bool operator==(const TopicFilter& a, const TopicFilter& b) { return a.text_ == b.text_; }

 private:
  std::string text_;
  std::vector<std::string> levels_;
};

/// Non-empty and free of '+' and '#'.
bool is_valid_topic(std::string_view topic);

bool topic_matches(const TopicFilter& filter, std::string_view topic);

std::vector<std::string> split_levels(std::string_view text);

}  // namespace fridge::wire
