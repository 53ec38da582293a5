#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace fridge::backend {

struct Recipe {
  std::string name;
  std::map<std::string, int> requirements;  // class name -> quantity needed
  friend bool operator==(const Recipe&, const Recipe&) = default;
};

using Catalog = std::vector<Recipe>;

/// {"recipe name": {"Class": quantity, ...}, ...}. Throws
/// std::invalid_argument for anything else.
Catalog catalog_from_json(const nlohmann::json& j);
/// Throws std::runtime_error when the file is missing or malformed.
Catalog load_catalog(const std::filesystem::path& path);

/// Recipes whose every requirement is covered by `counts`, ordered by the
/// number of distinct required items (most first), then by name.
std::vector<Recipe> suggest_recipes(const std::map<std::string, int>& counts, const Catalog& catalog);

nlohmann::json to_json(const Recipe& recipe);

}  // namespace fridge::backend
