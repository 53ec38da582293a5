#include "fridge/backend/recipes.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace fridge::backend {

Catalog catalog_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("recipe catalog must be a JSON object");
  Catalog catalog;
  for (const auto& [name, needs] : j.items()) {
    if (!needs.is_object()) throw std::invalid_argument("recipe '" + name + "' must map classes to quantities");
    Recipe r{name, {}};
    for (const auto& [cls, qty] : needs.items()) {
      if (!qty.is_number_integer() || qty.get<int>() < 1) {
        throw std::invalid_argument("recipe '" + name + "' needs a positive integer quantity of '" + cls + "'");
      }
      r.requirements[cls] = qty.get<int>();
    }
    catalog.push_back(std::move(r));
  }
  return catalog;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open recipe catalog " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("recipe catalog " + path.string() + " is not valid JSON");
  try {
    return catalog_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::vector<Recipe> suggest_recipes(const std::map<std::string, int>& counts, const Catalog& catalog) {
  std::vector<Recipe> out;
  for (const auto& recipe : catalog) {
    const bool covered = std::all_of(recipe.requirements.begin(), recipe.requirements.end(), [&](const auto& need) {
      const auto it = counts.find(need.first);
      return it != counts.end() && it->second >= need.second;
    });
    if (covered) out.push_back(recipe);
  }
  std::sort(out.begin(), out.end(), [](const Recipe& a, const Recipe& b) {
    if (a.requirements.size() != b.requirements.size()) return a.requirements.size() > b.requirements.size();
    return a.name < b.name;
  });
  return out;
}

nlohmann::json to_json(const Recipe& recipe) {
  return {{"name", recipe.name}, {"requirements", recipe.requirements}};
}

}  // namespace fridge::backend
