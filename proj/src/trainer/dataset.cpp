#include "fridge/trainer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace fridge::trainer {

bool DatasetSpec::is_imbalanced() const {
  if (class_priors.empty()) return false;
  const double largest = *std::max_element(class_priors.begin(), class_priors.end());
  return std::any_of(class_priors.begin(), class_priors.end(), [&](double p) { return p <= largest / 2.0; });
}

std::size_t DatasetSpec::class_index(const std::string& name) const {
  const auto it = std::find(class_names.begin(), class_names.end(), name);
  if (it == class_names.end()) throw std::out_of_range("unknown class: " + name);
  return static_cast<std::size_t>(it - class_names.begin());
}

void DatasetSpec::validate() const {
  const std::size_t k = n_classes();
  if (k < 2) throw std::invalid_argument("dataset needs at least two classes");
  if (class_names.size() != k) throw std::invalid_argument("class_names and class_priors differ in length");
  double total = 0.0;
  for (double p : class_priors) {
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("class priors must be finite and non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument(fmt::format("class priors sum to {}", total));
  if (class_means.size() != k) throw std::invalid_argument("class_means must have one row per class");
  const std::size_t d = feature_dim();
  if (d < 2) throw std::invalid_argument("feature dimension must be >= 2");
  for (const auto& row : class_means) {
    if (row.size() != d) throw std::invalid_argument("class_means rows differ in length");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("class_means contains a non-finite value");
    }
  }
  if (!std::isfinite(noise_sigma) || noise_sigma <= 0.0) throw std::invalid_argument("noise_sigma must be > 0");
  if (n_train == 0) throw std::invalid_argument("n_train must be > 0");
}

DatasetSpec default_dataset_spec(std::uint64_t seed) {
  DatasetSpec spec;
  spec.class_names = {"Purple Sweet Potato", "Water Spinach", "Apple", "Beetroot", "Spinach"};
  spec.class_priors = {0.40, 0.25, 0.20, 0.10, 0.05};
  spec.seed = seed;

  constexpr std::size_t dim = 8;
  constexpr double radius = 3.0;
  std::mt19937_64 layout(20250101);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < spec.class_priors.size(); ++k) {
    std::vector<double> mean(dim);
    for (double& v : mean) v = normal(layout);
    const double norm = std::sqrt(std::inner_product(mean.begin(), mean.end(), mean.begin(), 0.0));
    for (double& v : mean) v *= radius / norm;
    spec.class_means.push_back(std::move(mean));
  }
  return spec;
}

std::vector<double> sample_features(const DatasetSpec& spec, std::size_t cls, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> x = spec.class_means.at(cls);
  for (double& v : x) v += sigma * noise(rng);
  return x;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<std::size_t> pick(spec.class_priors.begin(), spec.class_priors.end());
  auto draw = [&](std::size_t n) {
    std::vector<LabeledExample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      LabeledExample ex;
      ex.y = pick(rng);
      ex.x = sample_features(spec, ex.y, spec.noise_sigma, rng);
      out.push_back(std::move(ex));
    }
    return out;
  };
  Dataset data;
  data.train = draw(spec.n_train);
  data.val = draw(spec.n_val);
  data.test = draw(spec.n_test);
  return data;
}

nlohmann::json dataset_spec_to_json(const DatasetSpec& spec) {
  return {{"class_names", spec.class_names},
          {"class_priors", spec.class_priors},
          {"class_means", spec.class_means},
          {"noise_sigma", spec.noise_sigma},
          {"n_train", spec.n_train},
          {"n_val", spec.n_val},
          {"n_test", spec.n_test},
          {"seed", spec.seed}};
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
  DatasetSpec spec;
  spec.class_names = j.at("class_names").get<std::vector<std::string>>();
  spec.class_priors = j.at("class_priors").get<std::vector<double>>();
  spec.class_means = j.at("class_means").get<std::vector<std::vector<double>>>();
  spec.noise_sigma = j.at("noise_sigma").get<double>();
  spec.n_train = j.at("n_train").get<std::size_t>();
  spec.n_val = j.at("n_val").get<std::size_t>();
  spec.n_test = j.at("n_test").get<std::size_t>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.validate();
  return spec;
}

}  // namespace fridge::trainer
