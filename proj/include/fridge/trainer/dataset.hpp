#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

namespace fridge::trainer {

/// Gaussian-mixture classification problem: class k draws features from
/// N(class_means[k], noise_sigma^2 I) with probability class_priors[k].
struct DatasetSpec {
  std::vector<std::string> class_names;
  std::vector<double> class_priors;
  std::vector<std::vector<double>> class_means;  // [K][D]
  double noise_sigma = 1.0;
  std::size_t n_train = 2000;
  std::size_t n_val = 1000;
  std::size_t n_test = 2000;
  std::uint64_t seed = 7;

  [[nodiscard]] std::size_t n_classes() const noexcept { return class_priors.size(); }
  [[nodiscard]] std::size_t feature_dim() const noexcept {
    return class_means.empty() ? 0 : class_means.front().size();
  }
  /// Some prior is at most half the largest one.
  [[nodiscard]] bool is_imbalanced() const;
  /// Index of the class with this name; throws std::out_of_range when absent.
  [[nodiscard]] std::size_t class_index(const std::string& name) const;

  /// Throws std::invalid_argument on malformed priors, means or sizes.
  void validate() const;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// Five produce classes with priors (0.40, 0.25, 0.20, 0.10, 0.05) in eight
/// dimensions. Class means sit at distance 3 from the origin in fixed random
/// directions; noise sigma is 1.
DatasetSpec default_dataset_spec(std::uint64_t seed = 7);

struct LabeledExample {
  std::vector<double> x;
  std::size_t y = 0;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

struct Dataset {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> val;
  std::vector<LabeledExample> test;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Deterministic per spec.seed.
Dataset generate_dataset(const DatasetSpec& spec);

/// One feature vector for class `cls` with the given noise level.
std::vector<double> sample_features(const DatasetSpec& spec, std::size_t cls, double sigma, std::mt19937_64& rng);

nlohmann::json dataset_spec_to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

}  // namespace fridge::trainer
