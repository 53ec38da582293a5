#include <algorithm>
#include <random>

#include "doctest.h"
#include "fridge/calib/metrics.hpp"
#include "fridge/calib/report_io.hpp"
#include "oracles.hpp"

using namespace fridge::calib;

TEST_CASE("perfectly confident and correct predictions have zero ECE") {
  const std::vector<double> conf(10, 1.0);
  const std::vector<bool> correct(10, true);
  const auto report = reliability_bins(conf, correct, 15);
  CHECK(report.ece == 0.0);
  CHECK(report.bins.back().count == 10);
}

TEST_CASE("single bin hand case") {
  const auto report = reliability_bins(std::vector<double>{0.9, 0.9}, std::vector<bool>{true, false}, 1);
  REQUIRE(report.bins.size() == 1);
  CHECK(*report.bins[0].accuracy == 0.5);
  CHECK(*report.bins[0].avg_confidence == 0.9);
  CHECK(report.ece == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(report.oce == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(report.uce == 0.0);
  CHECK(report.mce == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("bin edges") {
  CHECK(bin_index(0.0, 15) == 0);
  CHECK(bin_index(1.0, 15) == 14);
  CHECK(bin_index(0.5, 2) == 1);
  CHECK(bin_index(std::nextafter(0.5, 0.0), 2) == 0);
  for (int n = 1; n <= 20; ++n) {
    for (int b = 1; b < n; ++b) {
      const double edge = static_cast<double>(b) / n;
      CHECK(bin_index(edge, n) == static_cast<std::size_t>(b));
      CHECK(bin_index(std::nextafter(edge, 0.0), n) == static_cast<std::size_t>(b - 1));
    }
  }
}

TEST_CASE("empty bins are flagged, not zero") {
  const auto report = reliability_bins(std::vector<double>{0.95}, std::vector<bool>{true}, 4);
  CHECK(report.bins[0].empty());
  CHECK_FALSE(report.bins[0].avg_confidence.has_value());
  CHECK_FALSE(report.bins[0].accuracy.has_value());
  CHECK(report.bins[3].count == 1);
  const auto table = report_to_table(report);
  CHECK(table.find("\t-\t-\n") != std::string::npos);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(reliability_bins(std::vector<double>{}, std::vector<bool>{}, 5), std::invalid_argument);
  CHECK_THROWS_AS(reliability_bins(std::vector<double>{0.5}, std::vector<bool>{true, false}, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(reliability_bins(std::vector<double>{1.5}, std::vector<bool>{true}, 5), std::invalid_argument);
  CHECK_THROWS_AS(reliability_bins(std::vector<double>{0.5}, std::vector<bool>{true}, 0), std::invalid_argument);
}

TEST_CASE("report invariants over random inputs") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 60;
    const int bins = 1 + trial % 17;
    std::vector<double> conf(static_cast<std::size_t>(n));
    std::vector<bool> correct(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      conf[static_cast<std::size_t>(i)] = unit(rng);
      correct[static_cast<std::size_t>(i)] = unit(rng) < conf[static_cast<std::size_t>(i)];
    }
    const auto report = reliability_bins(conf, correct, bins);
    CHECK(report.ece >= 0.0);
    CHECK(report.ece <= 1.0);
    CHECK(std::abs(report.ece - (report.oce + report.uce)) <= 1e-12);
    CHECK(report.mce <= 1.0);
    std::size_t total = 0;
    for (const auto& b : report.bins) {
      total += b.count;
      if (b.empty()) continue;
      CHECK(*b.avg_confidence >= b.lo);
      CHECK(*b.avg_confidence <= b.hi);
      CHECK(*b.accuracy >= 0.0);
      CHECK(*b.accuracy <= 1.0);
      CHECK(report.mce >= std::abs(*b.gap()));
    }
    CHECK(total == static_cast<std::size_t>(n));

    // Order of samples never matters, bit for bit.
    std::vector<std::size_t> order(conf.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> conf2;
    std::vector<bool> correct2;
    for (auto i : order) {
      conf2.push_back(conf[i]);
      correct2.push_back(correct[i]);
    }
    CHECK(reliability_bins(conf2, correct2, bins) == report);

    // Non-dyadic inputs: the brute-force oracle agrees to rounding.
    const auto oracle = fridge::testing::brute_force_ece(conf, correct, bins);
    CHECK(std::abs(oracle.ece - report.ece) <= 1e-12);
  }
}

TEST_CASE("json round trip keeps empty flags") {
  const auto report =
      reliability_bins(std::vector<double>{0.1, 0.7, 0.72}, std::vector<bool>{false, true, false}, 5);
  const auto back = report_from_json(nlohmann::json::parse(report_to_json(report).dump()));
  CHECK(back == report);
}
