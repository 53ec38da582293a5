#include "fridge/calib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fridge::calib {

double bin_edge(std::size_t b, int n_bins) { return static_cast<double>(b) / static_cast<double>(n_bins); }

std::size_t bin_index(double confidence, int n_bins) {
  const auto last = static_cast<std::size_t>(n_bins - 1);
  auto b = static_cast<std::size_t>(std::clamp(std::floor(confidence * n_bins), 0.0, static_cast<double>(last)));
  // The product can round across an edge; settle on the edges themselves.
  while (b > 0 && confidence < bin_edge(b, n_bins)) --b;
  while (b < last && confidence >= bin_edge(b + 1, n_bins)) ++b;
  return b;
}

CalibrationReport reliability_bins(std::span<const double> confidences, const std::vector<bool>& correct,
                                   int n_bins) {
  if (confidences.empty()) throw std::invalid_argument("reliability_bins: empty input");
  if (confidences.size() != correct.size()) throw std::invalid_argument("reliability_bins: length mismatch");
  if (n_bins < 1) throw std::invalid_argument("reliability_bins: n_bins must be >= 1");

  const std::size_t n = confidences.size();
  const auto bins = static_cast<std::size_t>(n_bins);

  // Sorting makes every floating-point sum independent of input order.
  std::vector<double> sorted(confidences.begin(), confidences.end());
  std::vector<std::size_t> correct_per_bin(bins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("reliability_bins: confidence outside [0, 1]");
    if (correct[i]) ++correct_per_bin[bin_index(c, n_bins)];
  }
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> conf_sum(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  for (double c : sorted) {
    const auto b = bin_index(c, n_bins);
    conf_sum[b] += c;
    ++count[b];
  }

  CalibrationReport report;
  report.n_samples = n;
  report.bins.resize(bins);

  const auto total = static_cast<double>(n);
  double over = 0.0;
  double under = 0.0;
  double all_conf = 0.0;
  std::size_t all_correct = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    auto& bin = report.bins[b];
    bin.lo = bin_edge(b, n_bins);
    bin.hi = b + 1 == bins ? 1.0 : bin_edge(b + 1, n_bins);
    bin.count = count[b];
    all_conf += conf_sum[b];
    all_correct += correct_per_bin[b];
    if (count[b] == 0) continue;

    const auto k = static_cast<double>(count[b]);
    bin.avg_confidence = conf_sum[b] / k;
    bin.accuracy = static_cast<double>(correct_per_bin[b]) / k;

    // n_b/N * |A_b - C_b| == |correct_b - conf_sum_b| / N
    const double diff = conf_sum[b] - static_cast<double>(correct_per_bin[b]);
    if (diff > 0.0) {
      over += diff;
    } else {
      under -= diff;
    }
    report.mce = std::max(report.mce, std::abs(*bin.accuracy - *bin.avg_confidence));
  }

  report.oce = over / total;
  report.uce = under / total;
  report.ece = (over + under) / total;
  report.mean_confidence = all_conf / total;
  report.accuracy = static_cast<double>(all_correct) / total;
  return report;
}

}  // namespace fridge::calib
