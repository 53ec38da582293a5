#pragma once

// Reference computations used only by tests. Each one is written against the
// textbook definition and shares no code path with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fridge::testing {

/// Central finite-difference gradient of f at x.
inline std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                             std::vector<double> x, double step = 1e-5) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = f(x);
    x[i] = saved - step;
    const double down = f(x);
    x[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

/// max_i |a_i - b_i| / max(max|a|, max|b|, floor)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-6) {
  double diff = 0.0;
  double scale = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

/// Plain softmax cross-entropy from the definition, no max subtraction.
inline double naive_cross_entropy(const std::vector<double>& z, std::size_t label) {
  double total = 0.0;
  for (double v : z) total += std::exp(v);
  return -std::log(std::exp(z[label]) / total);
}

/// Focal loss straight from -(1-q)^g log q with a naive softmax.
inline double naive_focal(const std::vector<double>& z, std::size_t label, double gamma) {
  double total = 0.0;
  for (double v : z) total += std::exp(v);
  const double q = std::exp(z[label]) / total;
  return -std::pow(1.0 - q, gamma) * std::log(q);
}

inline double naive_bce(const std::vector<double>& z, std::size_t label) {
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-z[i]));
    total -= i == label ? std::log(s) : std::log(1.0 - s);
  }
  return total;
}

struct OracleBin {
  std::size_t count = 0;
  double conf_sum = 0.0;
  std::size_t correct = 0;
};

struct OracleReport {
  std::vector<OracleBin> bins;
  double ece = 0.0;
};

/// Brute-force grouping: for every bin, scan all samples and collect those
/// whose confidence lies in [b/n, (b+1)/n) (the last bin also takes 1.0).
/// ECE is (1/N) * sum_b |correct_b - conf_sum_b|, i.e. sum_b (n_b/N)|A_b - C_b|.
inline OracleReport brute_force_ece(const std::vector<double>& conf, const std::vector<bool>& correct, int n_bins) {
  OracleReport out;
  out.bins.resize(static_cast<std::size_t>(n_bins));
  double gap_total = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    const double lo = static_cast<double>(b) / n_bins;
    const double hi = static_cast<double>(b + 1) / n_bins;
    std::vector<double> members;
    auto& bin = out.bins[static_cast<std::size_t>(b)];
    for (std::size_t i = 0; i < conf.size(); ++i) {
      const bool inside = conf[i] >= lo && (conf[i] < hi || (b == n_bins - 1 && conf[i] <= 1.0));
      if (!inside) continue;
      members.push_back(conf[i]);
      bin.correct += correct[i] ? 1 : 0;
    }
    std::sort(members.begin(), members.end());
    for (double c : members) bin.conf_sum += c;
    bin.count = members.size();
    if (bin.count > 0) gap_total += std::abs(static_cast<double>(bin.correct) - bin.conf_sum);
  }
  out.ece = gap_total / static_cast<double>(conf.size());
  return out;
}

/// Exhaustive grid minimum of f over [lo, hi] with `points` samples.
inline double grid_minimum(const std::function<double(double)>& f, double lo, double hi, int points) {
  double best_x = lo;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    const double v = f(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  return best_x;
}

/// Filter/topic match by recursive descent over the raw characters.
inline bool naive_topic_match(const std::string& filter, const std::string& topic) {
  if (filter == "#") return true;
  const auto fcut = filter.find('/');
  const auto tcut = topic.find('/');
  const std::string fhead = filter.substr(0, fcut);
  const std::string thead = topic.substr(0, tcut);
  if (fhead != "+" && fhead != thead) return false;
  if (fcut == std::string::npos) return tcut == std::string::npos;
  const std::string frest = filter.substr(fcut + 1);
  if (tcut == std::string::npos) return frest == "#";
  return naive_topic_match(frest, topic.substr(tcut + 1));
}

}  // namespace fridge::testing
