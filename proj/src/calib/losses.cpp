#include "fridge/calib/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fridge::calib {
namespace {

void check_label(const LogitVector& logits, std::size_t label) {
  if (label >= logits.size()) throw LabelOutOfRange(label, logits.size());
}

void check_gamma(double gamma) {
  if (!std::isfinite(gamma) || gamma < 0.0) throw std::invalid_argument("gamma must be finite and >= 0");
}

// exp(z_i - max) for every class, plus their sum.
struct ShiftedExp {
  std::vector<double> terms;
  double total = 0.0;
  double max = 0.0;
};

ShiftedExp shifted_exp(const LogitVector& logits) {
  ShiftedExp out;
  const auto z = logits.values();
  out.max = *std::max_element(z.begin(), z.end());
  out.terms.reserve(z.size());
  for (double v : z) {
    out.terms.push_back(std::exp(v - out.max));
    out.total += out.terms.back();
  }
  return out;
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// True-class probability q, its complement r = 1 - q computed from the other
// classes' mass, and log q chosen for accuracy on either side of 0.5.
struct TrueClass {
  double q;
  double r;
  double log_q;
};

TrueClass true_class(const ShiftedExp& e, const LogitVector& logits, std::size_t label) {
  double rest = 0.0;
  for (std::size_t i = 0; i < e.terms.size(); ++i) {
    if (i != label) rest += e.terms[i];
  }
  TrueClass t{};
  t.q = e.terms[label] / e.total;
  t.r = rest / e.total;
  t.log_q = t.q > 0.5 ? std::log1p(-t.r) : (logits[label] - e.max) - std::log(e.total);
  return t;
}

}  // namespace

ProbVector softmax(const LogitVector& logits) {
  auto e = shifted_exp(logits);
  for (double& v : e.terms) v /= e.total;
  return ProbVector(std::move(e.terms), ProbMode::softmax);
}

ProbVector sigmoid(const LogitVector& logits) {
  std::vector<double> p;
  p.reserve(logits.size());
  for (double z : logits.values()) p.push_back(logistic(z));
  return ProbVector(std::move(p), ProbMode::sigmoid);
}

std::vector<double> log_softmax(const LogitVector& logits) {
  const auto e = shifted_exp(logits);
  const double log_total = std::log(e.total);
  std::vector<double> out;
  out.reserve(logits.size());
  for (double z : logits.values()) out.push_back((z - e.max) - log_total);
  return out;
}

double cross_entropy(const LogitVector& logits, std::size_t label) {
  check_label(logits, label);
  return -log_softmax(logits)[label];
}

double focal_loss(const LogitVector& logits, std::size_t label, double gamma) {
  check_label(logits, label);
  check_gamma(gamma);
  const auto t = true_class(shifted_exp(logits), logits, label);
  return -std::pow(t.r, gamma) * t.log_q;
}

std::vector<double> focal_loss_grad(const LogitVector& logits, std::size_t label, double gamma) {
  check_label(logits, label);
  check_gamma(gamma);
  const auto e = shifted_exp(logits);
  const auto t = true_class(e, logits, label);

  // dL/dz_j = factor * (onehot_j - q_j) with
  // factor = gamma * r^(gamma-1) * q * log q - r^gamma = -r^gamma * (1 + gamma * h),
  // h = -q log q / r, which tends to 1 as r -> 0.
  const double h = t.r < 1e-12 ? 1.0 : -t.q * t.log_q / t.r;
  const double factor = -std::pow(t.r, gamma) * (1.0 + gamma * h);

  std::vector<double> grad(logits.size());
  for (std::size_t j = 0; j < grad.size(); ++j) {
    const double q_j = e.terms[j] / e.total;
    const double onehot = j == label ? 1.0 : 0.0;
    grad[j] = factor * (onehot - q_j);
  }
  return grad;
}

double binary_cross_entropy(double logit, bool positive) {
  // -[y log s(z) + (1-y) log(1 - s(z))] = softplus(z) - y z
  return softplus(logit) - (positive ? logit : 0.0);
}

double bce_loss(const LogitVector& logits, std::size_t label) {
  check_label(logits, label);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += binary_cross_entropy(logits[i], i == label);
  return total;
}

std::vector<double> bce_loss_grad(const LogitVector& logits, std::size_t label) {
  check_label(logits, label);
  std::vector<double> grad(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) grad[i] = logistic(logits[i]) - (i == label ? 1.0 : 0.0);
  return grad;
}

}  // namespace fridge::calib
