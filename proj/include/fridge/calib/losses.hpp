#pragma once

#include <cstddef>
#include <vector>

#include "fridge/calib/types.hpp"

namespace fridge::calib {

/// Numerically stable softmax (max-subtracted).
ProbVector softmax(const LogitVector& logits);

/// Per-class logistic sigmoid; entries are independent.
ProbVector sigmoid(const LogitVector& logits);

/// log q_i for every class, computed as z_i - logsumexp(z).
std::vector<double> log_softmax(const LogitVector& logits);

/// Softmax cross-entropy -log q_label.
double cross_entropy(const LogitVector& logits, std::size_t label);

/// Focal loss -(1 - q_t)^gamma * log q_t for true class t.
/// gamma = 0 is plain cross-entropy.
double focal_loss(const LogitVector& logits, std::size_t label, double gamma);

/// Gradient of focal_loss with respect to the logits. At gamma = 0 this is q - onehot(label).
std::vector<double> focal_loss_grad(const LogitVector& logits, std::size_t label, double gamma);

/// Binary cross-entropy for one logit against a 0/1 target.
double binary_cross_entropy(double logit, bool positive);

/// One-vs-rest sigmoid BCE summed over all classes.
double bce_loss(const LogitVector& logits, std::size_t label);

/// sigmoid(z_i) - y_i per class.
std::vector<double> bce_loss_grad(const LogitVector& logits, std::size_t label);

}  // namespace fridge::calib
