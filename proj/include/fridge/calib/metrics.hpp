#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fridge/calib/types.hpp"

namespace fridge::calib {

/// Index of the equal-width bin holding `confidence`. Bin b covers
/// [b/n_bins, (b+1)/n_bins); a confidence of exactly 1.0 lands in the last bin.
std::size_t bin_index(double confidence, int n_bins);

/// Lower edge of bin b, b / n_bins.
double bin_edge(std::size_t b, int n_bins);

/// Reliability statistics over equal-width confidence bins.
///
/// Per bin: sample count, mean confidence C_b and accuracy A_b (left empty
/// for bins without samples). Scalars:
///   ece = sum_b (n_b / N) |A_b - C_b|
///   oce = sum_b (n_b / N) max(C_b - A_b, 0)
///   uce = sum_b (n_b / N) max(A_b - C_b, 0)
///   mce = max_b |A_b - C_b|
/// Empty bins contribute nothing. The result does not depend on sample order.
///
/// Throws std::invalid_argument on empty input, mismatched lengths,
/// confidences outside [0, 1] or n_bins < 1.
CalibrationReport reliability_bins(std::span<const double> confidences, const std::vector<bool>& correct,
                                   int n_bins);

}  // namespace fridge::calib
