#include "fridge/calib/adafocal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "fridge/calib/metrics.hpp"

namespace fridge::calib {

AdaFocalState AdaFocalState::from_config(const LossConfig& config) {
  config.validate();
  AdaFocalState state;
  state.gammas.assign(static_cast<std::size_t>(config.n_bins),
                      std::clamp(config.gamma, config.gamma_clamp.first, config.gamma_clamp.second));
  state.lambda = config.lambda;
  state.clamp = config.gamma_clamp;
  return state;
}

double AdaFocalState::gamma_for(double confidence) const {
  return gammas.at(bin_index(confidence, static_cast<int>(gammas.size())));
}

AdaFocalState adafocal_step(const AdaFocalState& state, const CalibrationReport& val_report) {
  if (state.gammas.size() != val_report.bins.size()) {
    throw std::invalid_argument(fmt::format("adafocal_step: state has {} bins, report has {}",
                                            state.gammas.size(), val_report.bins.size()));
  }
  AdaFocalState next = state;
  for (std::size_t b = 0; b < next.gammas.size(); ++b) {
    const auto gap = val_report.bins[b].gap();
    if (!gap) continue;
    const double updated = state.gammas[b] * std::exp(state.lambda * *gap);
    next.gammas[b] = std::clamp(updated, state.clamp.first, state.clamp.second);
  }
  ++next.t;
  return next;
}

}  // namespace fridge::calib
